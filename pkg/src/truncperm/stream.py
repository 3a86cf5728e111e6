"""Beyond-birthday-bound keystream from a truncated keyed permutation.

Counter inputs 0, 1, 2, ... are passed through a bijection of n-bit values and
the top n-m bits of each output are emitted, either bit-packed (MSB-first
within each byte) or padded to byte boundaries.  Two permutation backends are
provided: a tabulated uniformly random permutation for small n, and a keyed
Feistel network as a large-n throughput stand-in (bijective by construction,
but NOT a uniform permutation -- demo only).
"""

from __future__ import annotations

import hashlib
import io
import json
import statistics
import struct
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import stam_upper_simplified


def truncate(y: int, n: int, m: int) -> int:
    """Keep the n-m most significant bits of an n-bit value."""
    if not 0 <= y < (1 << n):
        raise ValueError(f"value {y} out of range for {n} bits")
    return y >> m


class ExplicitPermutation:
    """A uniformly random permutation of [0, 2**n), tabulated.

    Generated by an unbiased shuffle from the seeded RNG; n <= 20 keeps the
    table small.
    """

    kind = "explicit"

    def __init__(self, n: int, seed: int):
        if not 1 <= n <= 20:
            raise ValueError("explicit permutation supports 1 <= n <= 20")
        self.n = n
        self.seed = seed
        self.table = np.random.default_rng(seed).permutation(1 << n).astype(np.int64)

    def __call__(self, x: int) -> int:
        return int(self.table[x])


class FeistelPermutation:
    """Fixed-round balanced Feistel network over n bits with a keyed BLAKE2b
    round function.

    Bijective by construction (and invertible), but not a uniformly random
    permutation: use it for throughput demos, never for distribution claims.
    A real 128-bit block cipher can be dropped in behind the same interface.
    """

    kind = "feistel_demo"
    rounds = 8

    def __init__(self, n: int, key: bytes):
        if n % 2 != 0:
            raise ValueError("Feistel needs an even bit width")
        if not 2 <= n <= 128:
            raise ValueError("supported widths are even n in [2, 128]")
        self.n = n
        self.key = key
        self._half = n // 2
        self._mask = (1 << self._half) - 1

    def _round(self, r: int, value: int) -> int:
        msg = struct.pack("<I", r) + value.to_bytes(8, "little")
        digest = hashlib.blake2b(msg, key=self.key, digest_size=8).digest()
        return int.from_bytes(digest, "little") & self._mask

    def __call__(self, x: int) -> int:
        if not 0 <= x < (1 << self.n):
            raise ValueError(f"value {x} out of range for {self.n} bits")
        left, right = x >> self._half, x & self._mask
        for r in range(self.rounds):
            left, right = right, left ^ self._round(r, right)
        return (left << self._half) | right

    def inverse(self, y: int) -> int:
        left, right = y >> self._half, y & self._mask
        for r in reversed(range(self.rounds)):
            left, right = right ^ self._round(r, left), left
        return (left << self._half) | right


def explicit_permutation(n: int, seed: int) -> ExplicitPermutation:
    return ExplicitPermutation(n, seed)


def demo_permutation(n: int, key: bytes) -> FeistelPermutation:
    return FeistelPermutation(n, key)


@dataclass(frozen=True)
class StreamConfig:
    n: int
    m: int
    count: int
    start_counter: int = 0
    packing: str = "bit"  # "bit" (MSB-first packed) or "byte" (zero-padded)

    def __post_init__(self) -> None:
        if not 0 <= self.m < self.n:
            raise ValueError("need 0 <= m < n")
        if self.count < 0 or self.start_counter < 0:
            raise ValueError("count and start_counter must be non-negative")
        if self.start_counter + self.count > (1 << self.n):
            raise ValueError("counter range exceeds 2**n: inputs must stay distinct")
        if self.packing not in ("bit", "byte"):
            raise ValueError("packing must be 'bit' or 'byte'")

    @property
    def symbol_bits(self) -> int:
        return self.n - self.m


def generate_stream(perm, cfg: StreamConfig, sink) -> int:
    """Emit truncate(perm(counter)) for each counter value into `sink`.

    Bit-packed mode concatenates the (n-m)-bit symbols MSB-first into bytes
    (final byte zero-padded on the right); byte-aligned mode zero-pads each
    symbol to whole bytes, big-endian.  Returns the number of bytes written.
    """
    if getattr(perm, "n", cfg.n) != cfg.n:
        raise ValueError("permutation width does not match the stream config")
    width = cfg.symbol_bits
    written = 0
    buf = bytearray()
    if cfg.packing == "byte":
        sym_bytes = (width + 7) // 8
        for ctr in range(cfg.start_counter, cfg.start_counter + cfg.count):
            buf += truncate(perm(ctr), cfg.n, cfg.m).to_bytes(sym_bytes, "big")
            if len(buf) >= 1 << 16:
                sink.write(bytes(buf))
                written += len(buf)
                buf.clear()
    else:
        acc = 0
        nbits = 0
        for ctr in range(cfg.start_counter, cfg.start_counter + cfg.count):
            acc = (acc << width) | truncate(perm(ctr), cfg.n, cfg.m)
            nbits += width
            while nbits >= 8:
                nbits -= 8
                buf.append((acc >> nbits) & 0xFF)
            acc &= (1 << nbits) - 1
            if len(buf) >= 1 << 16:
                sink.write(bytes(buf))
                written += len(buf)
                buf.clear()
        if nbits:
            buf.append((acc << (8 - nbits)) & 0xFF)
    if buf:
        sink.write(bytes(buf))
        written += len(buf)
    return written


def unpack_symbols(data: bytes, cfg: StreamConfig) -> list[int]:
    """Recover the symbol sequence from a generated stream (round-trip of the
    packing contract)."""
    width = cfg.symbol_bits
    out = []
    if cfg.packing == "byte":
        sym_bytes = (width + 7) // 8
        for i in range(cfg.count):
            out.append(int.from_bytes(data[i * sym_bytes : (i + 1) * sym_bytes], "big"))
        return out
    big = int.from_bytes(data, "big")
    total_bits = len(data) * 8
    for i in range(cfg.count):
        shift = total_bits - (i + 1) * width
        out.append((big >> shift) & ((1 << width) - 1))
    return out


@dataclass(frozen=True)
class BalanceResult:
    passed: bool
    histogram: np.ndarray  # occurrences of each (n-m)-bit prefix


def balance_check(perm, n: int, m: int) -> BalanceResult:
    """Sweep every n-bit input; a bijection must hit each (n-m)-bit prefix
    exactly 2**m times."""
    if n > 24:
        raise ValueError("full sweep limited to n <= 24")
    if isinstance(perm, ExplicitPermutation):
        prefixes = perm.table >> m
    else:
        prefixes = np.fromiter(
            (perm(x) >> m for x in range(1 << n)), dtype=np.int64, count=1 << n
        )
    hist = np.bincount(prefixes, minlength=1 << (n - m))
    return BalanceResult(bool(np.all(hist == (1 << m))), hist)


def security_margin(n: int, m: int, q: int) -> Fraction | float:
    """Advertised ceiling on the distinguishing advantage for a stream of q
    symbols: the simplified beyond-birthday bound q / 2**((n+m)/2)."""
    bound = stam_upper_simplified(n, m, q)
    if not bound.valid:
        raise ValueError("bound requires q <= (3/4) * 2**n")
    return bound.value


def stream_length_bytes(n: int, m: int, q: int) -> int:
    """Bit-packed length of a q-symbol stream, in bytes (rounded up)."""
    return (q * (n - m) + 7) // 8


@dataclass(frozen=True)
class BenchResult:
    bytes_written: int
    seconds: float  # median over repetitions
    bytes_per_second: float
    seconds_per_symbol: float


def throughput_bench(perm, cfg: StreamConfig, repetitions: int = 5) -> BenchResult:
    """Time `generate_stream` into a discard sink; median over repetitions."""
    times = []
    written = 0
    for _ in range(repetitions):
        sink = io.BytesIO()
        t0 = time.perf_counter()
        written = generate_stream(perm, cfg, sink)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times)
    return BenchResult(
        bytes_written=written,
        seconds=med,
        bytes_per_second=written / med if med > 0 else float("inf"),
        seconds_per_symbol=med / cfg.count if cfg.count else 0.0,
    )


def stream_metadata(perm, cfg: StreamConfig, seed=None) -> dict:
    """JSON-serializable sidecar describing a generated stream."""
    return {
        "n": cfg.n,
        "m": cfg.m,
        "start_counter": cfg.start_counter,
        "count": cfg.count,
        "packing": cfg.packing,
        "permutation_kind": getattr(perm, "kind", "external"),
        "seed": seed,
        "disclaimer": (
            "indistinguishability margins assume the permutation is "
            "uniformly random; the Feistel demo backend is not"
        ),
    }


def write_metadata(path, perm, cfg: StreamConfig, seed=None) -> None:
    with open(path, "w") as fh:
        json.dump(stream_metadata(perm, cfg, seed), fh, indent=2)
        fh.write("\n")
