"""Foundations of the truncated-permutation distinguishing experiment.

A transcript is the length-q sequence of (n-m)-bit replies an adversary
collects from the oracle; its count profile (the bucket histogram, sorted
descending) carries everything the optimal distinguisher needs.

Two arithmetic modes are supported throughout: ``exact`` works with
`fractions.Fraction` and never rounds, ``log`` works with extended-range
floats in log space (compensated summation via `math.fsum`) so that long
products of near-one factors neither underflow nor lose precision.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

EXACT = "exact"
LOG = "log"

#: log-space representation of an exactly-zero probability
LOG_ZERO = float("-inf")


@dataclass(frozen=True)
class Params:
    """Experiment parameters.

    n: bit width of the permutation domain.
    m: number of truncated (dropped) low bits, 0 <= m < n.
    q: number of distinct queries, 1 <= q <= 2**n.
    """

    n: int
    m: int
    q: int

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.m < self.n:
            raise ValueError(f"need 0 <= m < n, got m={self.m}, n={self.n}")
        if not 1 <= self.q <= (1 << self.n):
            raise ValueError(
                f"need 1 <= q <= 2**n (queries are distinct n-bit strings), got q={self.q}"
            )

    @property
    def domain_size(self) -> int:
        """Number of n-bit inputs/outputs, 2**n."""
        return 1 << self.n

    @property
    def num_replies(self) -> int:
        """Number of possible (n-m)-bit replies, 2**(n-m)."""
        return 1 << (self.n - self.m)

    @property
    def bucket_capacity(self) -> int:
        """How many n-bit values share one reply prefix, 2**m."""
        return 1 << self.m


#: A transcript is any length-q integer sequence with entries in [0, num_replies).
Transcript = Sequence[int]


@dataclass(frozen=True)
class CountProfile:
    """Histogram of a transcript over reply values: positive parts, descending."""

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(d <= 0 for d in self.parts):
            raise ValueError("profile parts must be positive (zeros are omitted)")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError("profile parts must be sorted descending")

    @property
    def k(self) -> int:
        """Number of reply values that occur at least once."""
        return len(self.parts)

    @property
    def total(self) -> int:
        return sum(self.parts)

    def fits_capacity(self, params: Params) -> bool:
        """True iff every count is <= 2**m, i.e. the profile is reachable by a
        truncated permutation."""
        return all(d <= params.bucket_capacity for d in self.parts)


def all_distinct_prob(k: int, alpha: int, mode: str = EXACT) -> Fraction | float:
    """Probability that k uniform draws from alpha values are pairwise distinct:
    the product of (1 - j/alpha) for j = 0 .. k-1.

    Exactly 0 for k > alpha.  ``mode=LOG`` returns the log of the product
    (LOG_ZERO for the zero case).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if mode == EXACT:
        if k > alpha:
            return Fraction(0)
        out = Fraction(1)
        for j in range(k):
            out *= Fraction(alpha - j, alpha)
        return out
    if mode == LOG:
        if k > alpha:
            return LOG_ZERO
        return math.fsum(math.log1p(-j / alpha) for j in range(k))
    raise ValueError(f"unknown mode {mode!r}")


def log_all_distinct_table(k_max: int, alpha: int) -> np.ndarray:
    """Vector of log all_distinct_prob(k, alpha) for k = 0 .. k_max.

    Entries with k > alpha are LOG_ZERO.  Useful for table-lookup evaluation
    of likelihood ratios over many count vectors at once.
    """
    table = np.full(k_max + 1, LOG_ZERO)
    top = min(k_max, alpha)
    steps = np.log1p(-np.arange(top, dtype=np.float64) / alpha)
    table[0] = 0.0
    table[1 : top + 1] = np.cumsum(steps)
    return table


def check_transcript(transcript: Transcript, params: Params) -> np.ndarray:
    """Validate a transcript against params; returns it as an int64 array."""
    arr = np.asarray(transcript, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] != params.q:
        raise ValueError(f"transcript must have length q={params.q}")
    if arr.size and (arr.min() < 0 or arr.max() >= params.num_replies):
        raise ValueError("transcript entries must lie in [0, 2**(n-m))")
    return arr


def count_profile(transcript: Transcript, params: Params) -> CountProfile:
    """Histogram of the transcript, sorted descending, zero counts dropped."""
    arr = check_transcript(transcript, params)
    counts = np.bincount(arr, minlength=1)
    parts = tuple(sorted((int(c) for c in counts if c), reverse=True))
    return CountProfile(parts)


def collision_excess_of_profile(profile: CountProfile, params: Params) -> Fraction:
    """Number of colliding reply pairs minus its uniform-oracle mean,
    computed from the count profile."""
    pairs = sum(comb(d, 2) for d in profile.parts)
    return pairs - Fraction(comb(params.q, 2), params.num_replies)


def collision_excess(transcript: Transcript, params: Params) -> Fraction:
    """Number of equal unordered reply pairs minus C(q,2)/2**(n-m)."""
    return collision_excess_of_profile(count_profile(transcript, params), params)


def likelihood_ratio(
    profile: CountProfile, params: Params, mode: str = EXACT
) -> Fraction | float:
    """Probability of observing a transcript with this profile under the
    truncated-permutation oracle, divided by its probability under the uniform
    oracle.

    Exactly 0 whenever some count exceeds the bucket capacity 2**m.  In log
    mode the i-th numerator factor is paired with the i-th denominator factor
    before summation, so neither side under- or overflows on its own.
    """
    if profile.total != params.q:
        raise ValueError(f"profile sums to {profile.total}, expected q={params.q}")
    if mode == EXACT:
        if not profile.fits_capacity(params):
            return Fraction(0)
        num = Fraction(1)
        for d in profile.parts:
            num *= all_distinct_prob(d, params.bucket_capacity)
        return num / all_distinct_prob(params.q, params.domain_size)
    if mode == LOG:
        return log_likelihood_ratio(profile, params)
    raise ValueError(f"unknown mode {mode!r}")


def log_likelihood_ratio(profile: CountProfile, params: Params) -> float:
    """Log of `likelihood_ratio`; LOG_ZERO when the ratio is exactly 0."""
    if profile.total != params.q:
        raise ValueError(f"profile sums to {profile.total}, expected q={params.q}")
    cap = params.bucket_capacity
    dom = params.domain_size
    if not profile.fits_capacity(params):
        return LOG_ZERO
    terms = []
    i = 0  # denominator factor index; exactly q factors on each side
    for d in profile.parts:
        for j in range(d):
            terms.append(math.log1p(-j / cap) - math.log1p(-i / dom))
            i += 1
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# Randomness plumbing


def make_rng(seed: int | None = None) -> np.random.Generator:
    return np.random.default_rng(seed)


def spawn_rngs(seed: int | None, count: int) -> list[np.random.Generator]:
    """Independent, reproducible RNG streams: stream i is a deterministic
    function of (seed, count, i)."""
    seq = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in seq.spawn(count)]


#: Fixed shard count for parallel Monte Carlo.  Results depend on (seed,
#: SHARD_COUNT) only, never on how many workers execute the shards.
SHARD_COUNT = 32

_T = TypeVar("_T")


def split_trials(total: int, shards: int = SHARD_COUNT) -> list[int]:
    """Split a trial budget into at most `shards` positive chunks,
    deterministically."""
    if total < 0:
        raise ValueError("total must be non-negative")
    base, extra = divmod(total, shards)
    sizes = [base + (1 if i < extra else 0) for i in range(shards)]
    return [s for s in sizes if s > 0]


def parallel_map(
    fn: Callable[..., _T], args_list: Iterable[tuple], workers: int = 1
) -> list[_T]:
    """Apply fn over argument tuples, preserving input order.

    The merge order is fixed by the input order, so results are identical for
    any worker count.
    """
    args_list = list(args_list)
    if workers <= 1:
        return [fn(*args) for args in args_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for args in args_list]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Transcript samplers for the two hypotheses


def sample_function_transcript(params: Params, rng: np.random.Generator) -> np.ndarray:
    """Replies of a uniformly random function: q iid uniform symbols."""
    return rng.integers(0, params.num_replies, size=params.q, dtype=np.int64)


def sample_permutation_transcript(
    params: Params, rng: np.random.Generator
) -> np.ndarray:
    """Replies of a fresh truncated random permutation on distinct queries.

    Draws q distinct n-bit values uniformly without replacement (rejection
    against a seen-set; taking iid draws in order of first occurrence is
    exactly a without-replacement sequence) and keeps the top n-m bits of
    each.  No 2**n-entry table is ever materialized.
    """
    dom = params.domain_size
    q = params.q
    seen: set[int] = set()
    out = np.empty(q, dtype=np.int64)
    filled = 0
    while filled < q:
        missing = q - filled
        # inflate the batch by the current hit rate so one pass usually suffices
        hit = 1.0 - len(seen) / dom
        size = max(8, int(missing / max(hit, 1.0 / dom) * 1.2) + 4)
        for x in rng.integers(0, dom, size=size):
            x = int(x)
            if x not in seen:
                seen.add(x)
                out[filled] = x >> params.m
                filled += 1
                if filled == q:
                    break
    return out


def sample_function_count_matrix(
    params: Params, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Bucket-count vectors of `trials` independent uniform-function
    transcripts (the multinomial pushforward of iid sampling)."""
    b = params.num_replies
    return rng.multinomial(params.q, [1.0 / b] * b, size=trials)


def sample_permutation_count_matrix(
    params: Params, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Bucket-count vectors of `trials` fresh truncated-permutation
    transcripts.  Bucketing a uniform without-replacement sample of q values
    out of 2**n, with 2**m values per bucket, is exactly a multivariate
    hypergeometric draw."""
    colors = [params.bucket_capacity] * params.num_replies
    return rng.multivariate_hypergeometric(colors, params.q, size=trials)
