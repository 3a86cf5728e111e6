import io
import json
import math

import numpy as np
import pytest

from truncperm.core import Params, count_profile
from truncperm.exact import exact_advantage
from truncperm.stream import (
    ExplicitPermutation,
    FeistelPermutation,
    StreamConfig,
    balance_check,
    demo_permutation,
    explicit_permutation,
    generate_stream,
    security_margin,
    stream_length_bytes,
    stream_metadata,
    throughput_bench,
    truncate,
    unpack_symbols,
    write_metadata,
)
from fractions import Fraction


class TestTruncate:
    def test_examples(self):
        assert truncate(0b1011, 4, 2) == 0b10
        assert truncate(0b1011, 4, 0) == 0b1011
        assert truncate(255, 8, 7) == 1

    def test_range_check(self):
        with pytest.raises(ValueError):
            truncate(16, 4, 2)
        with pytest.raises(ValueError):
            truncate(-1, 4, 2)


class TestExplicitPermutation:
    def test_is_bijection(self):
        perm = explicit_permutation(8, seed=1)
        assert sorted(perm(x) for x in range(256)) == list(range(256))

    def test_deterministic_in_seed(self):
        a = explicit_permutation(6, seed=5)
        b = explicit_permutation(6, seed=5)
        assert np.array_equal(a.table, b.table)
        assert not np.array_equal(a.table, explicit_permutation(6, seed=6).table)

    def test_width_limit(self):
        with pytest.raises(ValueError):
            ExplicitPermutation(21, seed=0)


class TestFeistelPermutation:
    def test_bijective_and_invertible(self):
        perm = demo_permutation(16, b"test key")
        seen = set()
        for x in range(0, 1 << 16, 257):  # sparse sample plus inverses
            y = perm(x)
            assert perm.inverse(y) == x
            seen.add(y)
        # full bijectivity at a small width
        small = demo_permutation(8, b"k")
        assert sorted(small(x) for x in range(256)) == list(range(256))

    def test_key_matters(self):
        a = demo_permutation(16, b"a")
        b = demo_permutation(16, b"b")
        assert any(a(x) != b(x) for x in range(64))

    def test_width_validation(self):
        with pytest.raises(ValueError):
            FeistelPermutation(7, b"k")
        with pytest.raises(ValueError):
            FeistelPermutation(130, b"k")

    def test_input_range(self):
        with pytest.raises(ValueError):
            demo_permutation(8, b"k")(256)


class TestStreamConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            StreamConfig(4, 4, 1)
        with pytest.raises(ValueError):
            StreamConfig(4, 1, 20)  # counters run past 2**4
        with pytest.raises(ValueError):
            StreamConfig(4, 1, 4, packing="nibble")

    def test_symbol_bits(self):
        assert StreamConfig(12, 4, 1).symbol_bits == 8


class TestGenerateStream:
    def test_full_sweep_emits_each_symbol_capacity_times(self):
        # n=3, m=1: 8 counters, each 2-bit prefix appears exactly twice
        perm = explicit_permutation(3, seed=2)
        cfg = StreamConfig(3, 1, 8)
        sink = io.BytesIO()
        written = generate_stream(perm, cfg, sink)
        assert written == 2  # 8 symbols * 2 bits = 16 bits
        symbols = unpack_symbols(sink.getvalue(), cfg)
        assert sorted(symbols) == [0, 0, 1, 1, 2, 2, 3, 3]

    def test_bit_packed_length(self):
        perm = explicit_permutation(8, seed=0)
        cfg = StreamConfig(8, 4, 256)
        sink = io.BytesIO()
        assert generate_stream(perm, cfg, sink) == 128  # 256 * 4 bits
        assert stream_length_bytes(8, 4, 256) == 128

    def test_bit_packing_round_trip(self):
        perm = explicit_permutation(10, seed=7)
        for m in (0, 3, 7):
            cfg = StreamConfig(10, m, 100, start_counter=17)
            sink = io.BytesIO()
            generate_stream(perm, cfg, sink)
            expected = [truncate(perm(c), 10, m) for c in range(17, 117)]
            assert unpack_symbols(sink.getvalue(), cfg) == expected

    def test_byte_packing_round_trip(self):
        perm = explicit_permutation(12, seed=7)
        cfg = StreamConfig(12, 2, 50, packing="byte")
        sink = io.BytesIO()
        written = generate_stream(perm, cfg, sink)
        assert written == 50 * 2  # 10-bit symbols padded to 2 bytes
        expected = [truncate(perm(c), 12, 2) for c in range(50)]
        assert unpack_symbols(sink.getvalue(), cfg) == expected

    def test_final_byte_zero_padded(self):
        perm = explicit_permutation(4, seed=1)
        cfg = StreamConfig(4, 1, 3)  # 9 bits -> 2 bytes, 7 bits of padding
        sink = io.BytesIO()
        assert generate_stream(perm, cfg, sink) == 2
        assert sink.getvalue()[-1] & 0x7F == 0

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError):
            generate_stream(explicit_permutation(8, 0), StreamConfig(10, 2, 4), io.BytesIO())

    def test_prefix_distribution_matches_exact_advantage(self):
        # many independent permutations, a short stream prefix each: the
        # optimal distinguisher's empirical advantage tracks the exact value
        p = Params(6, 3, 8)
        exact = float(exact_advantage(p).value)
        trials = 4000
        hits_perm = 0
        from truncperm.game import accepts_profile, optimal_rule

        rule = optimal_rule()
        for seed in range(trials):
            perm = explicit_permutation(6, seed=seed)
            symbols = [truncate(perm(c), 6, 3) for c in range(8)]
            if accepts_profile(rule, count_profile(symbols, p), p):
                hits_perm += 1
        # uniform-arm acceptance probability, exactly
        from truncperm.exact import enumerate_profiles
        from truncperm.core import likelihood_ratio

        accept_fun = sum(
            float(pw.probability)
            for pw in enumerate_profiles(p)
            if likelihood_ratio(pw.profile, p) > 1
        )
        gap = hits_perm / trials - accept_fun
        se = math.sqrt(0.25 / trials)
        assert abs(gap - exact) < 4 * (se + 1e-9)


class TestBalanceCheck:
    def test_explicit_passes(self):
        perm = explicit_permutation(12, seed=3)
        res = balance_check(perm, 12, 4)
        assert res.passed
        assert np.all(res.histogram == 16)

    def test_feistel_passes(self):
        res = balance_check(demo_permutation(10, b"key"), 10, 2)
        assert res.passed

    def test_corrupted_table_fails(self):
        perm = explicit_permutation(12, seed=3)
        idx = int(np.argmax(perm.table >> 4 != perm.table[0] >> 4))
        perm.table[idx] = perm.table[0]  # duplicate entry: no longer a bijection
        assert not balance_check(perm, 12, 4).passed

    def test_sweep_limit(self):
        with pytest.raises(ValueError):
            balance_check(demo_permutation(26, b"k"), 26, 2)


class TestMarginsAndLengths:
    def test_advertised_margin(self):
        assert security_margin(128, 64, 2**64) == Fraction(1, 2**32)

    def test_margin_validity(self):
        with pytest.raises(ValueError):
            security_margin(4, 1, 13)

    def test_headline_stream_length(self):
        assert stream_length_bytes(128, 64, 2**64) == 2**67


class TestBenchAndMetadata:
    def test_throughput_positive(self):
        perm = explicit_permutation(10, seed=0)
        res = throughput_bench(perm, StreamConfig(10, 2, 1024), repetitions=3)
        assert res.bytes_written == 1024
        assert res.bytes_per_second > 0
        assert res.seconds_per_symbol >= 0

    def test_metadata_sidecar(self, tmp_path):
        perm = explicit_permutation(8, seed=5)
        cfg = StreamConfig(8, 4, 16)
        meta = stream_metadata(perm, cfg, seed=5)
        assert meta["permutation_kind"] == "explicit"
        assert "disclaimer" in meta
        path = tmp_path / "s.json"
        write_metadata(path, perm, cfg, seed=5)
        assert json.loads(path.read_text()) == meta
