"""Acceptance gate: one test per shipping criterion, each printing a single
PASS/FAIL line (visible even under pytest's output capture).

Criterion 8 is expected to fail: the full-domain exponential likelihood bound
is numerically false at q = 2**n for n >= 4 (see the README); the suite
reports it honestly rather than weakening the check.
"""

import csv
import io
from fractions import Fraction

import pytest

from truncperm.bounds import (
    best_known_upper,
    birthday_upper,
    stam_upper,
    stam_upper_simplified,
)
from truncperm.checks import run_lemma_suite
from truncperm.cli import TIMING_COLUMNS, main as cli_main
from truncperm.core import Params, make_rng
from truncperm.exact import (
    VIA_R_GREATER,
    VIA_R_LESS,
    brute_force_advantage,
    exact_advantage,
)
from truncperm.game import optimal_rule, play_game_sharded
from truncperm.moments import (
    moments_empirical,
    pair_collision_moments,
    pair_collision_moments_brute,
)
from truncperm.stream import balance_check, explicit_permutation, stream_length_bytes


BRUTE_CEILING = 10**6


def grid_cells():
    """Every (n <= 4, m < n, q <= 2**n) cell whose transcript space fits the
    brute-force ceiling."""
    for n in range(1, 5):
        for m in range(n):
            b = 1 << (n - m)
            for q in range(1, (1 << n) + 1):
                if b**q > BRUTE_CEILING:
                    break
                yield n, m, q


@pytest.fixture(scope="module")
def exact_grid():
    return {
        (n, m, q): exact_advantage(Params(n, m, q)).value for n, m, q in grid_cells()
    }


@pytest.fixture
def report(capsys):
    def _report(criterion: int, passed: bool, detail: str = "") -> None:
        verdict = "PASS" if passed else "FAIL"
        with capsys.disabled():
            print(f"criterion {criterion:2d}: {verdict}  {detail}", flush=True)

    return _report


def test_criterion_01_oracle_equivalence(exact_grid, report):
    mismatches = [
        cell
        for cell, adv in exact_grid.items()
        if adv != brute_force_advantage(Params(*cell)).value
    ]
    report(1, not mismatches,
           f"profile enumeration == brute force on {len(exact_grid)} cells")
    assert not mismatches


def test_criterion_02_dual_identity(exact_grid, report):
    mismatches = [
        cell
        for cell in exact_grid
        if exact_advantage(Params(*cell), VIA_R_GREATER).value
        != exact_advantage(Params(*cell), VIA_R_LESS).value
    ]
    report(2, not mismatches,
           f"E max(R-1,0) == E max(1-R,0) on {len(exact_grid)} cells")
    assert not mismatches


def test_criterion_03_birthday_reduction(report):
    bad = []
    cells = 0
    for n in range(1, 9):
        dom = 1 << n
        prod = Fraction(1)
        for q in range(1, dom + 1):
            if q > 1:
                prod *= Fraction(dom - (q - 1), dom)
            cells += 1
            if exact_advantage(Params(n, 0, q)).value != 1 - prod:
                bad.append((n, q))
    report(3, not bad, f"m=0 advantage is the exact collision probability, "
                       f"{cells} cells, n <= 8")
    assert not bad


def test_criterion_04_spot_values(report):
    expected = {2: Fraction(1, 6), 3: Fraction(1, 4), 4: Fraction(5, 8)}
    got = {q: exact_advantage(Params(2, 1, q)).value for q in expected}
    ok = got == expected
    report(4, ok, "Adv_{2,1}(2,3,4) = 1/6, 1/4, 5/8")
    assert got == expected


def test_criterion_05_bound_dominance(exact_grid, report):
    violations = []
    for (n, m, q), adv in exact_grid.items():
        uppers = [birthday_upper(n, q), best_known_upper(n, m, q)]
        if q - 1 < (1 << n):
            uppers.append(stam_upper(n, m, q))
        if any(adv > u for u in uppers):
            violations.append((n, m, q))
    report(5, not violations,
           f"Adv <= birthday, Stam, combined on {len(exact_grid)} cells")
    assert not violations


def test_criterion_06_conclusions_reproduction(report):
    margin = stam_upper_simplified(128, 64, 2**64)
    length = stream_length_bytes(128, 64, 2**64)
    ok = (
        margin.value == Fraction(1, 2**32)
        and isinstance(margin.value, Fraction)
        and margin.valid
        and length == 2**67
    )
    report(6, ok, "margin 2**-32 exactly; 2**64 symbols of 64 bits = 2**67 bytes")
    assert ok


def test_criterion_07_moments(report):
    closed_ok = all(
        pair_collision_moments(q, b) == pair_collision_moments_brute(q, b)
        for b in (2, 3, 4)
        for q in range(1, 7)
    )
    p = Params(10, 9, 512)  # two buckets
    closed = pair_collision_moments(512, 2)
    emp = moments_empirical(p, 10**5, make_rng(2024))
    mc_ok = all(
        abs(e - float(c)) <= 4 * se
        for e, c, se in (
            (emp.m1, closed.m1, emp.se1),
            (emp.m2, closed.m2, emp.se2),
            (emp.m3, closed.m3, emp.se3),
            (emp.m4, closed.m4, emp.se4),
        )
    )
    report(7, closed_ok and mc_ok,
           "closed == brute for B in {2,3,4}, q <= 6; MC within 4 SE at q=512")
    assert closed_ok and mc_ok


def test_criterion_08_lemma_suite(report):
    results = run_lemma_suite(make_rng(8), trials=10**5)
    failures = [r.name for r in results if not r.passed]
    ok = not failures
    detail = "all inequality checks hold" if ok else (
        "known failure: " + ", ".join(failures)
        + " (false at q = 2**n, n = 4; holds for q <= 2**(n-1))"
    )
    report(8, ok, detail)
    assert ok, f"failing checks: {failures}"


def test_criterion_09_game_convergence(report):
    p = Params(8, 4, 32)
    exact = float(exact_advantage(p).value)
    res = play_game_sharded(p, optimal_rule(), 10**5, seed=9, workers=2)
    ok = abs(res.empirical_advantage - exact) <= 4 * res.standard_error
    report(9, ok,
           f"empirical {res.empirical_advantage:.5f} vs exact {exact:.5f} "
           f"(4 SE = {4 * res.standard_error:.5f})")
    assert ok


def test_criterion_10_tightness_sweep(exact_grid, report):
    from truncperm.bounds import advantage_envelope

    ratios = {}
    for (n, m, q), adv in exact_grid.items():
        if not 2 <= q <= 3 * (1 << n) // 4:
            continue
        ratios[(n, m, q)] = float(adv / Fraction(advantage_envelope(n, m, q)))
    in_range = all(0.001 <= r <= 1.1 for r in ratios.values())
    monotone = True
    for (n, m, q), adv in exact_grid.items():
        prev = exact_grid.get((n, m, q - 1))
        if prev is not None and adv < prev:
            monotone = False
    lo, hi = min(ratios.values()), max(ratios.values())
    report(10, in_range and monotone,
           f"{len(ratios)} cells, Adv/envelope in [{lo:.4f}, {hi:.4f}] "
           f"within [0.001, 1.1]; Adv non-decreasing in q")
    assert in_range and monotone


def test_criterion_11_stream_balance(report):
    perm = explicit_permutation(12, seed=11)
    good = balance_check(perm, 12, 4)
    balanced = good.passed and bool((good.histogram == 16).all())
    # negative control: clobber one table entry so the map is not a bijection
    idx = int((perm.table >> 4 != perm.table[0] >> 4).argmax())
    perm.table[idx] = perm.table[0]
    control_fails = not balance_check(perm, 12, 4).passed
    ok = balanced and control_fails
    report(11, ok, "every 8-bit prefix exactly 16 times; corrupted table caught")
    assert ok


def test_criterion_12_cli_determinism(report, capsys):
    def run(workers):
        argv = ["mc", "--n", "8", "--m", "4", "--q", "32", "--trials", "20000",
                "--seed", "12", "--workers", str(workers)]
        code = cli_main(argv)
        out = capsys.readouterr().out
        return code, list(csv.DictReader(io.StringIO(out)))

    def strip(rows, extra=()):
        drop = set(TIMING_COLUMNS) | set(extra)
        return [{k: v for k, v in r.items() if k not in drop} for r in rows]

    c1, first = run(1)
    c2, again = run(1)
    c3, four = run(4)
    # worker count is echoed as provenance, so exclude that column when
    # comparing the 1-worker and 4-worker runs
    ok = (
        c1 == c2 == c3 == 0
        and strip(first) == strip(again)
        and strip(first, ("workers",)) == strip(four, ("workers",))
    )
    report(12, ok, "identical CSV modulo timing for reruns and workers 1 vs 4")
    assert ok
