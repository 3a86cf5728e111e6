"""Numerical verification of the inequality toolbox.

Each check evaluates one analytic inequality on a dense parameter grid and
reports the worst slack observed.  These are the machine-checkable stand-ins
for the pencil-and-paper proofs: a failing check means a transcription error
somewhere, not a new theorem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    CountProfile,
    Params,
    collision_excess_of_profile,
    likelihood_ratio,
    log_all_distinct_table,
)
from .exact import _partitions, enumerate_profiles, profile_score
from .moments import (
    fourth_moment_bound_check,
    pair_collision_moments,
    tail_probability_check,
    tail_witness_poly,
)

# tolerance for float comparisons of quantities that can meet with equality
# (e.g. both sides 0 at k = 1)
_EPS = 1e-9

DEFAULT_ALPHAS = tuple(2**j for j in range(1, 21)) + (3, 5, 7, 100, 1000, 999983)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    cases: int
    worst_slack: float
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _result(name, slacks, cases, detail="") -> CheckResult:
    worst = float(min(slacks)) if slacks else float("inf")
    return CheckResult(name, worst >= -_EPS, cases, worst, detail)


def check_distinct_prob_upper(k_max: int = 1024, alphas=DEFAULT_ALPHAS) -> CheckResult:
    """ln of the all-distinct probability is at most -k(k-1)/(2 alpha)."""
    slacks = []
    cases = 0
    for alpha in alphas:
        top = min(k_max, alpha)
        table = log_all_distinct_table(top, alpha)
        k = np.arange(1, top + 1, dtype=np.float64)
        rhs = -k * (k - 1.0) / (2.0 * alpha)
        slacks.append(np.min(rhs - table[1:]))
        cases += top
    return _result("distinct_prob_upper", slacks, cases)


def check_log1m_lower(step: float = 1e-3) -> CheckResult:
    """ln(1-x) >= -x - x**2 on [0, 1/2]."""
    x = np.arange(0.0, 0.5 + step / 2, step)
    slack = np.log1p(-x) - (-x - x**2)
    return _result("log1m_lower", [np.min(slack)], x.size)


def check_distinct_prob_lower(k_max: int = 1024, alphas=DEFAULT_ALPHAS) -> CheckResult:
    """For k <= alpha/2: ln all-distinct >= -k(k-1)/(2 alpha) - k**3/(3 alpha**2)."""
    slacks = []
    cases = 0
    for alpha in alphas:
        top = min(k_max, alpha // 2)
        if top < 1:
            continue
        table = log_all_distinct_table(top, alpha)
        k = np.arange(1, top + 1, dtype=np.float64)
        rhs = -k * (k - 1.0) / (2.0 * alpha) - k**3 / (3.0 * alpha**2)
        slacks.append(np.min(table[1:] - rhs))
        cases += top
    return _result("distinct_prob_lower", slacks, cases)


def check_doubling(k_max: int = 1024, alphas=DEFAULT_ALPHAS) -> CheckResult:
    """Doubling inequality: the score ln W + pairs/alpha at (2k, 2 alpha) is
    at least twice the score at (k, alpha) minus (k/alpha)**2 / 2."""
    slacks = []
    cases = 0
    for alpha in alphas:
        top = min(k_max, alpha // 2)
        if top < 1:
            continue
        small = log_all_distinct_table(top, alpha)
        big = log_all_distinct_table(2 * top, 2 * alpha)
        k = np.arange(1, top + 1, dtype=np.float64)
        lhs = big[2 : 2 * top + 1 : 2] + (2 * k) * (2 * k - 1) / 2.0 / (2.0 * alpha)
        rhs = 2.0 * (small[1:] + k * (k - 1) / 2.0 / alpha) - 0.5 * (k / alpha) ** 2
        slacks.append(np.min(lhs - rhs))
        cases += top
    return _result("score_doubling", slacks, cases)


def _balanced_partition(q: int, buckets: int) -> tuple[int, ...]:
    lo, extra = divmod(q, buckets)
    parts = [lo + 1] * extra + [lo] * (buckets - extra)
    return tuple(d for d in parts if d > 0)


def check_profile_score_maximizer(pairs=((2, 1), (3, 2), (3, 1), (4, 2)),
                                  q_max: int = 8) -> CheckResult:
    """Exhaustive search over feasible profiles: the score is maximized by the
    most-balanced profile, and the maximum is 0 when q < #buckets."""
    slacks = []
    cases = 0
    for n, m in pairs:
        b = 1 << (n - m)
        cap = 1 << m
        for q in range(1, min(q_max, b * cap) + 1):
            params = Params(n, m, q)
            balanced = CountProfile(_balanced_partition(q, b))
            best = profile_score(balanced, params)
            for parts in _partitions(q, min(q, cap), b):
                cases += 1
                slacks.append(best - profile_score(CountProfile(parts), params))
            if q < b:
                slacks.append(-abs(best))  # maximum must be exactly 0
    return _result("profile_score_maximizer", slacks, cases)


def check_likelihood_exponential_bound(n_max: int = 4,
                                       half_domain_only: bool = False) -> CheckResult:
    """For power-of-two q: the likelihood ratio never exceeds
    exp(q**2 / 2**(n+m+1) - excess / 2**m).

    The ratio and the collision excess are both functions of the count
    profile, so checking every profile covers every transcript.

    This inequality is FALSE as stated once q reaches the full domain size:
    at n = 4, q = 16 the perfectly balanced profile violates it for every m
    (worst case m = 1, ratio 3443.98 vs bound 1808.04).  The doubling step
    it rests on needs q <= 2**(n-1).  Pass ``half_domain_only=True`` to
    restrict to that provable regime, where the check passes.
    """
    slacks = []
    cases = 0
    for n in range(1, n_max + 1):
        for m in range(n):
            for q in (2, 4, 8, 16):
                if q > (1 << n):
                    continue
                if half_domain_only and q > (1 << (n - 1)):
                    continue
                params = Params(n, m, q)
                cap = params.bucket_capacity
                for pw in enumerate_profiles(params):
                    cases += 1
                    r = likelihood_ratio(pw.profile, params)
                    x = collision_excess_of_profile(pw.profile, params)
                    bound = math.exp(
                        q * q / 2 ** (n + m + 1) - float(x) / cap
                    )
                    slacks.append(bound - float(r))
    name = "likelihood_exponential_bound"
    if half_domain_only:
        name += "_half_domain"
    return _result(name, slacks, cases)


def check_witness_poly() -> CheckResult:
    """The witness quartic stays below 200 on a dense grid and at its interior
    critical point, and vanishes at its printed roots."""
    xs = np.arange(-10.0, 10.0, 1e-3)
    vals = -(xs**4) + xs**3 / 10 + 75 * xs**2 / 4 + 235 * xs / 8 - 25.0 / 8
    slacks = [200.0 - float(np.max(vals))]
    crit = (103.0 + math.sqrt(29409.0)) / 80.0
    slacks.append(200.0 - float(tail_witness_poly(crit)))
    for root in (Fraction(1, 10), Fraction(5), Fraction(-5, 2)):
        slacks.append(-abs(float(tail_witness_poly(root))))
    return _result("witness_poly", slacks, xs.size + 4)


def check_witness_poly_expectation(cells=((10, 9, 512), (12, 10, 2048))) -> CheckResult:
    """E of the witness quartic applied to the normalized collision excess
    exceeds 1/2, evaluated from the closed-form moments."""
    slacks = []
    for n, m, q in cells:
        b = 1 << (n - m)
        mom = pair_collision_moments(q, b)
        s2 = b / (q * (q - 1.0))  # square of the normalization scale
        s = math.sqrt(s2)
        expectation = (
            -(s2**2) * float(mom.m4)
            + (s2 * s) * float(mom.m3) / 10.0
            + 75.0 / 4.0 * s2 * float(mom.m2)
            + 235.0 / 8.0 * s * float(mom.m1)
            - 25.0 / 8.0
        )
        slacks.append(expectation - 0.5)
    return _result("witness_poly_expectation", slacks, len(cells))


def check_fourth_moment(cells=((10, 9, 1024), (13, 11, 2048))) -> CheckResult:
    """Closed-form fourth-moment bound in the large-q regime."""
    slacks = []
    for n, m, q in cells:
        res = fourth_moment_bound_check(Params(n, m, q))
        slacks.append(float(res.margin))
    return _result("fourth_moment_bound", slacks, len(cells))


def check_tail_probability(rng, trials: int = 10**5,
                           cells=((10, 9, 512),)) -> CheckResult:
    """Monte Carlo tail bound: Pr(excess > cutoff) > 1/400 with 4-SE margin."""
    slacks = []
    for n, m, q in cells:
        res = tail_probability_check(Params(n, m, q), trials, rng)
        slacks.append(res.estimate - 4.0 * res.std_err - 1.0 / 400.0)
    return _result("collision_tail_probability", slacks, len(cells))


def run_lemma_suite(rng, trials: int = 10**5) -> list[CheckResult]:
    """Every inequality check on its default grid, in a fixed order."""
    return [
        check_distinct_prob_upper(),
        check_log1m_lower(),
        check_distinct_prob_lower(),
        check_doubling(),
        check_profile_score_maximizer(),
        check_likelihood_exponential_bound(),
        check_likelihood_exponential_bound(half_domain_only=True),
        check_witness_poly(),
        check_witness_poly_expectation(),
        check_fourth_moment(),
        check_tail_probability(rng, trials=trials),
    ]
