"""Moments of the collision-excess statistic and the tail machinery built on
them.

The statistic is the number of colliding reply pairs minus its uniform-oracle
mean; its first four moments have closed forms in the single-pair collision
probability p = 1/#buckets.  The closed forms are implemented exactly as
printed (products of binomials and polynomials in p, no algebraic
simplification) so the brute-force oracle catches transcription slips.

All closed forms work for an arbitrary bucket count, not just powers of two.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .core import Params


class PreconditionError(ValueError):
    """Raised when a check is asked for outside its stated parameter range."""


@dataclass(frozen=True)
class MomentSet:
    """First four raw moments of the collision-excess statistic (the first is
    centered, so it doubles as the first central moment)."""

    m1: Fraction
    m2: Fraction
    m3: Fraction
    m4: Fraction
    p: Fraction  # single-pair collision probability, 1/#buckets


@dataclass(frozen=True)
class EmpiricalMoments:
    m1: float
    m2: float
    m3: float
    m4: float
    se1: float
    se2: float
    se3: float
    se4: float
    trials: int


def pair_collision_moments(q: int, buckets: int) -> MomentSet:
    """Closed-form moments for q symbols over `buckets` equiprobable values."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if buckets < 2:
        raise ValueError("need at least 2 buckets")
    p = Fraction(1, buckets)
    m2 = comb(q, 2) * p * (1 - p)
    m3 = 6 * comb(q, 3) * p**2 * (1 - p) + comb(q, 2) * p * (1 - p) * (1 - 2 * p)
    m4 = (
        18 * comb(q, 4) * p**2 * (1 - p) * (1 + 3 * p)
        + 54 * comb(q, 3) * p**2 * (1 - p) * (1 - Fraction(5, 3) * p)
        + comb(q, 2) * p * (1 - p) * (1 - 3 * p + 3 * p**2)
    )
    return MomentSet(Fraction(0), m2, m3, m4, p)


def _excess(parts_counter: Counter, q: int, buckets: int) -> Fraction:
    pairs = sum(comb(d, 2) for d in parts_counter.values())
    return pairs - Fraction(comb(q, 2), buckets)


def pair_collision_moments_brute(
    q: int, buckets: int, transcript_ceiling: int = 10**7
) -> MomentSet:
    """Exhaustive oracle: averages powers of the statistic over every
    transcript."""
    total = buckets**q
    if total > transcript_ceiling:
        raise ValueError(f"{total} transcripts exceed ceiling {transcript_ceiling}")
    sums = [Fraction(0)] * 4
    for t in itertools.product(range(buckets), repeat=q):
        x = _excess(Counter(t), q, buckets)
        acc = Fraction(1)
        for k in range(4):
            acc *= x
            sums[k] += acc
    return MomentSet(*(s / total for s in sums), p=Fraction(1, buckets))


def moments_closed_form(params: Params) -> MomentSet:
    return pair_collision_moments(params.q, params.num_replies)


def moments_brute(params: Params, transcript_ceiling: int = 10**7) -> MomentSet:
    return pair_collision_moments_brute(params.q, params.num_replies, transcript_ceiling)


def _sample_excess(
    params: Params, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Collision-excess values of `trials` uniform transcripts, via their
    multinomial bucket counts."""
    b = params.num_replies
    q = params.q
    counts = rng.multinomial(q, [1.0 / b] * b, size=trials).astype(np.float64)
    pairs = (counts * (counts - 1.0) / 2.0).sum(axis=1)
    return pairs - comb(q, 2) / b


def _jackknife_se(x: np.ndarray) -> float:
    """Leave-one-out jackknife standard error of the sample mean."""
    t = x.size
    mean = x.mean()
    # reduces to the classical sd/sqrt(t) for a plain mean; kept in jackknife
    # form so the estimator stays correct if the statistic changes
    loo = (x.sum() - x) / (t - 1)
    return math.sqrt((t - 1) / t * np.sum((loo - loo.mean()) ** 2))


def moments_empirical(
    params: Params, trials: int, rng: np.random.Generator
) -> EmpiricalMoments:
    """Sample moments of the collision excess with jackknife standard errors."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    x = _sample_excess(params, trials, rng)
    powers = [x, x**2, x**3, x**4]
    means = [float(p.mean()) for p in powers]
    ses = [_jackknife_se(p) for p in powers]
    return EmpiricalMoments(*means, *ses, trials=trials)


# ---------------------------------------------------------------------------
# Fourth-moment bound, witness polynomial, tail probability


def _in_tail_regime(q: int, buckets: int) -> bool:
    # q > sqrt(buckets) * 2**8, compared exactly via squares
    return q * q > buckets * (1 << 16)


@dataclass(frozen=True)
class FourthMomentCheck:
    holds: bool
    bound: Fraction
    fourth_moment: Fraction
    margin: Fraction


def fourth_moment_bound_check(params: Params) -> FourthMomentCheck:
    """Closed-form check that the fourth moment stays below
    q**2 (q-1)**2 / 2**(2(n-m)), in the regime q > 2**((n-m)/2 + 8)."""
    b = params.num_replies
    q = params.q
    if not _in_tail_regime(q, b):
        raise PreconditionError(
            f"not applicable: requires q > 2**((n-m)/2 + 8), got q={q} with "
            f"2**(n-m)={b}"
        )
    bound = Fraction(q * q * (q - 1) ** 2, b * b)
    m4 = pair_collision_moments(q, b).m4
    return FourthMomentCheck(m4 < bound, bound, m4, bound - m4)


def tail_witness_poly(x):
    """The quartic -(x + 5/2)**2 (x - 1/10)(x - 5), evaluated in expanded
    form; positive only strictly inside (1/10, 5), bounded above by 200."""
    return (
        -(x**4)
        + Fraction(1, 10) * x**3
        + Fraction(75, 4) * x**2
        + Fraction(235, 8) * x
        - Fraction(25, 8)
    )


def markov_lower(mean_y, upper_bound):
    """Lower bound Pr(Y > 0) >= E[Y] / M for Y bounded above by M > 0."""
    if upper_bound <= 0:
        raise ValueError("upper bound must be positive")
    if mean_y > upper_bound:
        raise ValueError("mean cannot exceed the upper bound")
    return mean_y / upper_bound


def collision_tail_threshold(q: int, buckets: int) -> float:
    """The tail cutoff sqrt(q(q-1)) / (10 * sqrt(buckets))."""
    if q < 2:
        raise ValueError("q must be >= 2 (no pairs otherwise)")
    return math.sqrt(q * (q - 1)) / (10.0 * math.sqrt(buckets))


@dataclass(frozen=True)
class TailCheck:
    estimate: float
    std_err: float
    threshold: float
    trials: int
    passes: bool  # estimate exceeds 1/400 by more than 4 standard errors


def tail_probability_check(
    params: Params, trials: int, rng: np.random.Generator
) -> TailCheck:
    """Monte Carlo confirmation that the collision excess exceeds its tail
    cutoff with probability > 1/400 (4-standard-error margin)."""
    b = params.num_replies
    q = params.q
    if not _in_tail_regime(q, b):
        raise PreconditionError(
            f"not applicable: requires q > 2**((n-m)/2 + 8), got q={q} with "
            f"2**(n-m)={b}"
        )
    if trials < 10**5:
        raise PreconditionError("trials must be >= 1e5 to resolve 1/400")
    threshold = collision_tail_threshold(q, b)
    x = _sample_excess(params, trials, rng)
    hits = float(np.mean(x > threshold))
    se = math.sqrt(max(hits * (1.0 - hits), 1e-12) / trials)
    return TailCheck(hits, se, threshold, trials, passes=hits - 4.0 * se > 1.0 / 400.0)
