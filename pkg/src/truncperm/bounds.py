"""Closed-form bounds on the truncated-permutation distinguishing advantage.

Each published bound is evaluated as a pure function of (n, m, q), faithful to
its source formula: values may exceed 1 (capping happens only in
`best_known_upper`), and bounds whose asymptotic constant is unpublished take
the constant as an explicit parameter and carry a reference-only flag.

Fractional powers of two are computed in floats; everything else is exact
where the formula is rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

Scalar = Fraction | float


def _pow2_half(exponent: int) -> Scalar:
    """2**(exponent/2); an exact integer-or-Fraction when exponent is even."""
    if exponent % 2 == 0:
        half = exponent // 2
        return Fraction(1 << half) if half >= 0 else Fraction(1, 1 << -half)
    return 2.0 ** (exponent / 2)


@dataclass(frozen=True)
class FlaggedBound:
    value: Scalar
    valid: bool


@dataclass(frozen=True)
class BranchedBound:
    value: float
    branch: int
    valid: bool


def birthday_exact(n: int, q: int) -> Fraction:
    """Advantage of the full (untruncated) random permutation: one minus the
    probability that q uniform n-bit values are pairwise distinct."""
    if q < 1:
        raise ValueError("q must be >= 1")
    dom = 1 << n
    if q > dom:
        return Fraction(1)
    prod = Fraction(1)
    for i in range(1, q):
        prod *= Fraction(dom - i, dom)
    return 1 - prod


def birthday_upper(n: int, q: int) -> Fraction:
    """Collision-test upper bound min{q(q-1)/2**(n+1), 1}; valid for any m."""
    return min(Fraction(q * (q - 1), 1 << (n + 1)), Fraction(1))


def hall_lower_reference(n: int, m: int, q: int) -> FlaggedBound:
    """Reference value q**2 / 2**(n+m) for the 1998 lower bound.

    The published constant is an unspecified Omega(1); this evaluates with
    constant 1 and is reference-only.  Valid flag requires q <= 2**((n+m)/2).
    """
    value = Fraction(q * q, 1 << (n + m))
    return FlaggedBound(value, valid=q * q <= (1 << (n + m)))


def hall_upper(n: int, m: int, q: int) -> float:
    """The 1998 upper bound 5 x**(2/3) + x**3 / (2 * 2**((n-7m)/2)) with
    x = q / 2**((n+m)/2).  Deteriorates (exceeds 1) well inside the valid
    query range once m is large."""
    x = q / float(_pow2_half(n + m))
    return 5.0 * x ** (2.0 / 3.0) + 0.5 * x**3 / 2.0 ** ((n - 7 * m) / 2)


def bellare_impagliazzo_upper(n: int, m: int, q: int, c: float = 1.0) -> FlaggedBound:
    """The 1999 bound c * n * q / 2**((n+m)/2).

    The published constant is an unspecified O(n) factor; c defaults to 1 and
    the result is reference-only.  Valid flag requires
    2**(n-m) < q < 2**((n+m)/2).
    """
    if c <= 0:
        raise ValueError("c must be positive")
    value = c * n * q / float(_pow2_half(n + m))
    valid = (1 << (n - m)) < q and q * q < (1 << (n + m))
    return FlaggedBound(value, valid)


def gilboa_gueron_upper(n: int, m: int, q: int) -> BranchedBound:
    """The 2015 two-branch upper bound in x = q / 2**((n+m)/2).

    Branch 1 applies for m <= n/3, branch 2 for larger m; the valid flag is
    false once m > n - log2(16n), where neither branch is established.
    """
    x = q / float(_pow2_half(n + m))
    if 3 * m <= n:
        value = (
            2.0 * 2.0 ** (1.0 / 3.0) * x ** (2.0 / 3.0)
            + 2.0 * math.sqrt(2.0) / math.sqrt(3.0) * x**1.5
            + x**2
        )
        return BranchedBound(value, branch=1, valid=True)
    value = (
        3.0 * x ** (2.0 / 3.0)
        + 2.0 * x
        + 5.0 * x**2
        + 0.5 * (2.0 * x) ** (n / (n - m))
    )
    valid = m <= n - math.log2(16 * n)
    return BranchedBound(value, branch=2, valid=valid)


def stam_upper(n: int, m: int, q: int) -> float:
    """Stam's 1978 bound:
    (1/2) sqrt((2**(n-m) - 1) q (q-1) / ((2**n - 1)(2**n - (q-1))))."""
    dom = 1 << n
    if q - 1 >= dom:
        raise ValueError("undefined for q - 1 >= 2**n")
    if q < 1:
        raise ValueError("q must be >= 1")
    ratio = Fraction(((1 << (n - m)) - 1) * q * (q - 1), (dom - 1) * (dom - (q - 1)))
    return 0.5 * math.sqrt(ratio)


def stam_upper_simplified(n: int, m: int, q: int) -> FlaggedBound:
    """The amenable form q / 2**((m+n)/2), valid for q <= (3/4) 2**n.

    Exact (a Fraction) when n + m is even, e.g. exactly 2**-32 at
    (n, m, q) = (128, 64, 2**64).
    """
    half = _pow2_half(n + m)
    value = Fraction(q, half) if isinstance(half, Fraction) else q / half
    return FlaggedBound(value, valid=4 * q <= 3 * (1 << n))


def best_known_upper(n: int, m: int, q: int) -> Scalar:
    """min of the collision-test bound, Stam's bound (where defined), and 1."""
    candidates: list[Scalar] = [birthday_upper(n, q), Fraction(1)]
    if q - 1 < (1 << n):
        candidates.append(stam_upper(n, m, q))
    return min(candidates)


def advantage_envelope(n: int, m: int, q: int) -> Scalar:
    """The tight order of magnitude min{q**2/2**n, q/2**((n+m)/2), 1}."""
    half = _pow2_half(n + m)
    middle = Fraction(q, half) if isinstance(half, Fraction) else q / half
    return min(Fraction(q * q, 1 << n), middle, Fraction(1))


@dataclass(frozen=True)
class BoundReport:
    n: int
    m: int
    q: int
    birthday_exact: Fraction | None  # m = 0 only
    birthday_upper: Fraction
    hall_lower_ref: FlaggedBound
    hall_upper: float
    bi_upper: FlaggedBound
    gg_upper: BranchedBound
    stam_full: float | None  # None where undefined (q - 1 >= 2**n)
    stam_simplified: FlaggedBound
    combined_upper: Scalar
    theta_envelope: Scalar


def bound_report(n: int, m: int, q: int, bi_constant: float = 1.0) -> BoundReport:
    """All closed-form bounds for one parameter triple."""
    if not 0 <= m < n:
        raise ValueError("need 0 <= m < n")
    if q < 1:
        raise ValueError("q must be >= 1")
    stam = stam_upper(n, m, q) if q - 1 < (1 << n) else None
    return BoundReport(
        n=n,
        m=m,
        q=q,
        birthday_exact=birthday_exact(n, q) if m == 0 else None,
        birthday_upper=birthday_upper(n, q),
        hall_lower_ref=hall_lower_reference(n, m, q),
        hall_upper=hall_upper(n, m, q),
        bi_upper=bellare_impagliazzo_upper(n, m, q, c=bi_constant),
        gg_upper=gilboa_gueron_upper(n, m, q),
        stam_full=stam,
        stam_simplified=stam_upper_simplified(n, m, q),
        combined_upper=best_known_upper(n, m, q),
        theta_envelope=advantage_envelope(n, m, q),
    )
