"""Exact distinguishing advantage by enumeration, plus a Monte Carlo estimator.

Two independent routes are provided: `exact_advantage` sums over count
profiles (partitions of q with multinomial weights) and `brute_force_advantage`
iterates every one of the 2**((n-m)q) transcripts explicitly.  In exact
arithmetic the two agree bit for bit, which is the main self-check of the
whole artifact.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterator

import numpy as np

from .core import (
    CountProfile,
    Params,
    all_distinct_prob,
    likelihood_ratio,
    log_all_distinct_table,
)

VIA_R_GREATER = "via_R_greater"
VIA_R_LESS = "via_R_less"

DEFAULT_PROFILE_CEILING = 10**6
DEFAULT_TRANSCRIPT_CEILING = 10**7


class EnumerationLimitError(ValueError):
    """Raised when an exact enumeration would exceed its feasibility ceiling."""


@dataclass(frozen=True)
class ProfileWeight:
    """A count profile together with its exact weight under the uniform oracle."""

    profile: CountProfile
    transcript_count: int
    probability: Fraction


@dataclass(frozen=True)
class AdvantageResult:
    value: Fraction
    identity: str
    profiles_enumerated: int


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_err: float | None
    trials: int


def _partitions(total: int, max_part: int, max_parts: int) -> Iterator[tuple[int, ...]]:
    """Partitions of `total` into at most `max_parts` parts, each <= max_part,
    in descending-part lexicographic order ({4}, {3,1}, {2,2}, ...)."""
    if total == 0:
        yield ()
        return
    if max_parts <= 0 or max_part <= 0:
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - first, first, max_parts - 1):
            yield (first, *rest)


@lru_cache(maxsize=None)
def count_partitions(total: int, max_part: int, max_parts: int) -> int:
    if total == 0:
        return 1
    if max_parts <= 0 or max_part <= 0:
        return 0
    return sum(
        count_partitions(total - first, first, max_parts - 1)
        for first in range(min(total, max_part), 0, -1)
    )


def transcript_count(parts: tuple[int, ...], params: Params) -> int:
    """Number of transcripts with this count profile: choices of which reply
    values carry the counts, times orderings of the query indices."""
    b = params.num_replies
    k = len(parts)
    mult = Counter(parts)
    placements = factorial(b) // factorial(b - k)
    for c in mult.values():
        placements //= factorial(c)
    orderings = factorial(params.q)
    for d in parts:
        orderings //= factorial(d)
    return placements * orderings


def enumerate_profiles(
    params: Params, max_part: int | None = None
) -> Iterator[ProfileWeight]:
    """Every count profile of a q-query transcript with exact weight.

    Profiles whose largest count exceeds the bucket capacity are included by
    default (they carry probability mass and likelihood ratio 0); pass
    `max_part` to restrict.  Transcript counts sum to num_replies**q over the
    unrestricted enumeration.
    """
    if max_part is None:
        max_part = params.q
    denom = params.num_replies**params.q
    for parts in _partitions(params.q, max_part, params.num_replies):
        count = transcript_count(parts, params)
        yield ProfileWeight(CountProfile(parts), count, Fraction(count, denom))


def exact_advantage(
    params: Params,
    identity: str = VIA_R_GREATER,
    profile_ceiling: int = DEFAULT_PROFILE_CEILING,
) -> AdvantageResult:
    """Distinguishing advantage, exactly, by summation over count profiles.

    `identity` selects which of the two equivalent expectations is summed:
    E max{R-1, 0} (VIA_R_GREATER) or E max{1-R, 0} (VIA_R_LESS); the results
    are equal.  The greater-side sum only needs profiles within capacity
    (everything else has ratio 0), which keeps e.g. the m=0 birthday case
    feasible for large q.
    """
    if identity not in (VIA_R_GREATER, VIA_R_LESS):
        raise ValueError(f"unknown identity {identity!r}")
    cap = params.bucket_capacity
    max_part = min(params.q, cap) if identity == VIA_R_GREATER else params.q
    estimated = count_partitions(params.q, max_part, params.num_replies)
    if estimated > profile_ceiling:
        raise EnumerationLimitError(
            f"{estimated} profiles exceed ceiling {profile_ceiling}; "
            "use mc_advantage for an estimate"
        )
    total = Fraction(0)
    seen = 0
    for pw in enumerate_profiles(params, max_part=max_part):
        seen += 1
        ratio = likelihood_ratio(pw.profile, params)
        if identity == VIA_R_GREATER:
            if ratio > 1:
                total += pw.probability * (ratio - 1)
        else:
            if ratio < 1:
                total += pw.probability * (1 - ratio)
    return AdvantageResult(total, identity, seen)


def brute_force_advantage(
    params: Params, transcript_ceiling: int = DEFAULT_TRANSCRIPT_CEILING
) -> AdvantageResult:
    """Distinguishing advantage by explicit iteration over all transcripts.

    Independent of the partition-based route: the histogram of every single
    transcript is taken directly.  Exact-rational result.
    """
    b = params.num_replies
    q = params.q
    total_transcripts = b**q
    if total_transcripts > transcript_ceiling:
        raise EnumerationLimitError(
            f"{total_transcripts} transcripts exceed ceiling {transcript_ceiling}"
        )
    tallies: dict[tuple[int, ...], int] = {}
    for t in itertools.product(range(b), repeat=q):
        key = tuple(sorted(Counter(t).values(), reverse=True))
        tallies[key] = tallies.get(key, 0) + 1
    total = Fraction(0)
    for parts, count in tallies.items():
        ratio = likelihood_ratio(CountProfile(parts), params)
        if ratio > 1:
            total += Fraction(count, total_transcripts) * (ratio - 1)
    return AdvantageResult(total, VIA_R_GREATER, len(tallies))


def profile_score(profile: CountProfile, params: Params) -> float:
    """Sum over occupied buckets of ln(all-distinct prob of the count) plus
    pairs/capacity; the exchange quantity maximized by balanced profiles."""
    cap = params.bucket_capacity
    if not profile.fits_capacity(params):
        raise ValueError("profile has a count above the bucket capacity 2**m")
    terms = []
    for d in profile.parts:
        terms.append(float(all_distinct_prob(d, cap, mode="log")) + comb(d, 2) / cap)
    return math.fsum(terms)


def mc_advantage(
    params: Params,
    trials: int,
    rng: np.random.Generator,
    identity: str = VIA_R_LESS,
) -> MonteCarloEstimate:
    """Unbiased Monte Carlo estimate of the advantage from uniform transcripts.

    Averages max{1-R, 0} (or max{R-1, 0}) over sampled transcripts; the
    likelihood ratio is evaluated in log space via table lookup on the bucket
    counts.  Reports the sample mean with its standard error (absent for a
    single trial).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if identity not in (VIA_R_GREATER, VIA_R_LESS):
        raise ValueError(f"unknown identity {identity!r}")
    b = params.num_replies
    q = params.q
    table = log_all_distinct_table(q, params.bucket_capacity)
    log_denom = all_distinct_prob(q, params.domain_size, mode="log")

    if trials * b <= 5 * 10**7:
        counts = rng.multinomial(q, [1.0 / b] * b, size=trials)
        log_num = table[counts].sum(axis=1)
    else:
        # large reply alphabets: histogram one sampled transcript at a time
        log_num = np.empty(trials)
        for i in range(trials):
            draws = rng.integers(0, b, size=q)
            occ = np.bincount(draws)
            occ = occ[occ > 0]
            log_num[i] = table[occ].sum()
    with np.errstate(invalid="ignore"):
        ratio = np.exp(log_num - log_denom)
    ratio = np.nan_to_num(ratio, nan=0.0)
    if identity == VIA_R_LESS:
        values = np.maximum(1.0 - ratio, 0.0)
    else:
        values = np.maximum(ratio - 1.0, 0.0)
    mean = float(values.mean())
    std_err = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None
    return MonteCarloEstimate(mean, std_err, trials)


def mc_advantage_sharded(
    params: Params,
    trials: int,
    seed: int | None,
    workers: int = 1,
    identity: str = VIA_R_LESS,
) -> MonteCarloEstimate:
    """Sharded `mc_advantage`: deterministic in (seed, trials), for any worker
    count, by fixing the shard layout and merging in shard order."""
    from .core import parallel_map, spawn_rngs, split_trials, SHARD_COUNT

    sizes = split_trials(trials)
    rngs = spawn_rngs(seed, SHARD_COUNT)
    shots = parallel_map(
        lambda t, rng: mc_advantage(params, t, rng, identity=identity),
        [(t, rng) for t, rng in zip(sizes, rngs)],
        workers=workers,
    )
    # merge sums, not means, so the float result is order-fixed
    s = math.fsum(e.mean * e.trials for e in shots)
    ss = math.fsum(
        ((e.std_err or 0.0) ** 2 * e.trials * (e.trials - 1)) + e.mean**2 * e.trials
        for e in shots
    )
    mean = s / trials
    if trials > 1:
        var = max(ss - trials * mean**2, 0.0) / (trials - 1)
        std_err = math.sqrt(var / trials)
    else:
        std_err = None
    return MonteCarloEstimate(mean, std_err, trials)
