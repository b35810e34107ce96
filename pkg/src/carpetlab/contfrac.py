"""Continued fractions via an interval Gauss map over exact rationals.

The Gauss map is numerically unstable in floating point, so partial
quotients are extracted from an exact rational interval [alpha-eps,
alpha+eps].  A float input is treated as a dyadic rational known to half an
ulp; an exact Fraction may be supplied with eps=0 for exact expansions.  A
quotient is only emitted when every number in the interval shares it; once
the interval straddles a quotient boundary the precision is exhausted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

VERDICT_YES = "yes"
VERDICT_NO = "no"
VERDICT_UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    a0: int
    partial_quotients: tuple[int, ...]
    depth: int
    exhausted: bool  # True if alpha was rational (or ambiguous) to working precision


def _to_interval(alpha: Union[float, Fraction], eps) -> tuple[Fraction, Fraction]:
    if isinstance(alpha, Fraction):
        x = alpha
        e = Fraction(eps) if eps is not None else Fraction(0)
    else:
        x = Fraction(alpha)
        e = Fraction(eps) if eps is not None else Fraction(math.ulp(float(alpha))) / 2
    if e < 0:
        raise ValueError("eps must be >= 0")
    return x - e, x + e


def continued_fraction(alpha: Union[float, Fraction], depth: int,
                       eps=None) -> ContinuedFractionExpansion:
    """Partial quotients [a0; a1, a2, ...] certain at the given precision."""
    if depth < 1:
        raise ValueError(f"need depth >= 1, got {depth}")
    lo, hi = _to_interval(alpha, eps)

    a0_lo, a0_hi = math.floor(lo), math.floor(hi)
    if a0_lo != a0_hi:
        return ContinuedFractionExpansion(math.floor((lo + hi) / 2), (), 0, True)
    a0 = a0_lo
    lo -= a0
    hi -= a0

    quotients: list[int] = []
    exhausted = False
    for _ in range(depth):
        if hi == 0:
            # exactly rational: expansion terminates here
            exhausted = True
            break
        if lo <= 0:
            # interval touches 0 from above: the next quotient is unbounded
            exhausted = True
            break
        inv_lo = 1 / hi
        inv_hi = 1 / lo
        a_lo, a_hi = math.floor(inv_lo), math.floor(inv_hi)
        if a_lo != a_hi:
            exhausted = True
            break
        quotients.append(a_lo)
        lo, hi = inv_lo - a_lo, inv_hi - a_lo
    return ContinuedFractionExpansion(a0, tuple(quotients), len(quotients), exhausted)


def high_type_test(alpha: Union[float, Fraction], N: int, depth: int,
                   eps=None) -> tuple[ContinuedFractionExpansion, str]:
    """Test whether all partial quotients a_1..a_depth are >= N.

    Returns (expansion, verdict).  "no" as soon as some certain a_n < N, or
    when every value in the precision interval forces a_n < N, or when the
    expansion terminates (alpha rational to working precision).  "yes"
    means yes-to-depth: all quotients down to the requested depth are
    certain and >= N.  "undetermined" means precision ran out first.
    """
    if depth < 1:
        raise ValueError(f"need depth >= 1, got {depth}")
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    lo, hi = _to_interval(alpha, eps)

    a0_lo, a0_hi = math.floor(lo), math.floor(hi)
    if a0_lo != a0_hi:
        return (ContinuedFractionExpansion(math.floor((lo + hi) / 2), (), 0, True),
                VERDICT_UNDETERMINED)
    a0 = a0_lo
    lo -= a0
    hi -= a0

    quotients: list[int] = []
    for _ in range(depth):
        if hi == 0:
            # rational to working precision: terminating expansion cannot be
            # of high type
            return (ContinuedFractionExpansion(a0, tuple(quotients),
                                               len(quotients), True), VERDICT_NO)
        if lo <= 0:
            return (ContinuedFractionExpansion(a0, tuple(quotients),
                                               len(quotients), True),
                    VERDICT_UNDETERMINED)
        inv_lo = 1 / hi
        inv_hi = 1 / lo
        a_lo, a_hi = math.floor(inv_lo), math.floor(inv_hi)
        if a_lo != a_hi:
            if a_hi < N:
                # every possible quotient violates the bound
                return (ContinuedFractionExpansion(a0, tuple(quotients),
                                                   len(quotients), True), VERDICT_NO)
            return (ContinuedFractionExpansion(a0, tuple(quotients),
                                               len(quotients), True),
                    VERDICT_UNDETERMINED)
        a = a_lo
        quotients.append(a)
        if a < N:
            return (ContinuedFractionExpansion(a0, tuple(quotients),
                                               len(quotients), False), VERDICT_NO)
        lo, hi = inv_lo - a, inv_hi - a
    return (ContinuedFractionExpansion(a0, tuple(quotients), len(quotients), False),
            VERDICT_YES)
