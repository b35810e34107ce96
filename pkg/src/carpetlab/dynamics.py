"""McMullen-family dynamics and the escape-trichotomy classifier.

The family f(z) = z^n + lam/z^n (n >= 3, lam != 0) has 2n free critical
points c with c^(2n) = lam and two free critical values +-2*sqrt(lam).  The
fate of one free critical orbit decides the Julia set: escape without ever
entering the trap door gives a Cantor set, escape through the trap door at
step 1 gives a Cantor set of circles, and escape through the trap door at a
later step gives a Sierpinski carpet.  This module provides the map
evaluations, orbit iteration, and the classifier with its stability check.

All iteration here and in carpetlab._kernels uses the same explicit
real-arithmetic formulas (no complex pow, no library complex division), so
scalar, numpy, and compiled paths produce bit-identical orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

TAG_CANTOR = "Cantor"
TAG_CANTOR_CIRCLES = "CantorCircles"
TAG_CARPET = "Carpet"
TAG_NON_ESCAPING = "NonEscaping"
TAG_UNDETERMINED = "Undetermined"

# Classification codes shared with the grid kernels.
CODE_NON_ESCAPING = -1
CODE_UNDETERMINED = -2

DEFAULT_N_MAX = 1000


class InvalidParameterError(ValueError):
    """Raised for parameters outside a map family's domain."""


class PoleError(ArithmeticError):
    """Raised when a McMullen map is evaluated exactly at its pole z = 0."""


@dataclass(frozen=True)
class McMullen:
    """f(z) = z^n + lam / z^n with n >= 3 and lam != 0."""

    n: int
    lam: complex

    def __post_init__(self):
        if self.n < 3:
            raise InvalidParameterError(f"McMullen family needs n >= 3, got {self.n}")
        if self.lam == 0:
            raise InvalidParameterError("McMullen family needs lam != 0")


@dataclass(frozen=True)
class Quadratic:
    """f(z) = z^2 + c."""

    c: complex


@dataclass(frozen=True)
class SiegelQuadratic:
    """f(z) = e^(2*pi*i*alpha) z + z^2, alpha stored reduced mod 1."""

    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", self.alpha % 1.0)


MapFamily = Union[McMullen, Quadratic, SiegelQuadratic]


# ---------------------------------------------------------------------------
# Map evaluation (real-arithmetic steps, mirrored exactly in _kernels)
# ---------------------------------------------------------------------------

def _mcmullen_step(n: int, lre: float, lim: float, zre: float, zim: float):
    """One step z -> z^n + lam/z^n; returns None when z^n is exactly 0.

    z^n by repeated multiplication and lam/w as lam*conj(w)/|w|^2, matching
    the kernel implementations operation for operation.
    """
    wre, wim = zre, zim
    for _ in range(n - 1):
        wre, wim = wre * zre - wim * zim, wre * zim + wim * zre
    m2 = wre * wre + wim * wim
    if m2 == 0.0:
        return None
    return (wre + (lre * wre + lim * wim) / m2,
            wim + (lim * wre - lre * wim) / m2)


def _quadratic_step(cre: float, cim: float, zre: float, zim: float):
    return zre * zre - zim * zim + cre, 2.0 * zre * zim + cim


def _siegel_step(rre: float, rim: float, zre: float, zim: float):
    return (rre * zre - rim * zim + zre * zre - zim * zim,
            rre * zim + rim * zre + 2.0 * zre * zim)


def eval_map(family: MapFamily, z: complex, escape_radius: Optional[float] = None) -> complex:
    """Evaluate one step of the family at z.

    For McMullen maps, z = 0 raises PoleError.  If the value overflows (or
    z^n underflows to exactly 0 for z != 0, where lam/z^n is effectively
    infinite) and escape_radius is given, a saturated real value of modulus
    2*escape_radius is returned so callers can treat the point as escaped;
    without escape_radius an OverflowError propagates.
    """
    if isinstance(family, McMullen):
        if z == 0:
            raise PoleError("McMullen map has a pole at z = 0")
        step = _mcmullen_step(family.n, family.lam.real, family.lam.imag, z.real, z.imag)
        if step is None:
            return _saturate(escape_radius, "z^n underflowed to 0; lam/z^n overflows")
        re, im = step
    elif isinstance(family, Quadratic):
        re, im = _quadratic_step(family.c.real, family.c.imag, z.real, z.imag)
    elif isinstance(family, SiegelQuadratic):
        t = 2.0 * math.pi * family.alpha
        re, im = _siegel_step(math.cos(t), math.sin(t), z.real, z.imag)
    else:
        raise TypeError(f"unknown map family: {family!r}")
    if not (math.isfinite(re) and math.isfinite(im)):
        return _saturate(escape_radius, "map value overflowed")
    return complex(re, im)


def _saturate(escape_radius: Optional[float], reason: str) -> complex:
    if escape_radius is None:
        raise OverflowError(reason)
    return complex(2.0 * escape_radius, 0.0)


# ---------------------------------------------------------------------------
# Critical data and radii
# ---------------------------------------------------------------------------

def critical_points(n: int, lam: complex) -> list[complex]:
    """All 2n free critical points, the roots of c^(2n) = lam.

    Ordered by increasing argument in [0, 2*pi).
    """
    _check_mcmullen(n, lam)
    r = abs(lam) ** (1.0 / (2 * n))
    theta = math.atan2(lam.imag, lam.real)
    if theta < 0.0:
        theta += 2.0 * math.pi
    return [
        complex(r * math.cos((theta + 2.0 * math.pi * k) / (2 * n)),
                r * math.sin((theta + 2.0 * math.pi * k) / (2 * n)))
        for k in range(2 * n)
    ]


def critical_values(lam: complex) -> tuple[complex, complex]:
    """The two free critical values (+2*sqrt(lam), -2*sqrt(lam)).

    The first component uses the principal square root.
    """
    if lam == 0:
        raise InvalidParameterError("critical values need lam != 0")
    import cmath

    v = 2.0 * cmath.sqrt(lam)
    return v, -v


def escape_radius(n: int, lam: complex) -> float:
    """R with the doubling property: |z| > R implies |f(z)| > 2|z|.

    R = max(4^(1/(n-1)), (2|lam|)^(1/(2n))).  |z| > R gives |z|^n > 4|z|
    and |lam|/|z|^n < |z|^n / 2, so |f(z)| > |z|^n / 2 > 2|z|; escape is
    therefore irreversible once the modulus passes R.
    """
    _check_mcmullen(n, lam)
    return max(4.0 ** (1.0 / (n - 1)), (2.0 * abs(lam)) ** (1.0 / (2 * n)))


def trap_radius(n: int, lam: complex) -> float:
    """Critical-circle radius |lam|^(1/(2n)), the trap-door membership proxy."""
    _check_mcmullen(n, lam)
    return abs(lam) ** (1.0 / (2 * n))


def _check_mcmullen(n: int, lam: complex) -> None:
    if n < 3:
        raise InvalidParameterError(f"need n >= 3, got {n}")
    if lam == 0:
        raise InvalidParameterError("need lam != 0")


def family_escape_radius(family: MapFamily) -> float:
    """Doubling escape radius for any supported family."""
    if isinstance(family, McMullen):
        return escape_radius(family.n, family.lam)
    if isinstance(family, Quadratic):
        # |z| > 1 + sqrt(1 + |c|) gives |z^2+c| >= |z|^2 - |c| > 2|z|.
        return 1.0 + math.sqrt(1.0 + abs(family.c))
    if isinstance(family, SiegelQuadratic):
        # |z^2 + bz| >= |z|(|z| - 1) > 2|z| for |z| > 3 (|b| = 1).
        return 3.0
    raise TypeError(f"unknown map family: {family!r}")


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitRecord:
    """Trace of one orbit run.

    escape_index: first j with |z_j| > R (None if no escape in n_max steps).
    min_central_index: largest j >= 1 with |z_j| < rho strictly before the
    escape index (None if the orbit never visits the central region).
    """

    escape_index: Optional[int]
    steps_computed: int
    min_central_index: Optional[int]
    final_modulus: float
    moduli: Optional[tuple[float, ...]] = None


def iterate_orbit(family: MapFamily, z0: complex, R: float, rho: float,
                  n_max: int, keep_trace: bool = False) -> OrbitRecord:
    """Iterate z0 until |z| > R or n_max steps, tracking trap-door visits.

    Requires R > rho > 0, n_max >= 1 and |z0| <= R.  An exact pole hit
    (z_j = 0) is recorded as escape at index j+1: the pole maps to infinity.
    """
    if not (R > rho > 0.0):
        raise ValueError(f"need R > rho > 0, got R={R}, rho={rho}")
    if n_max < 1:
        raise ValueError(f"need n_max >= 1, got {n_max}")
    if abs(z0) > R:
        raise ValueError("orbit must start inside the escape radius (|z0| <= R)")

    has_pole = isinstance(family, McMullen)
    if isinstance(family, McMullen):
        step = lambda re, im: _mcmullen_step(family.n, family.lam.real,
                                             family.lam.imag, re, im)
    elif isinstance(family, Quadratic):
        step = lambda re, im: _quadratic_step(family.c.real, family.c.imag, re, im)
    elif isinstance(family, SiegelQuadratic):
        t = 2.0 * math.pi * family.alpha
        rre, rim = math.cos(t), math.sin(t)
        step = lambda re, im: _siegel_step(rre, rim, re, im)
    else:
        raise TypeError(f"unknown map family: {family!r}")

    R2 = R * R
    rho2 = rho * rho
    zre, zim = z0.real, z0.imag
    m2 = zre * zre + zim * zim
    moduli = [math.sqrt(m2)] if keep_trace else None
    escape_index: Optional[int] = None
    last_central = 0
    steps = 0

    for j in range(1, n_max + 1):
        if m2 == 0.0 and has_pole:
            # Pole: z_{j-1} = 0 maps to infinity, escape at index j.
            escape_index = j
            steps = j
            m2 = math.inf
            if moduli is not None:
                moduli.append(math.inf)
            break
        nxt = step(zre, zim)
        steps = j
        if nxt is None:
            # z^n underflowed to zero: lam/z^n is effectively infinite.
            escape_index = j
            m2 = math.inf
            if moduli is not None:
                moduli.append(math.inf)
            break
        zre, zim = nxt
        m2 = zre * zre + zim * zim
        if moduli is not None:
            moduli.append(math.sqrt(m2))
        if not (m2 <= R2):  # catches overflow/NaN as escaped
            escape_index = j
            break
        if m2 < rho2:
            last_central = j

    return OrbitRecord(
        escape_index=escape_index,
        steps_computed=steps,
        min_central_index=last_central if (escape_index is not None and last_central > 0) else None,
        final_modulus=math.sqrt(m2) if m2 != math.inf else math.inf,
        moduli=tuple(moduli) if moduli is not None else None,
    )


# ---------------------------------------------------------------------------
# Escape-trichotomy classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    """Tag agreement across perturbed runs of the classifier.

    Variants scale the trap-door radius by 1/2 and 2 and double n_max.
    The upward radius clamps to the critical-circle radius rho: the trap
    door lies strictly inside the critical circle, so a larger proxy would
    register visits that provably are not trap-door visits (and would
    spuriously destabilize every Cantor parameter with |lam| < 1).  A tag
    that survives all variants is reported stable; otherwise the
    classification degrades to Undetermined.
    """

    stable: bool
    base_tag: str
    variant_tags: tuple[str, str, str]  # (rho/2, rho*2 clamped to rho, n_max*2)


@dataclass(frozen=True)
class Classification:
    tag: str
    k: Optional[int]
    escape_index: Optional[int]
    min_central_index: Optional[int]
    steps_computed: int
    n_max: int
    R: float
    rho: float
    stability: Optional[StabilityReport]


def classify_seed(n: int, lre: float, lim: float) -> tuple[float, float, float, float]:
    """Critical seed (z0re, z0im) plus (R, rho) for the classifier.

    Uses the conjugation-canonical critical point: for Im(lam) < 0 the seed
    is the conjugate of the seed of conj(lam).  All 2n free critical orbits
    share one modulus sequence, so any choice classifies identically; this
    one makes the lam -> conj(lam) symmetry exact in floating point.
    """
    if lim < 0.0:
        zre, zim, R, rho = classify_seed(n, lre, -lim)
        return zre, -zim, R, rho
    r2 = lre * lre + lim * lim
    r = math.sqrt(r2)
    inv2n = 1.0 / (2 * n)
    rho = r ** inv2n
    R = max(4.0 ** (1.0 / (n - 1)), (2.0 * r) ** inv2n)
    a = math.atan2(lim, lre) * inv2n
    return rho * math.cos(a), rho * math.sin(a), R, rho


def _tag_of(escaped: bool, last_central: int) -> tuple[str, Optional[int]]:
    if not escaped:
        return TAG_NON_ESCAPING, None
    if last_central == 0:
        return TAG_CANTOR, 0
    k = last_central + 1
    if k == 2:
        return TAG_CANTOR_CIRCLES, 2
    return TAG_CARPET, k


def _orbit_stats(n: int, lre: float, lim: float, n_max: int):
    """Run the critical orbit for up to 2*n_max steps.

    Returns (esc, last_lo, last_base, steps): the escape index within
    2*n_max (-1 if none) and the last central-visit index for the trap
    radii rho/2 and rho.  The upward stability variant (rho scaled by 2)
    clamps to the critical radius rho itself: the trap door lies strictly
    inside the critical circle, so any larger proxy would count points
    that provably cannot be trap-door visits (|v| < 2*rho holds for every
    |lam| < 1, which would spuriously destabilize every Cantor parameter
    inside the unit disk).  A pole hit (z_j = 0) registers as a central
    visit at j and escape at j+1.
    """
    zre, zim, R, rho = classify_seed(n, lre, lim)
    R2 = R * R
    rho_lo = 0.5 * rho
    lo2 = rho_lo * rho_lo
    base2 = rho * rho

    esc = -1
    last_lo = last_base = 0
    m2 = zre * zre + zim * zim
    steps = 0
    for j in range(1, 2 * n_max + 1):
        if m2 == 0.0:
            # z_{j-1} = 0 was already recorded as central; 0 maps to infinity.
            esc = j
            steps = j
            break
        nxt = _mcmullen_step(n, lre, lim, zre, zim)
        steps = j
        if nxt is None:
            esc = j
            break
        zre, zim = nxt
        m2 = zre * zre + zim * zim
        if not (m2 <= R2):  # catches overflow/NaN as escaped
            esc = j
            break
        if m2 < lo2:
            last_lo = j
        if m2 < base2:
            last_base = j
    return esc, last_lo, last_base, steps


def classify_code(n: int, lre: float, lim: float, n_max: int) -> tuple[int, int, int, int]:
    """Scalar classifier state machine, mirrored by the grid kernels.

    Returns (code, esc, last_central, steps) where code is the shared
    integer encoding: k >= 0 for escape tags (0 Cantor, 2 CantorCircles,
    k >= 3 carpet), CODE_NON_ESCAPING, or CODE_UNDETERMINED.  esc is the
    escape index within 2*n_max (-1 if none); last_central is the base-rho
    central visit index (0 if none).
    """
    if lre == 0.0 and lim == 0.0:
        return CODE_UNDETERMINED, -1, 0, 0
    esc, last_lo, last_base, steps = _orbit_stats(n, lre, lim, n_max)
    if esc < 0:
        return CODE_NON_ESCAPING, -1, 0, steps
    if esc > n_max:
        # escapes only after the base budget: NonEscaping at n_max but not
        # at 2*n_max, hence unstable.
        return CODE_UNDETERMINED, esc, last_base, steps
    tag_lo = _tag_of(True, last_lo)
    tag_base = _tag_of(True, last_base)
    if tag_lo == tag_base:
        return tag_base[1], esc, last_base, steps
    return CODE_UNDETERMINED, esc, last_base, steps


def code_to_tag(code: int) -> tuple[str, Optional[int]]:
    """Map a kernel classification code to (tag, k)."""
    if code == CODE_NON_ESCAPING:
        return TAG_NON_ESCAPING, None
    if code == CODE_UNDETERMINED:
        return TAG_UNDETERMINED, None
    if code == 0:
        return TAG_CANTOR, 0
    if code == 2:
        return TAG_CANTOR_CIRCLES, 2
    if code >= 3:
        return TAG_CARPET, code
    raise ValueError(f"invalid classification code {code}")


def classify_parameter(n: int, lam: complex, n_max: int = DEFAULT_N_MAX,
                       stability: bool = True) -> Classification:
    """Classify lam by the escape trichotomy of its free critical orbit.

    The critical orbit either stays bounded for n_max steps (NonEscaping),
    escapes without visiting the trap-door proxy disk (Cantor), last visits
    it at index 1 (CantorCircles, k=2), or last visits it at index j >= 2
    (Carpet with k = j+1: the step after the final trap-door visit is the
    first step in the basin of infinity).  With stability=True the tag must
    survive rho scaling by 1/2 and 2 and doubling of n_max, else the result
    is Undetermined.  NonEscaping is a statement about n_max, not a theorem;
    steps_computed is reported so callers can judge the budget.
    """
    _check_mcmullen(n, lam)
    if n_max < 1:
        raise InvalidParameterError(f"need n_max >= 1, got {n_max}")

    lre, lim = lam.real, lam.imag
    _, _, R, rho = classify_seed(n, lre, lim)

    esc, last_lo, last_base, steps = _orbit_stats(n, lre, lim, n_max)

    # Tags seen by the base run and the three stability variants (the
    # upward rho variant clamps to rho itself, see StabilityReport).
    base_escaped = 0 <= esc <= n_max
    tag_base = _tag_of(base_escaped, last_base if base_escaped else 0)
    tag_lo = _tag_of(base_escaped, last_lo if base_escaped else 0)
    tag_hi = tag_base
    tag_2n = _tag_of(esc >= 0, last_base if esc >= 0 else 0)

    escape_index = esc if base_escaped else None
    min_central = last_base if (base_escaped and last_base > 0) else None

    if not stability:
        tag, k = tag_base
        return Classification(tag, k, escape_index, min_central,
                              min(steps, n_max), n_max, R, rho, None)

    variants = (tag_lo[0], tag_hi[0], tag_2n[0])
    stable = tag_lo == tag_base == tag_2n
    report = StabilityReport(stable, tag_base[0], variants)
    if stable:
        tag, k = tag_base
    else:
        tag, k = TAG_UNDETERMINED, None
    return Classification(tag, k, escape_index, min_central,
                          steps, n_max, R, rho, report)


# ---------------------------------------------------------------------------
# Spherical geometry
# ---------------------------------------------------------------------------

def chordal_distance(z: complex, w: complex) -> float:
    """Chordal metric on the Riemann sphere, range [0, 2].

    d(z, w) = 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)); points with a non-finite
    component are taken as the point at infinity (d(z, inf) = 2/sqrt(1+|z|^2)).
    """
    z_inf = not (math.isfinite(z.real) and math.isfinite(z.imag))
    w_inf = not (math.isfinite(w.real) and math.isfinite(w.imag))
    if z_inf and w_inf:
        return 0.0
    if z_inf:
        return 2.0 / math.hypot(1.0, abs(w))
    if w_inf:
        return 2.0 / math.hypot(1.0, abs(z))
    num = 2.0 * abs(z - w)
    den = math.hypot(1.0, abs(z)) * math.hypot(1.0, abs(w))
    if not math.isfinite(num):
        return 2.0
    return min(num / den, 2.0)
