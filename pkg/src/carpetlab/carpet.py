"""Nested-square carpet families with exact combinatorics.

Two constructions share the machinery here:

* the dimension-one family F_m: at step i every surviving square of side L
  loses a centered open square of side L*(1 - 2/k^i), leaving the ring of
  4*k^i - 4 closed boundary subsquares of side L/k^i.  After m steps there
  are b_m = prod_{i<=m} (4k^i - 4) squares of side l_m = k^(-m(m+1)/2).
* the middle-ninths carpet: the classical 8-of-9 subdivision.

Everything is exact: counts are big integers, coordinates are rationals
with power-of-k denominators (b_m overflows 64-bit by m ~ 5, and floating
sides would break interior-disjointness).  Squares are closed; the removed
central squares are open, so their boundaries survive in the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .raster import Raster

DEFAULT_MATERIALIZATION_CAP = 10_000_000


class MaterializationCapError(RuntimeError):
    """Materializing this level would exceed the square-count cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"materializing {required} squares exceeds cap {cap}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class SquareSpec:
    """Closed square [x, x+side] x [y, y+side], all coordinates exact."""

    x: Fraction
    y: Fraction
    side: Fraction


@dataclass(frozen=True)
class CarpetLevel:
    k: int
    m: int
    count: int
    side: Fraction
    squares: Optional[tuple[SquareSpec, ...]] = None


def side_exponent(m: int) -> int:
    """E with l_m = k^-E, i.e. E = 1 + 2 + ... + m."""
    return m * (m + 1) // 2


def _check_km(k: int, m: int) -> None:
    if k < 3:
        # removing a centered square of side 1 - 2/k needs k >= 3 to leave a
        # ring; k = 2 degenerates
        raise ValueError(f"construction needs k >= 3, got {k}")
    if m < 0:
        raise ValueError(f"need depth m >= 0, got {m}")


def carpet_counts(k: int, m: int) -> tuple[int, Fraction]:
    """Exact (b_m, l_m); b_0 = 1 and l_0 = 1."""
    _check_km(k, m)
    b = 1
    for i in range(1, m + 1):
        b *= 4 * k**i - 4
    return b, Fraction(1, k ** side_exponent(m))


def _ring_offsets(f: int) -> list[tuple[int, int]]:
    """The 4f-4 boundary cells of an f-by-f grid."""
    cells = [(a, b) for a in (0, f - 1) for b in range(f)]
    cells += [(a, b) for a in range(1, f - 1) for b in (0, f - 1)]
    return cells


def _lattice_cells(k: int, m: int, cap: int) -> tuple[int, list[tuple[int, int]]]:
    """Surviving cells as integer lattice coordinates at scale k^E."""
    required, _ = carpet_counts(k, m)
    if required > cap:
        raise MaterializationCapError(required, cap)
    cells = [(0, 0)]
    for i in range(1, m + 1):
        f = k**i
        ring = _ring_offsets(f)
        cells = [(p * f + a, q * f + b) for (p, q) in cells for (a, b) in ring]
    cells.sort()
    return side_exponent(m), cells


def carpet_squares(k: int, m: int,
                   cap: int = DEFAULT_MATERIALIZATION_CAP) -> list[SquareSpec]:
    """All b_m squares of F_m, ordered lexicographically by (x, y)."""
    E, cells = _lattice_cells(k, m, cap)
    K = k**E
    side = Fraction(1, K)
    return [SquareSpec(Fraction(p, K), Fraction(q, K), side) for (p, q) in cells]


def carpet_level(k: int, m: int, materialize: bool = False,
                 cap: int = DEFAULT_MATERIALIZATION_CAP) -> CarpetLevel:
    count, side = carpet_counts(k, m)
    squares = tuple(carpet_squares(k, m, cap)) if materialize else None
    return CarpetLevel(k=k, m=m, count=count, side=side, squares=squares)


def carpet_level_json(level: CarpetLevel) -> dict:
    """JSON document: counts as decimal strings, side as a k^-E exponent."""
    doc = {
        "k": level.k,
        "m": level.m,
        "b_m": str(level.count),
        "l_m": f"{level.k}^-{side_exponent(level.m)}",
    }
    if level.squares is not None:
        doc["squares"] = [
            [sq.x.numerator, sq.x.denominator, sq.y.numerator, sq.y.denominator]
            for sq in level.squares
        ]
    return doc


# ---------------------------------------------------------------------------
# Hausdorff-measure cover bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverBound:
    """log of the (sqrt(2) l_m)^s * b_m cover sum for the natural cover.

    The b_m squares of diameter sqrt(2) l_m cover F, so this bounds the
    s-dimensional Hausdorff sum at scale sqrt(2) l_m from above; the bound
    is kept in log space because b_m and l_m^s overflow floats long before
    m = 200.
    """

    s: float
    m: int
    log_value: float


def cover_bound(k: int, m: int, s: float) -> CoverBound:
    _check_km(k, m)
    if m < 1:
        raise ValueError(f"cover bound needs m >= 1, got {m}")
    if not s > 0:
        raise ValueError(f"need s > 0, got {s}")
    log_b = 0.0
    for i in range(1, m + 1):
        log_b += math.log(4 * (k**i - 1))
    log_l = -side_exponent(m) * math.log(k)
    return CoverBound(s=s, m=m, log_value=s * (0.5 * math.log(2.0) + log_l) + log_b)


# ---------------------------------------------------------------------------
# Exact membership and rasterization
# ---------------------------------------------------------------------------

def _cell_candidates(num: int, den: int, K: int, parent: int, f: int):
    """Lattice cells at scale K (within the parent cell) containing num/den.

    A closed cell [a/K, (a+1)/K] contains the coordinate; when the point
    sits exactly on a lattice line it belongs to two neighbours, which is
    what keeps the boundaries of the removed open squares in the set.
    Yields (cell, local) with local = cell - parent*f in [0, f).
    """
    a, r = divmod(num * K, den)
    lo, hi = parent * f, (parent + 1) * f - 1
    cells = (a - 1, a) if r == 0 else (a,)
    for c in cells:
        if lo <= c <= hi:
            yield c, c - lo


def _keep_ring(la: int, lb: int, f: int) -> bool:
    return la == 0 or la == f - 1 or lb == 0 or lb == f - 1


def _keep_ninths(la: int, lb: int, f: int) -> bool:
    return not (la == 1 and lb == 1)


def _member_point(num_x: int, num_y: int, den: int, k: int, m: int,
                  kind: str) -> bool:
    """Exact membership of (num_x/den, num_y/den) in the depth-m set."""
    keep = _keep_ring if kind == "ring" else _keep_ninths
    cands = {(0, 0)}
    K = 1
    for i in range(1, m + 1):
        f = k**i if kind == "ring" else 3
        K *= f
        nxt = set()
        for (p, q) in cands:
            for (cx, la) in _cell_candidates(num_x, den, K, p, f):
                for (cy, lb) in _cell_candidates(num_y, den, K, q, f):
                    if keep(la, lb, f):
                        nxt.add((cx, cy))
        if not nxt:
            return False
        cands = nxt
    return True


def carpet_membership(k: int, m: int, x: Fraction, y: Fraction) -> bool:
    """Exact test: is the point in F_m (closed squares, open removals)?"""
    _check_km(k, m)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        return False
    den = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    return _member_point(int(x * den), int(y * den), den, k, m, "ring")


def _occupancy_vectorized(k: int, m: int, res: int, kind: str) -> np.ndarray:
    """Pixel-center occupancy via per-level integer division (odd k only).

    Centers (2i+1)/(2 res) have an even denominator while lattice lines for
    odd k have odd denominators, so no center ever sits on a lattice line
    and the containing cell chain is unique: occupancy is the AND of the
    per-level keep masks.
    """
    num = (2 * np.arange(res, dtype=np.int64) + 1)
    den = 2 * res
    occ = np.ones((res, res), dtype=bool)
    K = 1
    ax_prev = np.zeros(res, dtype=np.int64)
    ay_prev = np.zeros(res, dtype=np.int64)
    for i in range(1, m + 1):
        f = k**i if kind == "ring" else 3
        K *= f
        ax = (num * K) // den
        ay = ax  # same centers on both axes
        lx = ax - f * ax_prev
        ly = ay - f * ay_prev
        if kind == "ring":
            edge_x = (lx == 0) | (lx == f - 1)
            edge_y = (ly == 0) | (ly == f - 1)
            keep = edge_y[:, None] | edge_x[None, :]
        else:
            keep = ~((ly == 1)[:, None] & (lx == 1)[None, :])
        occ &= keep
        ax_prev, ay_prev = ax, ay
    return occ


def _occupancy_exact(k: int, m: int, res: int, kind: str) -> np.ndarray:
    occ = np.zeros((res, res), dtype=bool)
    den = 2 * res
    nums = [2 * i + 1 for i in range(res)]
    for j, ny in enumerate(nums):
        for i, nx in enumerate(nums):
            occ[j, i] = _member_point(nx, ny, den, k, m, kind)
    return occ


def _occupancy(k: int, m: int, res: int, kind: str) -> np.ndarray:
    K = k ** side_exponent(m) if kind == "ring" else k**m
    if k % 2 == 1 and (2 * res) * K < 2**62:
        return _occupancy_vectorized(k, m, res, kind)
    return _occupancy_exact(k, m, res, kind)


def rasterize_carpet(k: int, m: int, resolution: int) -> Raster:
    """Occupancy over [0,1]^2: a pixel is occupied iff its center is in F_m.

    Pixel centers are compared exactly (integer lattice arithmetic), so the
    raster is the true pixel-center sampling of the set at this depth; no
    squares are materialized.
    """
    _check_km(k, m)
    if resolution < 1:
        raise ValueError(f"need resolution >= 1, got {resolution}")
    return Raster(occupancy=_occupancy(k, m, resolution, "ring"))


def standard_carpet(m: int, resolution: int) -> Raster:
    """Middle-ninths carpet approximant at depth m, rasterized as above."""
    if m < 0:
        raise ValueError(f"need depth m >= 0, got {m}")
    if resolution < 1:
        raise ValueError(f"need resolution >= 1, got {resolution}")
    return Raster(occupancy=_occupancy(3, m, resolution, "ninths"))
