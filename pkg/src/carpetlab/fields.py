"""Escape-time and classification fields over pixel grids.

Pixel centers follow one shared convention everywhere (tiles, surveys,
area probes): x_i = x0 + (i + 0.5) * (x1 - x0) / W with row index 0 at the
bottom of the viewport.  Grids may be computed in row blocks on a thread
pool; the block split never changes the per-pixel arithmetic, so outputs
are independent of the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import (CODE_NON_ESCAPING, CODE_UNDETERMINED, MapFamily,
                       McMullen, Quadratic, SiegelQuadratic, classify_seed,
                       family_escape_radius)
from .raster import Raster

Viewport = tuple[float, float, float, float]


def viewport_from_center(cx: float, cy: float, scale: float,
                         width: int, height: int) -> Viewport:
    """Viewport rectangle for a tile: scale is plane units per tile width."""
    x0 = cx - 0.5 * scale
    x1 = cx + 0.5 * scale
    h = scale * height / width
    y0 = cy - 0.5 * h
    y1 = cy + 0.5 * h
    return (x0, y0, x1, y1)


def pixel_centers(lo: float, hi: float, count: int) -> np.ndarray:
    return lo + (np.arange(count, dtype=np.float64) + 0.5) * ((hi - lo) / count)


def _row_blocks(height: int, threads: int) -> list[tuple[int, int]]:
    threads = max(1, min(threads, height))
    block = (height + threads - 1) // threads
    return [(lo, min(lo + block, height)) for lo in range(0, height, block)]


def escape_field(family: MapFamily, viewport: Viewport, width: int, height: int,
                 n_max: int, threads: int = 1) -> np.ndarray:
    """Escape-index grid: entry -1 means no escape within n_max steps."""
    x0, y0, x1, y1 = viewport
    xs = pixel_centers(x0, x1, width)
    ys = pixel_centers(y0, y1, height)
    R = family_escape_radius(family)

    if isinstance(family, McMullen):
        run = lambda ysub: _kernels.mcmullen_escape(
            family.n, family.lam.real, family.lam.imag, xs, ysub, n_max, R)
    elif isinstance(family, Quadratic):
        run = lambda ysub: _kernels.quadratic_escape(
            family.c.real, family.c.imag, xs, ysub, n_max, R)
    elif isinstance(family, SiegelQuadratic):
        t = 2.0 * math.pi * family.alpha
        rre, rim = math.cos(t), math.sin(t)
        run = lambda ysub: _kernels.siegel_escape(rre, rim, xs, ysub, n_max, R)
    else:
        raise TypeError(f"unknown map family: {family!r}")

    if threads <= 1 or height < 2:
        return run(ys)
    blocks = _row_blocks(height, threads)
    out = np.empty((height, width), dtype=np.int32)
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        futures = [(lo, hi, pool.submit(run, ys[lo:hi])) for lo, hi in blocks]
        for lo, hi, fut in futures:
            out[lo:hi] = fut.result()
    return out


def classification_field(n: int, viewport: Viewport, width: int, height: int,
                         n_max: int, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel escape-trichotomy codes over a parameter-plane viewport.

    Returns (codes, esc); codes use the dynamics.classify_code encoding and
    esc is the critical-orbit escape index within 2*n_max (-1 if none).
    """
    x0, y0, x1, y1 = viewport
    xs = pixel_centers(x0, x1, width)
    ys = pixel_centers(y0, y1, height)
    lre = np.broadcast_to(xs, (height, width)).copy()
    lim = np.broadcast_to(ys[:, None], (height, width)).copy()

    # Seeds come from the scalar helper so every kernel path sees identical
    # critical points and radii (libm, not numpy ufunc transcendentals).
    z0re = np.empty((height, width))
    z0im = np.empty((height, width))
    Rs = np.empty((height, width))
    rhos = np.empty((height, width))
    for r in range(height):
        li = lim[r, 0]
        for c in range(width):
            lr = lre[r, c]
            if lr == 0.0 and li == 0.0:
                z0re[r, c] = z0im[r, c] = 0.0
                Rs[r, c] = rhos[r, c] = 1.0
            else:
                z0re[r, c], z0im[r, c], Rs[r, c], rhos[r, c] = classify_seed(n, lr, li)

    def run(lo: int, hi: int):
        return _kernels.mcmullen_classify(
            n, lre[lo:hi], lim[lo:hi], z0re[lo:hi], z0im[lo:hi],
            Rs[lo:hi], rhos[lo:hi], n_max)

    if threads <= 1 or height < 2:
        return run(0, height)
    blocks = _row_blocks(height, threads)
    codes = np.empty((height, width), dtype=np.int32)
    esc = np.empty((height, width), dtype=np.int32)
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        futures = [(lo, hi, pool.submit(run, lo, hi)) for lo, hi in blocks]
        for lo, hi, fut in futures:
            c, e = fut.result()
            codes[lo:hi] = c
            esc[lo:hi] = e
    return codes, esc


# ---------------------------------------------------------------------------
# Area probes
# ---------------------------------------------------------------------------

def non_escaping_raster(family: MapFamily, viewport: Viewport, resolution: int,
                        n_max: int, threads: int = 1) -> Raster:
    """Occupancy raster of pixels whose orbits did not escape within n_max."""
    esc = escape_field(family, viewport, resolution, resolution, n_max, threads)
    return Raster(occupancy=(esc < 0), viewport=viewport)


def area_schedule(family: MapFamily, viewport: Viewport, resolution: int,
                  schedule: list[int], threads: int = 1) -> list[tuple[int, float]]:
    """Non-escaped fraction at each budget, from one escape-index field.

    Escape indices do not depend on the budget cap, so a single field at
    max(schedule) answers every point; results equal recomputing per budget.
    """
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be non-empty and strictly increasing")
    esc = escape_field(family, viewport, resolution, resolution,
                       max(schedule), threads)
    total = esc.size
    out = []
    for n in schedule:
        escaped = (esc >= 0) & (esc <= n)
        out.append((n, float((total - int(escaped.sum())) / total)))
    return out


# ---------------------------------------------------------------------------
# Parameter surveys
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurveyResult:
    region: Viewport
    grid: tuple[int, int]  # (gx, gy)
    n: int
    n_max: int
    codes: np.ndarray  # (gy, gx) int32
    histogram: dict
    warnings: tuple[str, ...] = ()


def histogram_of_codes(codes: np.ndarray) -> dict:
    """Histogram keyed by tag, with carpet counts split by k."""
    flat = codes.ravel()
    carpet: dict[str, int] = {}
    for k in sorted(int(v) for v in np.unique(flat[flat >= 3])):
        carpet[str(k)] = int((flat == k).sum())
    return {
        "Cantor": int((flat == 0).sum()),
        "CantorCircles": int((flat == 2).sum()),
        "Carpet": carpet,
        "NonEscaping": int((flat == CODE_NON_ESCAPING).sum()),
        "Undetermined": int((flat == CODE_UNDETERMINED).sum()),
    }


def run_survey(region: Viewport, gx: int, gy: int, n: int, n_max: int,
               threads: int = 1) -> SurveyResult:
    """Classify the centers of a gx-by-gy grid of cells over the region."""
    if gx < 1 or gy < 1:
        raise ValueError("grid dimensions must be >= 1")
    codes, _ = classification_field(n, region, gx, gy, n_max, threads)
    warnings = []
    x0, y0, x1, y1 = region
    xs = pixel_centers(x0, x1, gx)
    ys = pixel_centers(y0, y1, gy)
    if np.any(xs == 0.0) and np.any(ys == 0.0):
        warnings.append("grid contains the puncture lam = 0; that cell is Undetermined")
    return SurveyResult(region=region, grid=(gx, gy), n=n, n_max=n_max,
                        codes=codes, histogram=histogram_of_codes(codes),
                        warnings=tuple(warnings))


def cell_center(region: Viewport, grid: tuple[int, int], ix: int, iy: int) -> complex:
    """Center of survey cell (ix, iy); matches the grid the kernels iterate."""
    x0, y0, x1, y1 = region
    gx, gy = grid
    x = x0 + (ix + 0.5) * ((x1 - x0) / gx)
    y = y0 + (iy + 0.5) * ((y1 - y0) / gy)
    return complex(x, y)


def tag_counts_present(histogram: dict) -> set[str]:
    present = {tag for tag in ("Cantor", "CantorCircles", "NonEscaping", "Undetermined")
               if histogram.get(tag, 0) > 0}
    if any(v > 0 for v in histogram.get("Carpet", {}).values()):
        present.add("Carpet")
    return present
