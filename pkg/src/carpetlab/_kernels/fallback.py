"""Pure-Python (numpy) grid kernels.

These mirror the compiled kernels in _core.pyx operation for operation:
z^n by repeated complex multiplication, lam/w as lam*conj(w)/|w|^2, and
NaN-safe escape tests via ``~(m2 <= R2)``.  Because both sides stick to
+,-,*,/ on float64 (and the compiled side is built with -ffp-contract=off)
the two implementations produce bit-identical outputs.
"""

from __future__ import annotations

import numpy as np

CODE_NON_ESCAPING = -1
CODE_UNDETERMINED = -2


def _z0_grids(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    H, W = ys.size, xs.size
    zre = np.broadcast_to(xs, (H, W)).astype(np.float64).copy()
    zim = np.broadcast_to(ys[:, None], (H, W)).astype(np.float64).copy()
    return zre, zim


def _escape_loop(step, zre, zim, n_max: int, R: float) -> np.ndarray:
    """Shared escape-time driver: esc = first j with |z_j| > R, -1 if none.

    ``step(zr, zi) -> (fr, fi, pole_mask)`` applies one map step; pole_mask
    marks points that stepped onto a pole (escape at the current index).
    """
    H, W = zre.shape
    esc = np.full(H * W, -1, dtype=np.int32)
    R2 = R * R
    zr = zre.ravel()
    zi = zim.ravel()
    m2 = zr * zr + zi * zi
    out0 = ~(m2 <= R2)
    esc[out0] = 0
    active = np.flatnonzero(~out0)
    zr = zr[active]
    zi = zi[active]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        for j in range(1, n_max + 1):
            if active.size == 0:
                break
            fr, fi, pole = step(zr, zi)
            m2 = fr * fr + fi * fi
            escaped = pole | ~(m2 <= R2)
            if escaped.any():
                esc[active[escaped]] = j
                keep = ~escaped
                active = active[keep]
                zr = fr[keep]
                zi = fi[keep]
            else:
                zr = fr
                zi = fi
    return esc.reshape(H, W)


def mcmullen_escape(n: int, lre: float, lim: float, xs: np.ndarray,
                    ys: np.ndarray, n_max: int, R: float) -> np.ndarray:
    def step(zr, zi):
        wr, wi = zr, zi
        for _ in range(n - 1):
            wr, wi = wr * zr - wi * zi, wr * zi + wi * zr
        m2w = wr * wr + wi * wi
        pole = m2w == 0.0
        safe = np.where(pole, 1.0, m2w)
        fr = wr + (lre * wr + lim * wi) / safe
        fi = wi + (lim * wr - lre * wi) / safe
        return fr, fi, pole

    zre, zim = _z0_grids(xs, ys)
    return _escape_loop(step, zre, zim, n_max, R)


def quadratic_escape(cre: float, cim: float, xs: np.ndarray, ys: np.ndarray,
                     n_max: int, R: float) -> np.ndarray:
    def step(zr, zi):
        fr = zr * zr - zi * zi + cre
        fi = 2.0 * zr * zi + cim
        return fr, fi, np.zeros(zr.shape, dtype=bool)

    zre, zim = _z0_grids(xs, ys)
    return _escape_loop(step, zre, zim, n_max, R)


def siegel_escape(rre: float, rim: float, xs: np.ndarray, ys: np.ndarray,
                  n_max: int, R: float) -> np.ndarray:
    def step(zr, zi):
        fr = rre * zr - rim * zi + zr * zr - zi * zi
        fi = rre * zi + rim * zr + 2.0 * zr * zi
        return fr, fi, np.zeros(zr.shape, dtype=bool)

    zre, zim = _z0_grids(xs, ys)
    return _escape_loop(step, zre, zim, n_max, R)


def mcmullen_classify(n: int, lre: np.ndarray, lim: np.ndarray,
                      z0re: np.ndarray, z0im: np.ndarray,
                      Rs: np.ndarray, rhos: np.ndarray,
                      n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Escape-trichotomy codes for a grid of parameters.

    Inputs are 2D float64 arrays (parameter grid plus per-parameter seeds
    from dynamics.classify_seed).  Returns (codes, esc) int32 arrays; codes
    use the shared encoding of dynamics.classify_code.
    """
    shape = lre.shape
    size = lre.size
    lr = lre.ravel().astype(np.float64)
    li = lim.ravel().astype(np.float64)

    codes = np.full(size, CODE_UNDETERMINED, dtype=np.int32)
    esc = np.full(size, -1, dtype=np.int32)
    last_lo = np.zeros(size, dtype=np.int32)
    last_base = np.zeros(size, dtype=np.int32)

    valid = (lr != 0.0) | (li != 0.0)
    active = np.flatnonzero(valid)

    R = Rs.ravel()[active].astype(np.float64)
    rho = rhos.ravel()[active].astype(np.float64)
    R2 = R * R
    t = 0.5 * rho
    lo2 = t * t
    base2 = rho * rho

    zr = z0re.ravel()[active].astype(np.float64)
    zi = z0im.ravel()[active].astype(np.float64)
    alr = lr[active]
    ali = li[active]

    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        for j in range(1, 2 * n_max + 1):
            if active.size == 0:
                break
            wr, wi = zr, zi
            for _ in range(n - 1):
                wr, wi = wr * zr - wi * zi, wr * zi + wi * zr
            m2w = wr * wr + wi * wi
            pole = m2w == 0.0
            safe = np.where(pole, 1.0, m2w)
            fr = wr + (alr * wr + ali * wi) / safe
            fi = wi + (ali * wr - alr * wi) / safe
            m2 = fr * fr + fi * fi
            escaped = pole | ~(m2 <= R2)
            central_lo = ~escaped & (m2 < lo2)
            central_base = ~escaped & (m2 < base2)
            if central_lo.any():
                last_lo[active[central_lo]] = j
            if central_base.any():
                last_base[active[central_base]] = j
            if escaped.any():
                esc[active[escaped]] = j
                keep = ~escaped
                active = active[keep]
                zr = fr[keep]
                zi = fi[keep]
                alr = alr[keep]
                ali = ali[keep]
                R2 = R2[keep]
                lo2 = lo2[keep]
                base2 = base2[keep]
            else:
                zr = fr
                zi = fi

    def code_of(last):
        return np.where(last == 0, 0, last + 1).astype(np.int32)

    c_lo = code_of(last_lo)
    c_base = code_of(last_base)
    base_escaped = (esc >= 0) & (esc <= n_max)
    stable = c_lo == c_base

    codes[valid & (esc < 0)] = CODE_NON_ESCAPING
    codes[valid & (esc > n_max)] = CODE_UNDETERMINED
    sel = valid & base_escaped & stable
    codes[sel] = c_base[sel]
    codes[valid & base_escaped & ~stable] = CODE_UNDETERMINED
    return codes.reshape(shape), esc.reshape(shape)
