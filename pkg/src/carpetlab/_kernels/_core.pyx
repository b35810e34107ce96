# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled grid kernels (hot loops of the escape-time engine).

Must stay bit-identical to fallback.py: same formulas, same operation
order, plain double arithmetic only.  The extension is compiled with
-ffp-contract=off so the C compiler cannot fuse multiply-adds.
"""

import numpy as np

CODE_NON_ESCAPING = -1
CODE_UNDETERMINED = -2

cdef int C_NON_ESCAPING = -1
cdef int C_UNDETERMINED = -2


def mcmullen_escape(int n, double lre, double lim, double[::1] xs,
                    double[::1] ys, int n_max, double R):
    cdef Py_ssize_t H = ys.shape[0]
    cdef Py_ssize_t W = xs.shape[0]
    out = np.empty((H, W), dtype=np.int32)
    cdef int[:, ::1] esc = out
    cdef double R2 = R * R
    cdef double zre, zim, m2, wre, wim, m2w, tmp
    cdef Py_ssize_t row, col
    cdef int j, t, e
    with nogil:
        for row in range(H):
            for col in range(W):
                zre = xs[col]
                zim = ys[row]
                m2 = zre * zre + zim * zim
                if not (m2 <= R2):
                    esc[row, col] = 0
                    continue
                e = -1
                for j in range(1, n_max + 1):
                    wre = zre
                    wim = zim
                    for t in range(n - 1):
                        tmp = wre * zre - wim * zim
                        wim = wre * zim + wim * zre
                        wre = tmp
                    m2w = wre * wre + wim * wim
                    if m2w == 0.0:
                        e = j
                        break
                    zre = wre + (lre * wre + lim * wim) / m2w
                    zim = wim + (lim * wre - lre * wim) / m2w
                    m2 = zre * zre + zim * zim
                    if not (m2 <= R2):
                        e = j
                        break
                esc[row, col] = e
    return out


def quadratic_escape(double cre, double cim, double[::1] xs, double[::1] ys,
                     int n_max, double R):
    cdef Py_ssize_t H = ys.shape[0]
    cdef Py_ssize_t W = xs.shape[0]
    out = np.empty((H, W), dtype=np.int32)
    cdef int[:, ::1] esc = out
    cdef double R2 = R * R
    cdef double zre, zim, m2, fre, fim
    cdef Py_ssize_t row, col
    cdef int j, e
    with nogil:
        for row in range(H):
            for col in range(W):
                zre = xs[col]
                zim = ys[row]
                m2 = zre * zre + zim * zim
                if not (m2 <= R2):
                    esc[row, col] = 0
                    continue
                e = -1
                for j in range(1, n_max + 1):
                    fre = zre * zre - zim * zim + cre
                    fim = 2.0 * zre * zim + cim
                    zre = fre
                    zim = fim
                    m2 = zre * zre + zim * zim
                    if not (m2 <= R2):
                        e = j
                        break
                esc[row, col] = e
    return out


def siegel_escape(double rre, double rim, double[::1] xs, double[::1] ys,
                  int n_max, double R):
    cdef Py_ssize_t H = ys.shape[0]
    cdef Py_ssize_t W = xs.shape[0]
    out = np.empty((H, W), dtype=np.int32)
    cdef int[:, ::1] esc = out
    cdef double R2 = R * R
    cdef double zre, zim, m2, fre, fim
    cdef Py_ssize_t row, col
    cdef int j, e
    with nogil:
        for row in range(H):
            for col in range(W):
                zre = xs[col]
                zim = ys[row]
                m2 = zre * zre + zim * zim
                if not (m2 <= R2):
                    esc[row, col] = 0
                    continue
                e = -1
                for j in range(1, n_max + 1):
                    fre = rre * zre - rim * zim + zre * zre - zim * zim
                    fim = rre * zim + rim * zre + 2.0 * zre * zim
                    zre = fre
                    zim = fim
                    m2 = zre * zre + zim * zim
                    if not (m2 <= R2):
                        e = j
                        break
                esc[row, col] = e
    return out


def mcmullen_classify(int n, double[:, ::1] lre, double[:, ::1] lim,
                      double[:, ::1] z0re, double[:, ::1] z0im,
                      double[:, ::1] Rs, double[:, ::1] rhos, int n_max):
    cdef Py_ssize_t H = lre.shape[0]
    cdef Py_ssize_t W = lre.shape[1]
    codes_arr = np.empty((H, W), dtype=np.int32)
    esc_arr = np.empty((H, W), dtype=np.int32)
    cdef int[:, ::1] codes = codes_arr
    cdef int[:, ::1] escv = esc_arr
    cdef double lr, li, R, rho, R2, lo2, base2, t2
    cdef double zre, zim, m2, wre, wim, m2w, tmp
    cdef Py_ssize_t row, col
    cdef int j, t, e, last_lo, last_base
    cdef int c_lo, c_base, code
    with nogil:
        for row in range(H):
            for col in range(W):
                lr = lre[row, col]
                li = lim[row, col]
                if lr == 0.0 and li == 0.0:
                    codes[row, col] = C_UNDETERMINED
                    escv[row, col] = -1
                    continue
                R = Rs[row, col]
                rho = rhos[row, col]
                R2 = R * R
                t2 = 0.5 * rho
                lo2 = t2 * t2
                base2 = rho * rho

                zre = z0re[row, col]
                zim = z0im[row, col]
                m2 = zre * zre + zim * zim
                e = -1
                last_lo = 0
                last_base = 0
                for j in range(1, 2 * n_max + 1):
                    wre = zre
                    wim = zim
                    for t in range(n - 1):
                        tmp = wre * zre - wim * zim
                        wim = wre * zim + wim * zre
                        wre = tmp
                    m2w = wre * wre + wim * wim
                    if m2w == 0.0:
                        e = j
                        break
                    zre = wre + (lr * wre + li * wim) / m2w
                    zim = wim + (li * wre - lr * wim) / m2w
                    m2 = zre * zre + zim * zim
                    if not (m2 <= R2):
                        e = j
                        break
                    if m2 < lo2:
                        last_lo = j
                    if m2 < base2:
                        last_base = j

                escv[row, col] = e
                if e < 0:
                    codes[row, col] = C_NON_ESCAPING
                elif e > n_max:
                    codes[row, col] = C_UNDETERMINED
                else:
                    c_lo = 0 if last_lo == 0 else last_lo + 1
                    c_base = 0 if last_base == 0 else last_base + 1
                    if c_lo == c_base:
                        code = c_base
                    else:
                        code = C_UNDETERMINED
                    codes[row, col] = code
    return codes_arr, esc_arr
