#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the pure-Python (numpy) fallback.

Runs the dynamical-plane escape kernel and the parameter-plane classifier
on identical inputs through both implementations, checks the outputs are
bit-identical, and prints throughput plus speedup.

    python3 benchmarks/bench_kernels.py [--size 512] [--n-max 300]
"""

import argparse
import time

import numpy as np

from carpetlab._kernels import fallback
from carpetlab.dynamics import classify_seed
from carpetlab.fields import pixel_centers

try:
    from carpetlab._kernels import _core as compiled
except ImportError:
    compiled = None


def bench(label, fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--n-max", type=int, default=300)
    args = parser.parse_args()

    size, n_max = args.size, args.n_max
    xs = pixel_centers(-2.0, 2.0, size)
    ys = pixel_centers(-2.0, 2.0, size)

    print(f"grid {size}x{size}, n_max {n_max}")
    if compiled is None:
        print("compiled extension not built: run "
              "`python3 setup.py build_ext --inplace` first")

    rows = []

    # escape-time field, lambda in the Cantor-circle regime (deep orbits)
    lam = 1e-8
    t_fb, esc_fb = bench("escape fallback",
                         lambda: fallback.mcmullen_escape(3, lam, 0.0, xs, ys,
                                                          n_max, 2.0))
    if compiled is not None:
        t_c, esc_c = bench("escape compiled",
                           lambda: compiled.mcmullen_escape(3, lam, 0.0, xs, ys,
                                                            n_max, 2.0))
        assert np.array_equal(esc_fb, esc_c), "kernel outputs diverged"
        rows.append(("mcmullen_escape", t_fb, t_c))
    else:
        rows.append(("mcmullen_escape", t_fb, None))

    # classification grid over the interesting parameter window
    side = max(64, size // 4)
    gx = pixel_centers(-0.3, 0.3, side)
    lre = np.broadcast_to(gx, (side, side)).copy()
    lim = np.broadcast_to(gx[:, None], (side, side)).copy()
    z0re = np.empty_like(lre)
    z0im = np.empty_like(lre)
    Rs = np.empty_like(lre)
    rhos = np.empty_like(lre)
    for r in range(side):
        for c in range(side):
            z0re[r, c], z0im[r, c], Rs[r, c], rhos[r, c] = classify_seed(
                3, lre[r, c], lim[r, c])

    t_fb, out_fb = bench("classify fallback",
                         lambda: fallback.mcmullen_classify(
                             3, lre, lim, z0re, z0im, Rs, rhos, n_max))
    if compiled is not None:
        t_c, out_c = bench("classify compiled",
                           lambda: compiled.mcmullen_classify(
                               3, lre, lim, z0re, z0im, Rs, rhos, n_max))
        assert np.array_equal(out_fb[0], out_c[0])
        assert np.array_equal(out_fb[1], out_c[1])
        rows.append((f"mcmullen_classify ({side}x{side})", t_fb, t_c))
    else:
        rows.append((f"mcmullen_classify ({side}x{side})", t_fb, None))

    print(f"{'kernel':<28} {'fallback':>10} {'compiled':>10} {'speedup':>8}")
    for name, t_fb, t_c in rows:
        if t_c is None:
            print(f"{name:<28} {t_fb * 1e3:>8.1f}ms {'-':>10} {'-':>8}")
        else:
            print(f"{name:<28} {t_fb * 1e3:>8.1f}ms {t_c * 1e3:>8.1f}ms "
                  f"{t_fb / t_c:>7.1f}x")
    if compiled is not None:
        print("outputs bit-identical across implementations")


if __name__ == "__main__":
    main()
