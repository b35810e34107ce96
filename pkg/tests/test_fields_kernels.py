import math

import numpy as np
import pytest

from carpetlab import _kernels
from carpetlab._kernels import fallback
from carpetlab.dynamics import (McMullen, Quadratic, SiegelQuadratic,
                                classify_code, classify_seed)
from carpetlab.fields import (cell_center, classification_field, escape_field,
                              histogram_of_codes, pixel_centers, run_survey,
                              viewport_from_center)

compiled = pytest.importorskip("carpetlab._kernels._core") \
    if _kernels.IMPLEMENTATION == "compiled" else None
needs_compiled = pytest.mark.skipif(compiled is None,
                                    reason="compiled kernels not built")


def seed_arrays(n, lre, lim):
    H, W = lre.shape
    z0re = np.empty((H, W))
    z0im = np.empty((H, W))
    Rs = np.empty((H, W))
    rhos = np.empty((H, W))
    for r in range(H):
        for c in range(W):
            if lre[r, c] == 0.0 and lim[r, c] == 0.0:
                z0re[r, c] = z0im[r, c] = 0.0
                Rs[r, c] = rhos[r, c] = 1.0
            else:
                z0re[r, c], z0im[r, c], Rs[r, c], rhos[r, c] = classify_seed(
                    n, lre[r, c], lim[r, c])
    return z0re, z0im, Rs, rhos


@needs_compiled
class TestCompiledFallbackEquivalence:
    def test_mcmullen_escape_bitwise_equal(self):
        xs = pixel_centers(-2.0, 2.0, 97)
        ys = pixel_centers(-1.5, 2.5, 83)
        a = compiled.mcmullen_escape(3, 0.2, -0.3, xs, ys, 150, 2.0)
        b = fallback.mcmullen_escape(3, 0.2, -0.3, xs, ys, 150, 2.0)
        assert np.array_equal(a, b)

    def test_escape_grid_with_exact_pole(self):
        # grid containing z0 = 0 exactly: the pole maps to infinity
        xs = np.array([-1.0, 0.0, 1.0])
        ys = np.array([0.0])
        a = compiled.mcmullen_escape(3, 0.5, 0.0, xs, ys, 50, 2.0)
        b = fallback.mcmullen_escape(3, 0.5, 0.0, xs, ys, 50, 2.0)
        assert np.array_equal(a, b)
        assert a[0, 1] == 1  # 0 maps to infinity at the first step

    def test_quadratic_and_siegel_equal(self):
        xs = pixel_centers(-2.0, 2.0, 64)
        ys = pixel_centers(-2.0, 2.0, 64)
        qa = compiled.quadratic_escape(-0.12, 0.75, xs, ys, 200, 2.0)
        qb = fallback.quadratic_escape(-0.12, 0.75, xs, ys, 200, 2.0)
        assert np.array_equal(qa, qb)
        t = 2.0 * math.pi * 0.61803398875
        sa = compiled.siegel_escape(math.cos(t), math.sin(t), xs, ys, 200, 3.0)
        sb = fallback.siegel_escape(math.cos(t), math.sin(t), xs, ys, 200, 3.0)
        assert np.array_equal(sa, sb)

    def test_classify_bitwise_equal_including_puncture(self):
        xs = pixel_centers(-0.3, 0.3, 33)
        ys = pixel_centers(-0.3, 0.3, 33)
        # append an exact zero row to exercise the lam = 0 branch
        xs = np.concatenate(([0.0], xs))
        ys = np.concatenate(([0.0], ys))
        lre = np.broadcast_to(xs, (ys.size, xs.size)).copy()
        lim = np.broadcast_to(ys[:, None], (ys.size, xs.size)).copy()
        z0re, z0im, Rs, rhos = seed_arrays(3, lre, lim)
        ca, ea = compiled.mcmullen_classify(3, lre, lim, z0re, z0im, Rs, rhos, 400)
        cb, eb = fallback.mcmullen_classify(3, lre, lim, z0re, z0im, Rs, rhos, 400)
        assert np.array_equal(ca, cb)
        assert np.array_equal(ea, eb)
        assert ca[0, 0] == -2  # the puncture is Undetermined

    def test_classify_matches_scalar_state_machine(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(-0.4, 0.4, size=(40, 2))
        lre = pts[:, 0].reshape(8, 5).copy()
        lim = pts[:, 1].reshape(8, 5).copy()
        z0re, z0im, Rs, rhos = seed_arrays(3, lre, lim)
        codes, esc = compiled.mcmullen_classify(3, lre, lim, z0re, z0im,
                                                Rs, rhos, 300)
        for r in range(8):
            for c in range(5):
                code, e, _, _ = classify_code(3, lre[r, c], lim[r, c], 300)
                assert codes[r, c] == code
                assert esc[r, c] == (e if e >= 0 else -1)


class TestFields:
    def test_thread_count_never_changes_output(self):
        fam = McMullen(3, 1 + 0j)
        vp = (-2.0, -2.0, 2.0, 2.0)
        one = escape_field(fam, vp, 96, 96, 80, threads=1)
        four = escape_field(fam, vp, 96, 96, 80, threads=4)
        assert np.array_equal(one, four)
        c1, e1 = classification_field(3, (-0.3, -0.3, 0.3, 0.3), 48, 48, 200,
                                      threads=1)
        c4, e4 = classification_field(3, (-0.3, -0.3, 0.3, 0.3), 48, 48, 200,
                                      threads=4)
        assert np.array_equal(c1, c4)
        assert np.array_equal(e1, e4)

    def test_viewport_from_center(self):
        vp = viewport_from_center(0.5, -0.25, 2.0, 256, 256)
        assert vp == (-0.5, -1.25, 1.5, 0.75)

    def test_escape_field_outside_radius_is_zero(self):
        esc = escape_field(McMullen(3, 1 + 0j), (10.0, 10.0, 14.0, 14.0),
                           16, 16, 50)
        assert (esc == 0).all()

    def test_quadratic_interior_never_escapes(self):
        esc = escape_field(Quadratic(0j), (-0.4, -0.4, 0.4, 0.4), 32, 32, 200)
        assert (esc == -1).all()

    def test_siegel_field_runs(self):
        esc = escape_field(SiegelQuadratic(0.61803398875),
                           (-2.0, -2.0, 2.0, 2.0), 32, 32, 100)
        assert (esc >= -1).all()

    def test_rotation_by_pi_over_n_preserves_escape_indices(self):
        n, size = 3, 256
        esc = escape_field(McMullen(n, 1 + 0j), (-2.0, -2.0, 2.0, 2.0),
                           size, size, 100)
        xs = pixel_centers(-2.0, 2.0, size)
        ys = pixel_centers(-2.0, 2.0, size)
        X, Y = np.meshgrid(xs, ys)
        c, s = math.cos(math.pi / n), math.sin(math.pi / n)
        Xr, Yr = c * X - s * Y, s * X + c * Y
        px = 4.0 / size
        ix = np.round((Xr + 2.0) / px - 0.5).astype(int)
        iy = np.round((Yr + 2.0) / px - 0.5).astype(int)
        inside = (ix >= 0) & (ix < size) & (iy >= 0) & (iy < size)
        agree = esc[iy[inside], ix[inside]] == esc[inside]
        assert agree.mean() > 0.98

    def test_conjugate_parameter_grid_mirrors_codes(self):
        vp = (-0.3, -0.2, 0.3, 0.4)
        codes, esc = classification_field(3, vp, 64, 64, 300)
        vp_conj = (-0.3, -0.4, 0.3, 0.2)
        codes_c, esc_c = classification_field(3, vp_conj, 64, 64, 300)
        assert np.array_equal(codes_c, codes[::-1])
        assert np.array_equal(esc_c, esc[::-1])


class TestSurvey:
    def test_histogram_totals(self):
        res = run_survey((-0.3, -0.3, 0.3, 0.3), 32, 32, 3, 200)
        h = res.histogram
        total = (h["Cantor"] + h["CantorCircles"] + h["NonEscaping"]
                 + h["Undetermined"] + sum(h["Carpet"].values()))
        assert total == 32 * 32

    def test_cell_center_matches_grid(self):
        res = run_survey((-0.3, -0.3, 0.3, 0.3), 8, 8, 3, 100)
        lam = cell_center((-0.3, -0.3, 0.3, 0.3), res.grid, 3, 5)
        code, _, _, _ = classify_code(3, lam.real, lam.imag, 100)
        assert code == res.codes[5, 3]

    def test_far_region_all_cantor(self):
        res = run_survey((1000.0, 1000.0, 1001.0, 1001.0), 8, 8, 3, 100)
        assert res.histogram["Cantor"] == 64

    def test_puncture_cell_warns(self):
        res = run_survey((-0.1, -0.1, 0.1, 0.1), 5, 5, 3, 100)
        assert res.codes[2, 2] == -2
        assert res.warnings

    def test_histogram_of_codes_shape(self):
        codes = np.array([[0, 2], [-1, -2], [3, 7]], dtype=np.int32)
        h = histogram_of_codes(codes)
        assert h == {"Cantor": 1, "CantorCircles": 1,
                     "Carpet": {"3": 1, "7": 1},
                     "NonEscaping": 1, "Undetermined": 1}
