import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra import numpy as npst

from carpetlab.carpet import carpet_counts, rasterize_carpet, standard_carpet
from carpetlab.dynamics import McMullen, Quadratic
from carpetlab.fields import area_schedule, escape_field, non_escaping_raster
from carpetlab.metrics import (BoxCountSeries, DegenerateWindowError,
                               EmptySetError, boundary_disjointness,
                               box_counts, complement_components,
                               estimate_area, fit_dimension, whyburn_profile)
from carpetlab.raster import Raster


def full_raster(n):
    return Raster(occupancy=np.ones((n, n), dtype=bool))


def line_raster(n):
    occ = np.zeros((n, n), dtype=bool)
    occ[n // 2, :] = True
    return Raster(occupancy=occ)


class TestBoxCounts:
    def test_full_square_counts(self):
        series = box_counts(full_raster(64))
        for b, n in zip(series.box_pixels, series.counts):
            assert n == (64 // b) ** 2

    def test_line_counts(self):
        series = box_counts(line_raster(64))
        for b, n in zip(series.box_pixels, series.counts):
            assert n == 64 // b

    def test_empty_raster_rejected(self):
        with pytest.raises(EmptySetError):
            box_counts(Raster(occupancy=np.zeros((8, 8), dtype=bool)))

    def test_padding_to_power_of_two(self):
        occ = np.ones((6, 6), dtype=bool)
        series = box_counts(Raster(occupancy=occ))
        assert series.padded_side == 8

    def test_middle_ninths_729_pads_to_1024_and_fits(self):
        raster = standard_carpet(5, 729)
        series = box_counts(raster)
        assert series.padded_side == 1024
        fit = fit_dimension(series)
        assert abs(fit.slope - math.log(8) / math.log(3)) < 0.06

    @given(npst.arrays(bool, (32, 32)))
    @settings(max_examples=60)
    def test_monotone_and_quadrupling_bounds(self, occ):
        if not occ.any():
            return
        series = box_counts(Raster(occupancy=occ))
        counts = series.counts
        assert all(a <= b for a, b in zip(counts, counts[1:]))
        assert all(b <= 4 * a for a, b in zip(counts, counts[1:]))
        scales = series.scales
        assert all(a > b for a, b in zip(scales, scales[1:]))

    def test_agrees_with_direct_box_enumeration_on_carpets(self):
        # independent oracle: per-box pixel scan, no reshape tricks
        for m in (1, 2, 3):
            raster = rasterize_carpet(3, m, 128)
            series = box_counts(raster)
            occ = np.zeros((series.padded_side, series.padded_side), dtype=bool)
            occ[:128, :128] = raster.occupancy
            for b, n in zip(series.box_pixels, series.counts):
                count = 0
                for by in range(0, series.padded_side, b):
                    for bx in range(0, series.padded_side, b):
                        hit = False
                        for y in range(by, by + b):
                            if occ[y, bx:bx + b].any():
                                hit = True
                                break
                        count += hit
                assert count == n


class TestFitDimension:
    def _series(self, exponent, levels=8):
        scales = tuple(2.0 ** (-t) for t in range(1, levels + 1))
        counts = tuple(int(round((1 / s) ** exponent)) for s in scales)
        return BoxCountSeries(scales, counts, tuple(1 for _ in scales), 2**levels)

    def test_plane_slope_two(self):
        fit = fit_dimension(self._series(2))
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)

    def test_line_slope_one(self):
        fit = fit_dimension(self._series(1))
        assert fit.slope == pytest.approx(1.0, abs=1e-12)

    def test_default_window_drops_levels(self):
        fit = fit_dimension(self._series(2, levels=10))
        assert fit.scale_window == (1, 8)

    def test_degenerate_window(self):
        with pytest.raises(DegenerateWindowError):
            fit_dimension(self._series(2, levels=4))

    def test_clamp_warning(self):
        scales = (0.5, 0.25, 0.125, 0.0625, 0.03125)
        counts = (1, 8, 64, 512, 4096)  # slope 3: impossible for a plane set
        fit = fit_dimension(BoxCountSeries(scales, counts, (1,) * 5, 32),
                            window=(0, 5))
        assert fit.slope == 2.0
        assert fit.warnings

    def test_calibration_at_resolution_512(self):
        assert fit_dimension(box_counts(full_raster(512))).slope == pytest.approx(2.0, abs=0.02)
        assert fit_dimension(box_counts(line_raster(512))).slope == pytest.approx(1.0, abs=0.02)


class TestEstimateArea:
    def test_quadratic_disk_fraction(self):
        def builder(n_max):
            return non_escaping_raster(Quadratic(0j), (-2, -2, 2, 2), 256, n_max)

        fractions = estimate_area(builder, [30, 60])
        for _, frac in fractions:
            assert frac == pytest.approx(math.pi / 16, abs=0.01)
        assert fractions[0][1] >= fractions[1][1]

    def test_matches_single_field_shortcut(self):
        fam = McMullen(3, 1e-8 + 0j)
        viewport = (-2.0, -2.0, 2.0, 2.0)

        def builder(n_max):
            return non_escaping_raster(fam, viewport, 128, n_max)

        direct = estimate_area(builder, [5, 10, 20])
        shortcut = area_schedule(fam, viewport, 128, [5, 10, 20])
        assert direct == shortcut

    def test_all_escaping_far_viewport(self):
        fractions = area_schedule(McMullen(3, 1 + 0j), (10, 10, 14, 14), 64, [50, 100])
        assert all(f == 0.0 for _, f in fractions)

    def test_tiny_lambda_positive_and_nonincreasing(self):
        fractions = area_schedule(McMullen(3, 1e-8 + 0j), (-2, -2, 2, 2), 256,
                                  [5, 10, 20])
        values = [f for _, f in fractions]
        assert all(v > 0 for v in values)
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            estimate_area(lambda n: full_raster(4), [10, 10])
        with pytest.raises(ValueError):
            estimate_area(lambda n: full_raster(4), [])


class TestComplementComponents:
    def test_f1_has_outer_and_center(self):
        profile = complement_components(rasterize_carpet(3, 1, 27))
        assert len(profile.components) == 2
        assert profile.components[0].unbounded
        assert not profile.components[1].unbounded

    def test_f2_has_ten_components(self):
        profile = complement_components(rasterize_carpet(3, 2, 243))
        assert len(profile.components) == 10
        unbounded = [c for c in profile.components if c.unbounded]
        assert len(unbounded) == 1

    def test_component_count_formula(self):
        # components(F_m) = 1 + sum_{i=1..m} b_{i-1}
        for m, res in ((1, 243), (2, 243), (3, 729)):
            expected = 1 + sum(carpet_counts(3, i - 1)[0] for i in range(1, m + 1))
            profile = complement_components(rasterize_carpet(3, m, res))
            assert len(profile.components) == expected

    def test_full_raster_outer_only(self):
        profile = complement_components(full_raster(16))
        assert len(profile.components) == 1
        assert profile.components[0].unbounded

    def test_pixel_accounting(self):
        raster = rasterize_carpet(3, 1, 27)
        profile = complement_components(raster)
        assert profile.total_complement_pixels == sum(
            c.pixel_count for c in profile.components)

    def test_f2_diameter_ordering(self):
        profile = complement_components(rasterize_carpet(3, 2, 243))
        diams = [c.diameter for c in profile.components]
        assert diams == sorted(diams, reverse=True)
        # outer region spans the viewport; center hole diagonal ~ sqrt(2)/3;
        # the 8 second-generation holes have side 7/27
        assert diams[0] > 1.4
        assert diams[1] == pytest.approx(math.sqrt(2) * (1 / 3), abs=0.02)
        for d in diams[2:]:
            assert d == pytest.approx(math.sqrt(2) * (7 / 27), abs=0.02)

    def test_chordal_metric_flag(self):
        raster = Raster(occupancy=rasterize_carpet(3, 1, 27).occupancy,
                        viewport=(0, 0, 1, 1), sphere=True)
        profile = complement_components(raster)
        assert profile.metric == "chordal"
        plane = complement_components(rasterize_carpet(3, 1, 27))
        # inside the unit disk the stereographic factor 2/(1+|z|^2) exceeds 1,
        # so chordal diameters are strictly larger than plane diameters here
        assert profile.components[1].diameter > plane.components[1].diameter


class TestWhyburn:
    def test_f2_epsilon_thresholds(self):
        raster = rasterize_carpet(3, 2, 243)
        profile = complement_components(raster)
        report = whyburn_profile(profile, [0.40, 0.30], raster)
        counts = dict(report.epsilon_counts)
        assert counts[0.40] == 2   # outer + center hole
        assert counts[0.30] == 10  # second-generation holes join
        assert report.carpet_consistent is True

    def test_epsilon_above_sphere_diameter(self):
        raster = Raster(occupancy=rasterize_carpet(3, 1, 27).occupancy,
                        sphere=True)
        profile = complement_components(raster)
        report = whyburn_profile(profile, [2.0])
        assert report.epsilon_counts[0][1] == 0

    def test_epsilon_at_pixel_size_counts_everything(self):
        raster = rasterize_carpet(3, 2, 243)
        profile = complement_components(raster)
        report = whyburn_profile(profile, [raster.pixel_size[0]])
        assert report.epsilon_counts[0][1] == len(profile.components)

    def test_counts_nonincreasing_in_epsilon(self):
        raster = rasterize_carpet(3, 2, 243)
        profile = complement_components(raster)
        report = whyburn_profile(profile, [0.05, 0.1, 0.2, 0.4, 0.8])
        ordered = sorted(report.epsilon_counts)
        counts = [c for _, c in ordered]
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_validation(self):
        raster = rasterize_carpet(3, 1, 27)
        profile = complement_components(raster)
        with pytest.raises(ValueError):
            whyburn_profile(profile, [0.0])


class TestBoundaryDisjointness:
    def test_f1_gap(self):
        raster = rasterize_carpet(3, 1, 81)
        profile = complement_components(raster)
        gap, touching = boundary_disjointness(profile, raster)
        assert not touching
        # outer boundary and hole boundary are a ring of width 1/3 apart
        assert gap >= 1 / 3 - 3 * raster.pixel_size[0]

    def test_checkerboard_touches(self):
        idx = np.indices((16, 16)).sum(axis=0)
        raster = Raster(occupancy=(idx % 2 == 0))
        profile = complement_components(raster)
        gap, touching = boundary_disjointness(profile, raster)
        assert touching

    def test_cantor_circles_render_nested_annuli(self):
        # the tiny-lambda Julia set is an annulus of circles; its slow-escape
        # neighborhood leaves nested complement components with real gaps
        for res in (256, 512):
            esc = escape_field(McMullen(3, 1e-8 + 0j), (-1.6, -1.6, 1.6, 1.6),
                               res, res, 100)
            raster = Raster(occupancy=(esc >= 3), viewport=(-1.6, -1.6, 1.6, 1.6))
            profile = complement_components(raster)
            assert len(profile.components) >= 2
            gap, touching = boundary_disjointness(profile, raster)
            assert not touching
            assert gap > 0.5

    def test_needs_two_components(self):
        raster = full_raster(8)
        profile = complement_components(raster)
        with pytest.raises(ValueError):
            boundary_disjointness(profile, raster)
