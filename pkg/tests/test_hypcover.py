from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypns.errors import CoverRangeError, UnsupportedOperationError
from hypns.geometry import HyperbolicModel, polar_distance
from hypns.hypcover import (
    AnnulusSpec,
    CoverSpec,
    annulus_samples,
    chord_bounds,
    chord_bounds_check,
    chord_length,
    chord_sweep,
    cover_count,
    jacobi_bounds_check,
    measure_cover_threshold,
    nearest_center_distance,
    verify_cover,
)


class TestCount:
    def test_values(self):
        assert cover_count(5.0, 1.0) == 467
        assert cover_count(0.0, 1.0) == 4

    def test_guard(self):
        with pytest.raises(CoverRangeError):
            cover_count(701.0, 1.0)
        assert cover_count(699.0, 1.0) > 0

    def test_bad_args(self):
        with pytest.raises(ValueError):
            cover_count(-1.0, 1.0)
        with pytest.raises(ValueError):
            cover_count(1.0, 0.0)

    @given(st.floats(0, 50), st.floats(0, 5))
    def test_monotone(self, R, dR):
        assert cover_count(R + dR, 1.0) >= cover_count(R, 1.0)

    def test_spec(self):
        s = CoverSpec(6.0, 1.0)
        assert s.radius == 6.0 and s.N == cover_count(6.0, 1.0)
        assert CoverSpec(6.0, 1.0, thinning=2).N == s.N // 2
        assert np.allclose(np.diff(s.angles()), 2 * np.pi / s.N)


class TestCover:
    @pytest.mark.parametrize("R", [6.0, 8.0, 10.0])
    def test_covers(self, disk1, R):
        res = verify_cover(CoverSpec(R, 1.0), AnnulusSpec(R, disk1), 10_000)
        assert res.covered_fraction == 1.0 and res.worst_excess < 0
        assert res.n_samples == 10_000

    def test_samples_in_annulus(self, disk1):
        rho, theta = annulus_samples(AnnulusSpec(6.0, disk1), 5000, seed=3)
        assert rho.size == 5000 and rho.min() >= 5 and rho.max() <= 7
        assert theta.min() >= 0 and theta.max() < 2 * np.pi

    def test_center_sample(self, disk1):
        spec = CoverSpec(6.0, 1.0)
        th = spec.angles()[[0, 5, 17]]
        d = nearest_center_distance(disk1, spec, np.full(3, 6.0), th)
        assert np.all(d < 1e-6)

    def test_brute_force(self, disk1):
        spec = CoverSpec(6.0, 1.0)
        rho, theta = annulus_samples(AnnulusSpec(6.0, disk1), 400, seed=9)
        fast = nearest_center_distance(disk1, spec, rho, theta)
        ang = spec.angles()
        brute = np.min(polar_distance(rho[:, None], theta[:, None], 6.0, ang[None, :], 1.0), axis=1)
        assert np.allclose(fast, brute, atol=1e-10)

    def test_thinned_fails(self, disk1):
        res = verify_cover(CoverSpec(8.0, 1.0, thinning=32), AnnulusSpec(8.0, disk1), 10_000)
        assert res.covered_fraction < 1.0 and res.worst_excess > 0

    def test_threshold(self, disk1):
        assert measure_cover_threshold(disk1, [4.0, 6.0, 8.0], 4000) is not None
        assert measure_cover_threshold(disk1, [8.0, 10.0], 4000, thinning=64) is None

    def test_warped_unsupported(self, warped_default):
        with pytest.raises(UnsupportedOperationError):
            verify_cover(CoverSpec(6.0, 1.5), AnnulusSpec(6.0, warped_default))

    def test_b_mismatch(self, disk1):
        with pytest.raises(ValueError):
            verify_cover(CoverSpec(6.0, 2.0), AnnulusSpec(6.0, disk1))

    def test_csv(self, disk1, tmp_path):
        res = verify_cover(CoverSpec(6.0, 1.0), AnnulusSpec(6.0, disk1), 100)
        p = tmp_path / "cover.csv"
        res.to_csv(p)
        rows = list(csv.reader(open(p)))
        assert rows[0] == ["rho", "theta", "min_center_dist", "covered"] and len(rows) == 101

    def test_deterministic(self, disk1):
        a = verify_cover(CoverSpec(6.0, 1.0), AnnulusSpec(6.0, disk1), 500, seed=4)
        b = verify_cover(CoverSpec(6.0, 1.0), AnnulusSpec(6.0, disk1), 500, seed=4)
        assert np.array_equal(a.samples, b.samples)


class TestChords:
    def test_example(self):
        r = chord_bounds_check(10.0, 0.1)
        assert r.d_exact == pytest.approx(14.0077, abs=1e-4)
        assert r.lower == pytest.approx(13.3948, abs=1e-4) and r.upper == pytest.approx(17.3948, abs=1e-4)
        assert r.passed

    @given(st.floats(0, 30), st.floats(1e-6, math.pi))
    def test_lower_le_upper(self, R, th):
        lo, hi = chord_bounds(R, th, 1.0, 1.0)
        assert lo <= hi

    @given(st.floats(1, 15), st.floats(1e-3, 3.0))
    def test_monotone_in_theta(self, R, th):
        assert chord_length(R, th, 1.0) <= chord_length(R, min(th * 1.05, math.pi), 1.0) + 1e-12

    @pytest.mark.parametrize("th", [0.0, -0.1, 3.2])
    def test_bad_theta(self, th):
        with pytest.raises(ValueError):
            chord_bounds_check(5.0, th)

    def test_unequal_curvature(self):
        with pytest.raises(UnsupportedOperationError):
            chord_bounds_check(5.0, 0.5, 1.0, 1.5)

    def test_antipodal_regime(self):
        # near theta = pi the exact chord is 2R, below the stated lower bound
        r = chord_bounds_check(10.0, math.pi)
        assert r.d_exact == pytest.approx(20.0, abs=1e-9) and not r.passed

    def test_sweep(self):
        s = chord_sweep()
        assert s.R0_measured is not None and s.R0_measured <= 10.0
        assert all(s.passed[s.R_values.index(s.R0_measured):])


class TestJacobi:
    def test_constant_tight(self):
        r = jacobi_bounds_check(HyperbolicModel.warped(1.0, 1.0, "constant"))
        assert r.passed and abs(r.min_margin) < 1e-10

    def test_default(self, warped_default):
        r = jacobi_bounds_check(warped_default)
        assert r.passed and r.min_margin > 0

    def test_flat_fails_lower(self):
        m = HyperbolicModel.warped(1.0, 1.5, "flat", check_curvature=False)
        r = jacobi_bounds_check(m)
        assert not r.lower_ok and r.upper_ok and not r.passed

    def test_disk_unsupported(self, disk1):
        with pytest.raises(UnsupportedOperationError):
            jacobi_bounds_check(disk1)
