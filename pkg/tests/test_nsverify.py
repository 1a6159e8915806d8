from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from hypns.errors import InadmissibleProfileError, VariantError
from hypns.geometry import ChartPoint, HyperbolicModel
from hypns.harmonic import FourierBoundaryData, extend
from hypns.nsverify import (
    CERTIFICATE_KEYS,
    CustomProfile,
    ExponentialProfile,
    SolutionFamily,
    Variant,
    default_grid,
    dissipation,
    dissipation_identity_check,
    divergence_residual,
    energy,
    energy_inequality_report,
    l1_gradnorm_report,
    liouville_example,
    mns_residual,
    nonuniqueness_certificate,
    ns_residual,
    pressure,
    residual_norm,
    residual_sample,
    sample_points,
    simpson,
    velocity,
)
from hypns.tensorcalc import grad_norm_sq

E1, E2 = math.exp(-1), math.exp(-2)


@pytest.fixture(scope="module")
def grid1(disk1):
    return default_grid(disk1)


@pytest.fixture(scope="module")
def fam2(F_disk):
    return SolutionFamily(F_disk, ExponentialProfile(2.0))


class TestProfiles:
    def test_exponential(self):
        p = ExponentialProfile(2.0)
        assert p.psi(1.0) == pytest.approx(E1, rel=1e-15)
        assert p.dpsi(1.0) == pytest.approx(-E1, rel=1e-15)
        assert p.integral_psi_sq(1.0) == pytest.approx((1 - E2) / 2, rel=1e-14)
        assert simpson(lambda s: np.exp(-2 * s), 0, 1) == pytest.approx((1 - E2) / 2, rel=1e-8)

    def test_admissible_exact(self):
        assert ExponentialProfile(2.0).admissible(1.0)
        assert not ExponentialProfile(1.9999999999999998).admissible(1.0)
        assert ExponentialProfile(4.5).admissible(1.5)
        # the comparison is exact in the binary values, not in rounded floats
        assert ExponentialProfile(2 * 0.1 ** 2).admissible(0.1) == (
            Fraction(2 * 0.1 ** 2) >= 2 * Fraction(0.1) ** 2)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ExponentialProfile(0.0)

    def test_custom_simpson(self):
        p = CustomProfile.sine()
        assert p.integral_psi_sq(math.pi) == pytest.approx(math.pi / 2, abs=1e-8)
        assert p.sup_abs(2 * math.pi) == pytest.approx(1.0, abs=1e-6)

    def test_tabulated(self):
        t = np.linspace(0, 1, 101)
        p = CustomProfile.tabulated(t, 1 - t, -np.ones_like(t))
        assert p.integral_psi_sq(1.0) == pytest.approx(1 / 3, abs=1e-6)


class TestFamily:
    def test_full_needs_constant_curvature(self, F_warped):
        with pytest.raises(VariantError):
            SolutionFamily(F_warped, ExponentialProfile(4.5), Variant.FULL)

    def test_modified_needs_pinching(self, mixed_phi):
        m = HyperbolicModel.warped(1.0, 2.5, check_curvature=False)
        F = extend(FourierBoundaryData.cos(), m)
        with pytest.raises(VariantError, match="b/2 < a"):
            SolutionFamily(F, ExponentialProfile(20.0), Variant.MODIFIED)
        SolutionFamily(F, ExponentialProfile(20.0), Variant.MODIFIED, allow_unpinched=True)

    def test_velocity(self, fam2, F_disk):
        x = np.array([[0.2, -0.3]])
        assert np.array_equal(velocity(fam2, 0.0, x), F_disk.gradient(x))
        assert np.allclose(velocity(fam2, 1.0, x), E1 * F_disk.gradient(x), rtol=1e-15)

    def test_constant_field_velocity(self, disk1):
        fam = SolutionFamily(extend(FourierBoundaryData.constant(2.0), disk1), ExponentialProfile(2.0))
        assert np.all(velocity(fam, 0.7, np.array([[0.1, 0.1]])) == 0)

    def test_pressure_constant_field(self, disk1):
        c = 2.0
        fam = SolutionFamily(extend(FourierBoundaryData.constant(c), disk1), ExponentialProfile(2.0))
        t = 0.5
        psi, dpsi = math.exp(-t), -math.exp(-t)
        # full variant: -psi' c + 2 K psi c with K = -1
        assert pressure(fam, t, np.array([0.3, 0.0])) == pytest.approx(-dpsi * c - 2 * psi * c, rel=1e-14)

    def test_pressure_origin_gradient_term(self, disk1, cos_phi):
        fam = SolutionFamily(extend(cos_phi, disk1), ExponentialProfile(2.0))
        x = np.zeros(2)
        assert grad_norm_sq(fam.F, x) == pytest.approx(0.25)
        assert pressure(fam, 0.0, x) == pytest.approx(-0.125, abs=1e-15)  # F(0) = 0

    def test_modified_pressure_drops_term(self, F_disk):
        full = SolutionFamily(F_disk, ExponentialProfile(2.0))
        mod = SolutionFamily(F_disk, ExponentialProfile(2.0), Variant.MODIFIED)
        x = np.array([0.4, 0.1])
        diff = pressure(full, 0.3, x) - pressure(mod, 0.3, x)
        assert diff == pytest.approx(-2 * math.exp(-0.3) * F_disk.value(x), rel=1e-13)


class TestResiduals:
    def test_ns_residual_small(self, fam2):
        s = residual_sample(fam2, 200, 2.0, 5.0, seed=1)
        assert s.residual_max < 1e-6 and s.divergence_max < 1e-8

    def test_wrong_pressure_leaves_ricci_term(self, F_disk, disk1, rng):
        fam = SolutionFamily(F_disk, ExponentialProfile(2.0), ricci_pressure_factor=0.0)
        x = sample_points(disk1, 5.0, 50, rng)
        t = 0.8
        r = residual_norm(disk1, x, ns_residual(fam, t, x))
        expected = 2 * math.exp(-t) * np.sqrt(grad_norm_sq(F_disk, x))
        assert np.allclose(r, expected, rtol=1e-8)

    def test_printed_sign_doubles_error(self, F_disk, disk1, rng):
        fam = SolutionFamily(F_disk, ExponentialProfile(2.0))
        x = sample_points(disk1, 5.0, 20, rng)
        r = residual_norm(disk1, x, ns_residual(fam, 0.0, x, ricci_pressure_factor=-1.0))
        assert np.allclose(r, 4 * np.sqrt(grad_norm_sq(F_disk, x)), rtol=1e-8)

    def test_constant_field_zero_residual(self, disk1):
        fam = SolutionFamily(extend(FourierBoundaryData.constant(3.0), disk1), ExponentialProfile(2.0))
        x = np.array([[0.1, 0.2], [0.5, -0.5]])
        assert np.all(ns_residual(fam, 1.0, x) == 0)
        mod = SolutionFamily(fam.F, fam.profile, Variant.MODIFIED)
        assert np.all(mns_residual(mod, 1.0, x) == 0)

    def test_mns_disk(self, F_disk):
        s = residual_sample(SolutionFamily(F_disk, ExponentialProfile(2.0), Variant.MODIFIED), 200)
        assert s.residual_max < 1e-6

    def test_mns_warped(self, F_warped):
        s = residual_sample(SolutionFamily(F_warped, ExponentialProfile(4.5), Variant.MODIFIED), 200)
        assert s.residual_max < 1e-4 and s.divergence_max < 1e-5

    def test_variant_guards(self, F_disk, F_warped):
        with pytest.raises(VariantError):
            mns_residual(SolutionFamily(F_disk, ExponentialProfile(2.0)), 0.0, np.zeros((1, 2)))
        with pytest.raises(VariantError):
            ns_residual(SolutionFamily(F_warped, ExponentialProfile(4.5), Variant.MODIFIED), 0.0, np.ones((1, 2)))

    def test_divergence_scales_with_psi(self, F_warped):
        fam = SolutionFamily(F_warped, ExponentialProfile(4.5), Variant.MODIFIED)
        x = np.array([[2.0, 0.4]])
        d0, d1 = divergence_residual(fam, 0.0, x), divergence_residual(fam, 1.0, x)
        assert abs(d1[0]) == pytest.approx(math.exp(-2.25) * abs(d0[0]), rel=1e-12)

    @pytest.mark.parametrize("s", [0.1, 1.0, 10.0])
    def test_residual_under_scaling(self, disk1, mixed_phi, s):
        fam = SolutionFamily(extend(mixed_phi.scaled(s), disk1), ExponentialProfile(3.0))
        res = residual_sample(fam, 100)
        assert res.residual_max < 1e-6 * max(1.0, s * s)

    def test_convection_part_scales_quadratically(self, disk1, mixed_phi):
        from hypns.tensorcalc import convection

        x = np.array([[0.3, 0.2]])
        c1 = convection(extend(mixed_phi, disk1), x)
        c3 = convection(extend(mixed_phi.scaled(3.0), disk1), x)
        assert np.allclose(c3, 9 * c1, rtol=1e-13)

    def test_chartpoint_input(self, fam2, disk1):
        r = ns_residual(fam2, 0.5, ChartPoint((0.2, 0.1), disk1))
        assert np.all(np.abs(r) < 1e-12)


class TestIntegrals:
    def test_energy_pi(self, fam2, grid1):
        assert energy(fam2, 0.0, grid1).value == pytest.approx(math.pi, rel=5e-3)

    def test_energy_factorisation(self, fam2, grid1):
        e0 = energy(fam2, 0.0, grid1).value
        assert energy(fam2, 1.0, grid1).value / e0 == pytest.approx(E2, rel=1e-12)
        assert energy(fam2, 1.0, grid1).value == pytest.approx(E2 * math.pi, rel=5e-3)

    def test_energy_constant(self, disk1, grid1):
        fam = SolutionFamily(extend(FourierBoundaryData.constant(1.0), disk1), ExponentialProfile(2.0))
        assert energy(fam, 0.0, grid1).value == 0.0
        assert dissipation(fam, 0.0, grid1).value == 0.0

    def test_tail_is_reported(self, fam2, grid1):
        e = energy(fam2, 0.0, grid1)
        assert 0 < e.tail < 1e-2
        assert math.pi - e.value <= e.tail

    def test_dissipation_full_pi(self, fam2, grid1):
        assert dissipation(fam2, 0.0, grid1, "FullGradient").value == pytest.approx(math.pi, rel=1e-2)

    def test_def_le_full(self, fam2, grid1):
        for t in (0.0, 0.5, 2.0):
            assert dissipation(fam2, t, grid1, "Def").value <= dissipation(fam2, t, grid1, "FullGradient").value * (1 + 1e-12)

    def test_bad_which(self, fam2, grid1):
        with pytest.raises(ValueError):
            dissipation(fam2, 0.0, grid1, "nope")

    def test_rotation_invariance(self, disk1, mixed_phi, grid1):
        a = SolutionFamily(extend(mixed_phi, disk1), ExponentialProfile(2.0))
        b = SolutionFamily(extend(mixed_phi.rotated(0.9), disk1), ExponentialProfile(2.0))
        for fn in (energy, dissipation):
            assert fn(a, 0.3, grid1).value == pytest.approx(fn(b, 0.3, grid1).value, rel=1e-10)


class TestIdentity:
    def test_a1(self, F_disk, grid1):
        r = dissipation_identity_check(F_disk, grid1)
        assert r.relative_gap < 0.01
        assert r.lhs == pytest.approx(math.pi, rel=0.01) and r.rhs == pytest.approx(math.pi, rel=0.01)

    def test_a2(self, disk2, cos_phi):
        r = dissipation_identity_check(extend(cos_phi, disk2))
        assert r.relative_gap < 0.01
        assert r.rhs == pytest.approx(4 * math.pi, rel=0.01)

    def test_cos2(self, disk1, grid1):
        assert dissipation_identity_check(extend(FourierBoundaryData.cos(2), disk1), grid1).passed

    def test_warped_rejected(self, F_warped):
        with pytest.raises(VariantError):
            dissipation_identity_check(F_warped)


class TestEnergyInequality:
    T = np.linspace(0.0, 2.0, 9)

    def test_sharp_case(self, fam2, grid1):
        r = energy_inequality_report(fam2, self.T, grid1)
        assert r.passed and r.admissible
        assert np.allclose(r.ratios(), 1.0, atol=0.01)

    def test_strict_case(self, F_disk, grid1):
        r = energy_inequality_report(SolutionFamily(F_disk, ExponentialProfile(4.0)), self.T, grid1)
        assert r.passed
        ratios = r.ratios()
        assert np.all(ratios[1:] < 1) and np.all(np.diff(ratios) < 0)

    def test_below_threshold(self, F_disk, grid1):
        r = energy_inequality_report(SolutionFamily(F_disk, ExponentialProfile(1.0)), self.T, grid1)
        assert not r.admissible and not r.passed
        assert r.ratios()[-1] > 1
        # Def dissipation equals the full one for gradients, so it fails as well
        assert not r.passed_def

    def test_closed_form_algebra(self, F_disk, grid1):
        A = 4.0
        r = energy_inequality_report(SolutionFamily(F_disk, ExponentialProfile(A)), [1.0], grid1)
        k = r.kappa_full
        expected = math.exp(-A) + 2 * k * (1 - math.exp(-A)) / A
        assert r.rows[0].ratio == pytest.approx(expected, rel=1e-14)

    def test_needs_exponential(self, F_disk, grid1):
        with pytest.raises(VariantError):
            energy_inequality_report(SolutionFamily(F_disk, CustomProfile.sine()), self.T, grid1)


class TestCertificate:
    def test_gap(self, disk1, cos_phi, grid1):
        c = nonuniqueness_certificate(cos_phi, disk1, 2.0, 4.0, grid1, 1.0)
        assert set(CERTIFICATE_KEYS) <= set(c)
        assert c["gap"] == pytest.approx((E1 - E2) ** 2 * math.pi, rel=0.01)
        assert c["certified"] and c["u0_shared"] and c["energy_pass"]

    def test_t0(self, disk1, cos_phi, grid1):
        c = nonuniqueness_certificate(cos_phi, disk1, 2.0, 4.0, grid1, 0.0)
        assert c["gap"] == 0.0 and c["declined"]

    def test_equal_rates(self, disk1, cos_phi, grid1):
        c = nonuniqueness_certificate(cos_phi, disk1, 3.0, 3.0, grid1, 1.0)
        assert c["gap"] == 0.0 and c["declined"] and not c["certified"]

    def test_inadmissible(self, disk1, cos_phi, grid1):
        with pytest.raises(InadmissibleProfileError):
            nonuniqueness_certificate(cos_phi, disk1, 1.0, 4.0, grid1)

    def test_reproducible(self, disk1, cos_phi, grid1):
        a = nonuniqueness_certificate(cos_phi, disk1, 2.0, 4.0, grid1, 1.0, seed=7)
        b = nonuniqueness_certificate(cos_phi, disk1, 2.0, 4.0, grid1, 1.0, seed=7)
        assert a == b

    def test_rotation(self, disk1, mixed_phi, grid1):
        a = nonuniqueness_certificate(mixed_phi, disk1, 2.0, 4.0, grid1, 1.0)
        b = nonuniqueness_certificate(mixed_phi.rotated(2.0), disk1, 2.0, 4.0, grid1, 1.0)
        assert a["gap"] == pytest.approx(b["gap"], rel=1e-10)

    def test_warped(self, warped_default, mixed_phi):
        c = nonuniqueness_certificate(mixed_phi, warped_default, 4.5, 6.0, None, 1.0, n_samples=50)
        assert c["variant"] == "modified" and c["certified"]


class TestLiouville:
    def test_steady(self, disk1, cos_phi):
        r = liouville_example(cos_phi, disk1)
        assert r["passed"] and r["nonconstant"] and r["residual_max"] < 1e-6

    def test_periodic(self, disk1, cos_phi):
        r = liouville_example(cos_phi, disk1, CustomProfile.sine())
        assert r["passed"] and r["residual_max"] < 1e-6

    def test_constant_declined(self, disk1):
        r = liouville_example(FourierBoundaryData.constant(1.0), disk1)
        assert r["declined"] and not r["passed"]


class TestL1:
    def test_disk_limit(self, F_disk):
        r = l1_gradnorm_report(F_disk)
        assert r.passed and all(q < 0.5 for q in r.ratios)
        assert r.limit == pytest.approx(4 * math.pi / 3, rel=0.01)

    def test_constant(self, disk1):
        r = l1_gradnorm_report(extend(FourierBoundaryData.constant(1.0), disk1))
        assert r.limit == 0.0

    def test_warped(self, F_warped):
        r = l1_gradnorm_report(F_warped)
        assert r.pinched and r.passed and math.isfinite(r.limit)

    def test_unpinched_flagged(self):
        m = HyperbolicModel.warped(1.0, 2.5, check_curvature=False)
        r = l1_gradnorm_report(extend(FourierBoundaryData.cos(), m), n_rho=64, n_theta=16)
        assert not r.pinched and not r.passed
