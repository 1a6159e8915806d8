"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test prints a single ``PASS``/``FAIL`` line (visible with ``-s``); the
test name itself is the line shown by ``pytest -v``.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from hypns.geometry import HyperbolicModel
from hypns.harmonic import FourierBoundaryData, decay_bound_check, decay_exponent, extend
from hypns.hypcover import AnnulusSpec, CoverSpec, chord_bounds_check, chord_sweep, jacobi_bounds_check, verify_cover
from hypns.nsverify import (
    ExponentialProfile,
    SolutionFamily,
    default_grid,
    dissipation,
    dissipation_identity_check,
    energy_inequality_report,
    l1_gradnorm_report,
    liouville_example,
    nonuniqueness_certificate,
    residual_sample,
)
from hypns.tensorcalc import (
    PolynomialOneForm,
    bochner_residual,
    central_jacobian,
    convection,
    covariant_derivative,
    deformation,
    grad_norm_sq,
    half_d_grad_norm_sq,
    tensor_inner,
)

COS = FourierBoundaryData.cos()
DISK = HyperbolicModel.disk(1.0)


def verdict(n: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def F1():
    return extend(COS, DISK)


@pytest.fixture(scope="module")
def grid():
    return default_grid(DISK, 12.0)


def test_criterion_01_ns_residual(F1):
    start = time.perf_counter()
    worst = 0.0
    for A in (2.0, 4.0):
        s = residual_sample(SolutionFamily(F1, ExponentialProfile(A)), 200, 2.0, 5.0, seed=0)
        worst = max(worst, s.residual_max)
    elapsed = time.perf_counter() - start
    verdict(1, worst < 1e-6 and elapsed < 10.0, f"max residual {worst:.3e}, runtime {elapsed:.2f}s")


def test_criterion_02_divergence(F1):
    worst = max(residual_sample(SolutionFamily(F1, ExponentialProfile(A)), 200, 2.0, 5.0, seed=0).divergence_max
                for A in (2.0, 4.0))
    verdict(2, worst < 1e-8, f"max |d*U| {worst:.3e}")


def test_criterion_03_convection_identity(F1):
    rng = np.random.default_rng(3)
    x = DISK.from_polar(rng.uniform(0.0, 5.0, 100), rng.uniform(0, 2 * np.pi, 100))
    disk_dev = float(np.max(np.abs(convection(F1, x) - half_d_grad_norm_sq(F1, x))))
    wm = HyperbolicModel.warped(1.0, 1.5)
    Fw = extend(FourierBoundaryData.parse_inline("1:1:0.3,2:-0.5:0.2"), wm)
    y = wm.from_polar(rng.uniform(0.2, 5.0, 100), rng.uniform(0, 2 * np.pi, 100))
    fd = 0.5 * central_jacobian(lambda z: grad_norm_sq(Fw, z), y, 1e-4 * wm.fd_scale(y))
    warp_dev = float(np.max(np.abs(convection(Fw, y) - fd)))
    verdict(3, disk_dev < 1e-6 and warp_dev < 1e-4, f"disk {disk_dev:.3e}, warped {warp_dev:.3e}")


def test_criterion_04_dissipation_identity(F1, grid):
    r = dissipation_identity_check(F1, grid)
    r2 = dissipation_identity_check(extend(COS, HyperbolicModel.disk(2.0)))
    ok = (r.relative_gap < 0.01 and r2.relative_gap < 0.01
          and abs(r.lhs - math.pi) < 0.01 * math.pi and abs(r.rhs - math.pi) < 0.01 * math.pi)
    verdict(4, ok, f"lhs {r.lhs:.6f} rhs {r.rhs:.6f} gap {r.relative_gap:.2e}; a=2 gap {r2.relative_gap:.2e}")


def test_criterion_05_energy_inequality(F1, grid):
    t = np.linspace(0.0, 2.0, 9)
    sharp = energy_inequality_report(SolutionFamily(F1, ExponentialProfile(2.0)), t, grid)
    strict = energy_inequality_report(SolutionFamily(F1, ExponentialProfile(4.0)), t, grid)
    low = energy_inequality_report(SolutionFamily(F1, ExponentialProfile(1.0)), t, grid)
    ok = (sharp.passed and np.all(np.abs(sharp.ratios() - 1) < 0.01)
          and strict.passed and np.all(strict.ratios()[1:] < 1)
          and not low.passed)
    verdict(5, ok, f"A=2 max|ratio-1| {np.max(np.abs(sharp.ratios() - 1)):.2e}, "
                   f"A=4 max ratio {strict.ratios()[1:].max():.4f}, A=1 passed={low.passed}")


def test_criterion_06_nonuniqueness_gap(grid):
    c = nonuniqueness_certificate(COS, DISK, 2.0, 4.0, grid, 1.0, n_samples=200, t_max=2.0, rho_sample=5.0)
    exact = (math.exp(-1) - math.exp(-2)) ** 2 * math.pi
    rel = abs(c["gap"] - exact) / exact
    ok = rel < 0.01 and c["u0_shared"] and c["residual_max"] < 1e-6 and c["divergence_max"] < 1e-8
    verdict(6, ok, f"gap {c['gap']:.6f} vs {exact:.6f} (rel {rel:.2e}), u0 shared={c['u0_shared']}")


def test_criterion_07_gradient_decay():
    parts, ok = [], True
    for a in (1.0, 2.0):
        F = extend(COS, HyperbolicModel.disk(a))
        fit = decay_exponent(F, 0.3, (3.0 / a, 8.0 / a))
        bound = decay_bound_check(F, 0.9 * a)
        ok &= abs(fit.delta_hat - a) < 0.05 * a and bound.passed
        parts.append(f"a={a:g}: delta_hat {fit.delta_hat:.4f}, C {bound.C_measured:.4f}")
    verdict(7, ok, "; ".join(parts))


def test_criterion_08_l1_finiteness(F1):
    r = l1_gradnorm_report(F1)
    rel = abs(r.limit - 4 * math.pi / 3) / (4 * math.pi / 3)
    ok = all(q < 0.5 for q in r.ratios) and rel < 0.01
    verdict(8, ok, f"limit {r.limit:.6f} (rel {rel:.2e}), ratios {[round(q, 4) for q in r.ratios]}")


def test_criterion_09_covering():
    fractions = {}
    for R in (6.0, 8.0, 10.0):
        fractions[R] = verify_cover(CoverSpec(R, 1.0), AnnulusSpec(R, DISK), 10_000).covered_fraction
    halved = verify_cover(CoverSpec(10.0, 1.0, thinning=2), AnnulusSpec(10.0, DISK), 10_000)
    ok = all(f == 1.0 for f in fractions.values()) and halved.covered_fraction < 1.0
    verdict(9, ok, f"full N fractions {fractions}; halved-N control at R=10 covered_fraction "
                   f"{halved.covered_fraction} (worst excess {halved.worst_excess:.3f})")


def test_criterion_10_chord_bounds():
    r = chord_bounds_check(10.0, 0.1)
    sweep = chord_sweep()
    ok = r.passed and abs(r.d_exact - 14.008) < 1e-3 and sweep.R0_measured is not None
    verdict(10, ok, f"d {r.d_exact:.4f} in [{r.lower:.4f}, {r.upper:.4f}], R0 {sweep.R0_measured}")


def test_criterion_11_jacobi_bounds():
    const = jacobi_bounds_check(HyperbolicModel.warped(1.0, 1.0, "constant"))
    default = jacobi_bounds_check(HyperbolicModel.warped(1.0, 1.5))
    flat = jacobi_bounds_check(HyperbolicModel.warped(1.0, 1.5, "flat", check_curvature=False))
    ok = (abs(const.lower_margin) < 1e-10 and abs(const.upper_margin) < 1e-10
          and default.passed and default.min_margin > 0 and not flat.passed)
    verdict(11, ok, f"constant margins {const.lower_margin:.1e}/{const.upper_margin:.1e}, "
                    f"default min {default.min_margin:.2e}, flat passed={flat.passed}")


def test_criterion_12_deformation_bound():
    rng = np.random.default_rng(12)
    worst = math.inf
    for _ in range(10):
        w = PolynomialOneForm.random(DISK, rng, degree=3)
        rho = rng.uniform(0.0, 5.0, 100)
        x = DISK.from_polar(rho, rng.uniform(0, 2 * np.pi, 100))
        slack = tensor_inner(DISK, x, covariant_derivative(w, x)) - tensor_inner(DISK, x, deformation(w, x))
        worst = min(worst, float(slack.min()))
    verdict(12, worst >= -1e-12, f"min slack over 1000 pairs {worst:.3e}")


def test_criterion_13_bochner(F1):
    rng = np.random.default_rng(13)
    x = DISK.from_polar(rng.uniform(0.0, 5.0, 100), rng.uniform(0, 2 * np.pi, 100))
    worst = float(np.max(np.abs(bochner_residual(F1, x))))
    verdict(13, worst < 1e-4, f"max residual {worst:.3e}")


def test_criterion_14_liouville_witness():
    r = liouville_example(COS, DISK)
    ok = r["passed"] and r["nonconstant"] and r["bounded"] and not r["declined"]
    verdict(14, ok, f"residual {r['residual_max']:.3e}, nonconstant={r['nonconstant']}, bounded={r['bounded']}")
