"""Explicit gradient solutions ``U = psi(t) dF`` and their verification.

With ``F`` harmonic, the pair

    U(t) = psi(t) dF,
    P(t) = -psi'(t) F - psi(t)^2 |dF|^2 / 2 + 2 K psi(t) F        (full variant)

solves ``dU/dt - Lap U + nabla_U U - 2 Ric(U) + dP = 0`` and ``d* U = 0`` on a
surface of constant curvature ``K = -a^2`` (here ``-Lap`` is the Hodge
Laplacian ``dd* + d*d``). The modified variant drops the Ricci term from the
equation and the ``2 K psi F`` term from the pressure; it works on any of the
supported models.

All spatial integrals are evaluated once per (field, grid) pair; time
dependence enters through closed-form factors of ``psi``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import InadmissibleProfileError, VariantError
from .geometry import ChartPoint, HyperbolicModel, QuadratureGrid, build_polar_grid, integrate, tail_bound
from .harmonic import FourierBoundaryData, HarmonicField, extend
from .tensorcalc import (
    Accuracy,
    ExactForm,
    central_jacobian,
    codifferential,
    codifferential_divergence_form,
    convection,
    covariant_derivative,
    fd_step,
    grad_norm_sq,
    half_d_grad_norm_sq,
    hodge_laplacian_oneform,
    oneform_norm_sq,
    tensor_inner,
)

SIMPSON_TOL = 1e-8


# ---------------------------------------------------------------------------
# time profiles
# ---------------------------------------------------------------------------


class TimeProfile:
    """``psi(t)`` with derivative and ``int_0^t psi^2``."""

    name = "profile"

    def psi(self, t):
        raise NotImplementedError

    def dpsi(self, t):
        raise NotImplementedError

    def integral_psi_sq(self, t: float) -> float:
        return simpson(lambda s: self.psi(s) ** 2, 0.0, float(t))

    def sup_abs(self, t_max: float = 10.0, n: int = 4001) -> float:
        return float(np.max(np.abs(self.psi(np.linspace(0.0, t_max, n)))))

    def describe(self) -> dict:
        return {"kind": self.name}


@dataclass(frozen=True)
class ExponentialProfile(TimeProfile):
    """``psi(t) = exp(-A t / 2)``."""

    A: float
    name = "exponential"

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ValueError(f"A must be positive and finite, got {self.A}")

    def psi(self, t):
        return np.exp(-0.5 * self.A * np.asarray(t, dtype=float))

    def dpsi(self, t):
        return -0.5 * self.A * self.psi(t)

    def integral_psi_sq(self, t: float) -> float:
        return float(-np.expm1(-self.A * t) / self.A)

    def admissible(self, b: float) -> bool:
        """Exact test of ``A >= 2 b^2`` on the binary values of the inputs."""
        return Fraction(self.A) >= 2 * Fraction(b) ** 2

    def describe(self) -> dict:
        return {"kind": self.name, "A": self.A}


@dataclass(frozen=True)
class CustomProfile(TimeProfile):
    """User-supplied ``psi`` and ``psi'`` (e.g. ``sin`` and ``cos``)."""

    psi_fn: Callable
    dpsi_fn: Callable
    label: str = "custom"
    name = "custom"

    @classmethod
    def constant(cls, c: float = 1.0) -> "CustomProfile":
        return cls(lambda t: c + 0.0 * np.asarray(t, dtype=float), lambda t: 0.0 * np.asarray(t, dtype=float),
                   f"constant({c:g})")

    @classmethod
    def sine(cls) -> "CustomProfile":
        return cls(np.sin, np.cos, "sin")

    @classmethod
    def tabulated(cls, t, psi, dpsi) -> "CustomProfile":
        t, psi, dpsi = (np.asarray(v, dtype=float) for v in (t, psi, dpsi))
        return cls(lambda s: np.interp(s, t, psi), lambda s: np.interp(s, t, dpsi), "tabulated")

    def psi(self, t):
        return np.asarray(self.psi_fn(np.asarray(t, dtype=float)), dtype=float)

    def dpsi(self, t):
        return np.asarray(self.dpsi_fn(np.asarray(t, dtype=float)), dtype=float)

    def describe(self) -> dict:
        return {"kind": self.name, "label": self.label}


def simpson(fn, a: float, b: float, tol: float = SIMPSON_TOL, max_panels: int = 1 << 20) -> float:
    """Composite Simpson with panel doubling until successive values agree to ``tol``."""
    if b == a:
        return 0.0
    n = 8
    prev = None
    while n <= max_panels:
        x = np.linspace(a, b, n + 1)
        y = np.asarray(fn(x), dtype=float)
        val = (b - a) / (3 * n) * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return float(val)
        prev, n = val, 2 * n
    return float(prev)


# ---------------------------------------------------------------------------
# solution family
# ---------------------------------------------------------------------------


class Variant(str, Enum):
    FULL = "full"
    MODIFIED = "modified"


@dataclass(eq=False)
class SolutionFamily:
    """``(U, P)`` generated by a harmonic ``F`` and a time profile.

    ``ricci_pressure_factor`` multiplies the ``2 K psi F`` pressure term of
    the full variant. The default ``1`` balances ``-2 Ric(U)``; ``0`` drops the
    term and ``-1`` flips its sign (both leave a residual of size
    ``2 a^2 psi |dF|`` per unit factor error).
    """

    F: HarmonicField
    profile: TimeProfile
    variant: Variant = Variant.FULL
    ricci_pressure_factor: float = 1.0
    allow_unpinched: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.variant = Variant(self.variant)
        m = self.F.model
        if self.variant is Variant.FULL and not m.is_constant_curvature:
            raise VariantError("the full variant needs a constant-curvature model")
        if self.variant is Variant.MODIFIED and not m.is_constant_curvature and not m.pinched and not self.allow_unpinched:
            raise VariantError(f"modified variant on a warped model needs b/2 < a (a={m.a}, b={m.b})")

    @property
    def model(self) -> HyperbolicModel:
        return self.F.model

    @property
    def dF(self) -> ExactForm:
        return ExactForm(self.F)

    def spatial(self, key: str, grid: QuadratureGrid, fn):
        k = (key, id(grid))
        if k not in self._cache:
            self._cache[k] = (fn(), grid)  # keep the grid alive so id() stays unique
        return self._cache[k][0]


def velocity(sol: SolutionFamily, t: float, p):
    """``U(t, p) = psi(t) dF(p)``."""
    return float(sol.profile.psi(t)) * np.asarray(sol.F.gradient(_coords(p)))


def pressure(sol: SolutionFamily, t: float, p, ricci_pressure_factor: float | None = None):
    x = _coords(p)
    psi, dpsi = float(sol.profile.psi(t)), float(sol.profile.dpsi(t))
    F = sol.F.value(x)
    P = -dpsi * F - 0.5 * psi ** 2 * grad_norm_sq(sol.F, x)
    if sol.variant is Variant.FULL:
        fac = sol.ricci_pressure_factor if ricci_pressure_factor is None else ricci_pressure_factor
        P = P + fac * 2.0 * sol.model.gauss_curvature(x) * psi * F
    return P


def _coords(p):
    return p.array if isinstance(p, ChartPoint) else np.asarray(p, dtype=float)


def _half_d_norm(F, x):
    """``(1/2) d|dF|^2``: product rule for analytic fields, FD of ``|dF|^2`` otherwise.

    The FD path is deliberately independent of the Hessian used by the
    convection term.
    """
    if F.accuracy is Accuracy.ANALYTIC:
        return half_d_grad_norm_sq(F, x)
    return 0.5 * central_jacobian(lambda y: grad_norm_sq(F, y), x, fd_step(F.model, x))


def _time_factors(sol, t):
    """``psi, psi'`` shaped to broadcast against 1-form components."""
    psi = np.asarray(sol.profile.psi(t), dtype=float)
    dpsi = np.asarray(sol.profile.dpsi(t), dtype=float)
    return psi[..., None], dpsi[..., None]


def _pressure_gradient(sol, t, x, ricci_pressure_factor=None):
    psi, dpsi = _time_factors(sol, t)
    dF = sol.F.gradient(x)
    dP = -dpsi * dF - psi ** 2 * _half_d_norm(sol.F, x)
    if sol.variant is Variant.FULL:
        fac = sol.ricci_pressure_factor if ricci_pressure_factor is None else ricci_pressure_factor
        # K is constant for the full variant
        dP = dP + fac * 2.0 * sol.model.gauss_curvature(x)[..., None] * psi * dF
    return dP


def _residual_core(sol, t, x, with_ricci, ricci_pressure_factor=None):
    """Residual 1-form; ``t`` may be a scalar or an array matching the points."""
    psi, dpsi = _time_factors(sol, t)
    dF = sol.F.gradient(x)
    r = dpsi * dF
    r = r + psi * hodge_laplacian_oneform(sol.dF, x)
    r = r + psi ** 2 * convection(sol.F, x)
    if with_ricci:
        r = r - 2.0 * sol.model.gauss_curvature(x)[..., None] * psi * dF
    return r + _pressure_gradient(sol, t, x, ricci_pressure_factor)


def ns_residual(sol: SolutionFamily, t: float, p, ricci_pressure_factor: float | None = None):
    """Residual 1-form of the full equation (with ``-2 Ric(U)``)."""
    if sol.variant is not Variant.FULL or not sol.model.is_constant_curvature:
        raise VariantError("ns_residual needs the full variant on a constant-curvature model")
    return _residual_core(sol, t, _coords(p), True, ricci_pressure_factor)


def mns_residual(sol: SolutionFamily, t: float, p):
    """Residual 1-form of the modified equation (no Ricci term)."""
    if sol.variant is not Variant.MODIFIED:
        raise VariantError("mns_residual needs the modified variant")
    return _residual_core(sol, t, _coords(p), False)


def residual(sol: SolutionFamily, t: float, p):
    """Residual of whichever equation matches the family's variant."""
    return ns_residual(sol, t, p) if sol.variant is Variant.FULL else mns_residual(sol, t, p)


def divergence_residual(sol: SolutionFamily, t: float, p):
    """``d* U = psi d* dF``; FD-class fields use the divergence form of ``d*``."""
    x = _coords(p)
    psi = np.asarray(sol.profile.psi(t), dtype=float)
    if sol.F.accuracy is Accuracy.ANALYTIC:
        return psi * codifferential(sol.dF, x)
    return psi * codifferential_divergence_form(sol.dF, x)


def residual_norm(model: HyperbolicModel, x, r) -> np.ndarray:
    return np.sqrt(oneform_norm_sq(model, x, r))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_points(model: HyperbolicModel, rho_max: float, n: int, rng: np.random.Generator,
                  rho_min: float = 0.05) -> np.ndarray:
    """Random chart points with ``rho`` uniform in ``[rho_min, rho_max]``."""
    rho = rng.uniform(rho_min, rho_max, n)
    theta = rng.uniform(0.0, 2 * np.pi, n)
    return model.from_polar(rho, theta)


@dataclass(frozen=True)
class ResidualSample:
    residual_max: float
    divergence_max: float
    n: int
    t_range: tuple[float, float]
    rho_max: float


def residual_sample(sol: SolutionFamily, n: int = 200, t_max: float = 2.0, rho_max: float = 5.0,
                    seed: int = 0) -> ResidualSample:
    """Max residual norm and ``|d* U|`` over ``n`` random ``(t, p)`` pairs."""
    rng = np.random.default_rng(seed)
    x = sample_points(sol.model, rho_max, n, rng)
    ts = rng.uniform(0.0, t_max, n)
    res = residual_norm(sol.model, x, residual(sol, ts, x))
    div = np.abs(divergence_residual(sol, ts, x))
    return ResidualSample(float(res.max()), float(div.max()), n, (0.0, float(t_max)), float(rho_max))


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegralValue:
    value: float
    tail: float  # analytic bound on the truncated part


def default_grid(model: HyperbolicModel, rho_max: float | None = None, n_rho: int = 128, n_theta: int = 64) -> QuadratureGrid:
    return build_polar_grid(model, rho_max or 12.0 / model.a, n_rho, n_theta)


def empirical_tail(model: HyperbolicModel, h: Callable, rho_max: float, delta: float | None = None,
                   n_rho: int = 32, n_theta: int = 32) -> float:
    """Tail bound for ``int_{rho > rho_max} h`` assuming ``|h| <= C e^{-2 delta rho}``.

    ``C`` is the largest value of ``|h| e^{2 delta rho}`` measured on
    ``rho in [rho_max/2, rho_max]``; ``delta`` defaults to ``0.9 a``.
    """
    delta = 0.9 * model.a if delta is None else delta
    rho = np.linspace(0.5 * rho_max, rho_max, n_rho)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(rho, th, indexing="ij")
    x = model.from_polar(R.ravel(), TH.ravel())
    C = float(np.max(np.abs(h(x)) * np.exp(2 * delta * R.ravel())))
    return tail_bound(C, delta, rho_max, model.b)


def _integral(F, grid, h) -> IntegralValue:
    return IntegralValue(integrate(grid, h), empirical_tail(F.model, h, grid.rho_max))


def dirichlet_integral(F: HarmonicField, grid: QuadratureGrid) -> IntegralValue:
    """``int |dF|^2 dV``."""
    return _integral(F, grid, lambda x: grad_norm_sq(F, x))


def hessian_energy(F: HarmonicField, grid: QuadratureGrid, which: str = "full") -> IntegralValue:
    """``int g-bar(T, T) dV`` with ``T = nabla dF`` (``full``) or its symmetric part (``def``)."""
    which = which.lower()
    if which not in ("full", "def"):
        raise ValueError("which must be 'full' or 'def'")
    dF = ExactForm(F)

    def h(x):
        T = covariant_derivative(dF, x)
        if which == "def":
            T = 0.5 * (T + np.swapaxes(T, -1, -2))
        return tensor_inner(F.model, x, T)

    return _integral(F, grid, h)


def energy(sol: SolutionFamily, t: float, grid: QuadratureGrid) -> IntegralValue:
    """``int |U(t)|^2 dV = psi(t)^2 int |dF|^2 dV``."""
    base = sol.spatial("energy", grid, lambda: dirichlet_integral(sol.F, grid))
    s = float(sol.profile.psi(t)) ** 2
    return IntegralValue(s * base.value, s * base.tail)


def dissipation(sol: SolutionFamily, t: float, grid: QuadratureGrid, which: str = "FullGradient") -> IntegralValue:
    """``psi^2 int g-bar(T, T)`` with ``T = Def dF`` (``Def``) or ``nabla dF`` (``FullGradient``)."""
    key = {"fullgradient": "full", "full": "full", "def": "def"}.get(which.lower())
    if key is None:
        raise ValueError("which must be 'Def' or 'FullGradient'")
    base = sol.spatial(f"diss-{key}", grid, lambda: hessian_energy(sol.F, grid, key))
    s = float(sol.profile.psi(t)) ** 2
    return IntegralValue(s * base.value, s * base.tail)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    relative_gap: float
    lhs_tail: float
    rhs_tail: float
    passed: bool


def dissipation_identity_check(F: HarmonicField, grid: QuadratureGrid | None = None, tol: float = 0.01) -> IdentityCheck:
    """Compare ``int g-bar(nabla dF, nabla dF)`` with ``a^2 int |dF|^2``."""
    model = F.model
    if not model.is_constant_curvature:
        raise VariantError("the dissipation identity holds on constant curvature only")
    grid = grid or default_grid(model)
    lhs = hessian_energy(F, grid, "full")
    e = dirichlet_integral(F, grid)
    rhs = model.a ** 2 * e.value
    gap = abs(lhs.value - rhs) / rhs if rhs else (0.0 if lhs.value == 0 else math.inf)
    return IdentityCheck(lhs.value, rhs, gap, lhs.tail, model.a ** 2 * e.tail, bool(gap < tol))


# ---------------------------------------------------------------------------
# energy inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyRow:
    t: float
    E: float
    dissipation_full: float  # 2 int_0^t D_full
    dissipation_def: float  # 2 int_0^t D_def
    total: float
    total_def: float
    E0: float
    ratio: float
    holds: bool
    holds_def: bool


@dataclass(frozen=True)
class EnergyReport:
    A: float | None
    admissible: bool
    threshold: float
    kappa_full: float
    kappa_def: float
    rows: tuple[EnergyRow, ...]
    passed: bool
    passed_def: bool

    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])


def energy_inequality_report(sol: SolutionFamily, t_grid: Sequence[float], grid: QuadratureGrid,
                             slack: float = 1e-3) -> EnergyReport:
    """``E(t) + 2 int_0^t D <= E(0)`` on a time grid, with closed-form time integrals.

    The verdict is gated by the admissibility flag ``A >= 2 b^2``.
    """
    if not isinstance(sol.profile, ExponentialProfile):
        raise VariantError("energy inequality report needs an exponential profile")
    E0 = sol.spatial("energy", grid, lambda: dirichlet_integral(sol.F, grid)).value
    Dfull = sol.spatial("diss-full", grid, lambda: hessian_energy(sol.F, grid, "full")).value
    Ddef = sol.spatial("diss-def", grid, lambda: hessian_energy(sol.F, grid, "def")).value
    kf = Dfull / E0 if E0 else 0.0
    kd = Ddef / E0 if E0 else 0.0
    rows = []
    for t in t_grid:
        t = float(t)
        psi2 = float(sol.profile.psi(t)) ** 2
        ipsi = sol.profile.integral_psi_sq(t)
        E = psi2 * E0
        df, dd = 2 * kf * ipsi * E0, 2 * kd * ipsi * E0
        tot, totd = E + df, E + dd
        rows.append(EnergyRow(t, E, df, dd, tot, totd, E0, tot / E0 if E0 else 1.0,
                              bool(tot <= E0 * (1 + slack)), bool(totd <= E0 * (1 + slack))))
    b = sol.model.b
    adm = sol.profile.admissible(b)
    return EnergyReport(sol.profile.A, adm, 2 * b * b, kf, kd, tuple(rows),
                        bool(adm and all(r.holds for r in rows)), bool(all(r.holds_def for r in rows)))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

CERTIFICATE_KEYS = ("model", "phi_coeffs", "A1", "A2", "t", "energy0", "gap", "residual_max",
                    "divergence_max", "energy_pass", "version")


def family_variant(model: HyperbolicModel) -> Variant:
    return Variant.FULL if model.is_constant_curvature else Variant.MODIFIED


def nonuniqueness_certificate(phi: FourierBoundaryData, model: HyperbolicModel, A1: float, A2: float,
                              grid: QuadratureGrid | None = None, t: float = 1.0, *, n_samples: int = 200,
                              t_max: float = 2.0, rho_sample: float = 5.0, seed: int = 0,
                              t_grid: Sequence[float] | None = None,
                              residual_tol: float | None = None, divergence_tol: float | None = None) -> dict:
    """Two admissible families with the same initial velocity and different ``U(t)``."""
    b = model.b
    for A in (A1, A2):
        if not ExponentialProfile(A).admissible(b):
            raise InadmissibleProfileError(f"A={A} < 2 b^2 = {2 * b * b}: the energy inequality fails")
    grid = grid or default_grid(model)
    F = extend(phi, model)
    variant = family_variant(model)
    fams = [SolutionFamily(F, ExponentialProfile(A), variant) for A in (A1, A2)]
    tg = tuple(t_grid) if t_grid is not None else tuple(np.linspace(0.0, t_max, 9))
    samples = [residual_sample(s, n_samples, t_max, rho_sample, seed) for s in fams]
    reports = [energy_inequality_report(s, tg, grid) for s in fams]
    E0 = energy(fams[0], 0.0, grid).value
    gap_factor = (float(fams[0].profile.psi(t)) - float(fams[1].profile.psi(t))) ** 2
    gap = gap_factor * E0
    x0 = sample_points(model, rho_sample, 16, np.random.default_rng(seed + 1))
    shared = bool(np.array_equal(velocity(fams[0], 0.0, x0), velocity(fams[1], 0.0, x0)))
    if residual_tol is None:
        residual_tol = 1e-6 if F.accuracy is Accuracy.ANALYTIC else 1e-4
    if divergence_tol is None:
        divergence_tol = 1e-8 if F.accuracy is Accuracy.ANALYTIC else 1e-5
    res_max = max(s.residual_max for s in samples)
    div_max = max(s.divergence_max for s in samples)
    energy_pass = all(r.passed for r in reports)
    declined = A1 == A2 or t <= 0 or gap <= 0
    cert = {
        "model": model.to_config(),
        "phi_coeffs": phi.as_rows(),
        "A1": float(A1),
        "A2": float(A2),
        "t": float(t),
        "energy0": E0,
        "gap": gap,
        "residual_max": res_max,
        "divergence_max": div_max,
        "energy_pass": bool(energy_pass),
        "version": __version__,
    }
    cert.update({
        "variant": variant.value,
        "u0_shared": shared,
        "gap_factor": gap_factor,
        "residual_tol": residual_tol,
        "divergence_tol": divergence_tol,
        "energy_reports": [_energy_report_dict(r) for r in reports],
        "declined": bool(declined),
        "certified": bool(not declined and shared and energy_pass and res_max < residual_tol and div_max < divergence_tol),
    })
    return cert


def _energy_report_dict(r: EnergyReport) -> dict:
    return {
        "A": r.A,
        "admissible": r.admissible,
        "threshold": r.threshold,
        "kappa_full": r.kappa_full,
        "kappa_def": r.kappa_def,
        "passed": r.passed,
        "passed_def": r.passed_def,
        "rows": [asdict(row) for row in r.rows],
    }


def liouville_example(phi: FourierBoundaryData, model: HyperbolicModel, profile: TimeProfile | None = None,
                      *, n_samples: int = 200, t_max: float = 2.0, rho_sample: float = 5.0, seed: int = 0,
                      residual_tol: float | None = None) -> dict:
    """Bounded, spatially nonconstant solution driven by a bounded ``psi``."""
    profile = profile or CustomProfile.constant(1.0)
    if phi.is_constant:
        return {"declined": True, "reason": "constant boundary data gives the trivial solution", "passed": False}
    F = extend(phi, model)
    sol = SolutionFamily(F, profile, family_variant(model))
    s = residual_sample(sol, n_samples, t_max, rho_sample, seed)
    rng = np.random.default_rng(seed)
    x = sample_points(model, rho_sample, n_samples, rng)
    dF_norm = np.sqrt(grad_norm_sq(F, x))
    sup_psi = profile.sup_abs(t_max)
    ts = np.linspace(0.0, t_max, 41)
    sup_U = float(np.max(np.abs(profile.psi(ts))) * dF_norm.max())
    # decay of |dF| makes the sample sup a global bound on the disk/warped chart
    nonconst = bool(dF_norm.max() > 1e-12 and np.ptp(F.value(x)) > 1e-12)
    tol = residual_tol if residual_tol is not None else (1e-6 if F.accuracy is Accuracy.ANALYTIC else 1e-4)
    bounded = bool(math.isfinite(sup_U) and sup_U <= sup_psi * dF_norm.max() * (1 + 1e-12))
    return {
        "declined": False,
        "variant": sol.variant.value,
        "profile": profile.describe(),
        "residual_max": s.residual_max,
        "divergence_max": s.divergence_max,
        "sup_psi": sup_psi,
        "sup_dF": float(dF_norm.max()),
        "sup_U": sup_U,
        "bounded": bounded,
        "nonconstant": nonconst,
        "passed": bool(s.residual_max < tol and bounded and nonconst),
    }


# ---------------------------------------------------------------------------
# L1 finiteness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class L1Report:
    rho_max: tuple[float, ...]
    values: tuple[float, ...]
    differences: tuple[float, ...]
    ratios: tuple[float, ...]
    limit: float
    tail: float
    pinched: bool
    passed: bool


def grad_of_grad_norm_sq(F, x) -> np.ndarray:
    """``| grad |grad F|^2 |``, the L1 integrand."""
    return np.sqrt(oneform_norm_sq(F.model, x, 2.0 * half_d_grad_norm_sq(F, x)))


def l1_gradnorm_report(F: HarmonicField, rho_maxes: Sequence[float] | None = None, n_rho: int = 128,
                       n_theta: int = 64) -> L1Report:
    """Truncated ``int | grad |grad F|^2 | dV`` with Cauchy differences."""
    model = F.model
    if rho_maxes is None:
        rho_maxes = tuple(r / model.b for r in (8.0, 10.0, 12.0, 14.0))
    h = lambda x: grad_of_grad_norm_sq(F, x)
    vals = [integrate(build_polar_grid(model, R, n_rho, n_theta), h) for R in rho_maxes]
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    ratios = [d2 / d1 if d1 > 0 else 0.0 for d1, d2 in zip(diffs, diffs[1:])]
    tail = empirical_tail(model, h, rho_maxes[-1])
    passed = bool(model.pinched and all(r < 0.5 for r in ratios) and math.isfinite(tail))
    return L1Report(tuple(map(float, rho_maxes)), tuple(vals), tuple(diffs), tuple(ratios), vals[-1], tail,
                    model.pinched, passed)
