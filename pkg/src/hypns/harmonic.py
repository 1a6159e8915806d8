"""Bounded harmonic functions with trigonometric boundary data at infinity.

On the disk the harmonic extension of
``phi(theta) = a0/2 + sum_k (a_k cos k theta + b_k sin k theta)`` is the real
part of the polynomial ``a0/2 + sum_k (a_k - i b_k) z^k``. On a warped product
each Fourier mode is extended by a radial profile solving

    phi_k'' + (f'/f) phi_k' - (k^2 / f^2) phi_k = 0,    phi_k ~ r^k at r = 0,

normalised to ``phi_k(r_inf) = 1`` at the calibration radius ``r_inf = 30/b``.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateFitError, HarmonicExtensionError, UnsupportedOperationError
from .geometry import HyperbolicModel, ModelKind
from .tensorcalc import Accuracy, FunctionScalar, ScalarField, grad_norm_sq, laplace_beltrami

MODE_RTOL = 1e-10
MODE_R0 = 1e-3
CALIBRATION_SCALE = 30.0


def thread_count() -> int:
    """Worker cap from ``HYPNS_THREADS`` (default: CPU count)."""
    try:
        n = int(os.environ.get("HYPNS_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n or (os.cpu_count() or 1))


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourierBoundaryData:
    """``phi(theta) = a0/2 + sum (a_k cos k theta + b_k sin k theta)``."""

    a0: float = 0.0
    coeffs: tuple[tuple[int, float, float], ...] = ()

    def __post_init__(self):
        merged: dict[int, list[float]] = {}
        for k, ak, bk in self.coeffs:
            k = int(k)
            if k < 1:
                raise ValueError(f"mode index must be >= 1, got {k}")
            acc = merged.setdefault(k, [0.0, 0.0])
            acc[0] += float(ak)
            acc[1] += float(bk)
        norm = tuple((k, v[0], v[1]) for k, v in sorted(merged.items()))
        object.__setattr__(self, "coeffs", norm)
        object.__setattr__(self, "a0", float(self.a0))
        if not all(math.isfinite(v) for row in norm for v in row[1:]) or not math.isfinite(self.a0):
            raise ValueError("Fourier coefficients must be finite")

    # -- constructors --------------------------------------------------------------

    @classmethod
    def cos(cls, k: int = 1, amplitude: float = 1.0) -> "FourierBoundaryData":
        return cls(0.0, ((k, amplitude, 0.0),))

    @classmethod
    def constant(cls, c: float) -> "FourierBoundaryData":
        return cls(2.0 * c, ())

    @classmethod
    def parse_inline(cls, text: str) -> "FourierBoundaryData":
        """Parse ``"k:a:b,k:a:b"``; a ``0:a0:0`` entry sets ``a0``."""
        a0, rows = 0.0, []
        for item in filter(None, (s.strip() for s in text.split(","))):
            parts = item.split(":")
            if len(parts) != 3:
                raise ValueError(f"bad coefficient entry {item!r}; expected k:a_k:b_k")
            k, a, b = int(parts[0]), float(parts[1]), float(parts[2])
            if k == 0:
                a0 += a
            else:
                rows.append((k, a, b))
        return cls(a0, tuple(rows))

    @classmethod
    def from_csv(cls, path) -> "FourierBoundaryData":
        a0, rows = 0.0, []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"k", "a_k", "b_k"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                k = int(row["k"])
                if k == 0:
                    a0 += float(row["a_k"])
                else:
                    rows.append((k, float(row["a_k"]), float(row["b_k"])))
        return cls(a0, tuple(rows))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "a_k", "b_k"])
            w.writerow([0, repr(self.a0), repr(0.0)])
            for k, a, b in self.coeffs:
                w.writerow([k, repr(a), repr(b)])

    # -- derived quantities -------------------------------------------------------

    @property
    def k_max(self) -> int:
        return max((k for k, _, _ in self.coeffs), default=0)

    @property
    def is_constant(self) -> bool:
        return all(a == 0.0 and b == 0.0 for _, a, b in self.coeffs)

    @property
    def sup_bound(self) -> float:
        return abs(0.5 * self.a0) + sum(abs(a) + abs(b) for _, a, b in self.coeffs)

    @property
    def derivative_sup_bound(self) -> float:
        return sum(k * (abs(a) + abs(b)) for k, a, b in self.coeffs)

    def value(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, 0.5 * self.a0)
        for k, a, b in self.coeffs:
            out = out + a * np.cos(k * theta) + b * np.sin(k * theta)
        return out

    def derivative(self, theta, order: int = 1) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape)
        for k, a, b in self.coeffs:
            # d^n/dtheta^n of (a cos + b sin) is k^n times a quarter-turn rotation
            phase = order * np.pi / 2
            out = out + k ** order * (a * np.cos(k * theta + phase) + b * np.sin(k * theta + phase))
        return out

    def rotated(self, theta0: float) -> "FourierBoundaryData":
        """Data for ``phi(theta - theta0)``."""
        rows = []
        for k, a, b in self.coeffs:
            c, s = math.cos(k * theta0), math.sin(k * theta0)
            rows.append((k, a * c - b * s, a * s + b * c))
        return FourierBoundaryData(self.a0, tuple(rows))

    def scaled(self, s: float) -> "FourierBoundaryData":
        return FourierBoundaryData(s * self.a0, tuple((k, s * a, s * b) for k, a, b in self.coeffs))

    def as_rows(self) -> list[list[float]]:
        return [[0, self.a0, 0.0]] + [[k, a, b] for k, a, b in self.coeffs]


# ---------------------------------------------------------------------------
# harmonic fields
# ---------------------------------------------------------------------------


class HarmonicField(ScalarField):
    """Harmonic extension of boundary data ``phi`` into ``model``."""

    backend = ""

    def __init__(self, model: HyperbolicModel, phi: FourierBoundaryData):
        super().__init__(model)
        self.phi = phi


class DiskHarmonicField(HarmonicField):
    """Closed-form extension on the disk (real part of a complex polynomial)."""

    backend = "disk-closed-form"
    accuracy = Accuracy.ANALYTIC

    def __init__(self, model, phi):
        if model.kind is not ModelKind.DISK:
            raise UnsupportedOperationError("closed-form extension needs the disk model")
        super().__init__(model, phi)
        c = np.zeros(phi.k_max + 1, dtype=complex)
        c[0] = 0.5 * phi.a0
        for k, a, b in phi.coeffs:
            c[k] = a - 1j * b
        self._c = c
        self._c1 = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1, dtype=complex)
        self._c2 = np.polynomial.polynomial.polyder(self._c1) if self._c1.size > 1 else np.zeros(1, dtype=complex)

    @staticmethod
    def _z(x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] + 1j * x[..., 1]

    def value(self, x):
        x = self.model.validate(x)
        return np.polynomial.polynomial.polyval(self._z(x), self._c).real

    def gradient(self, x):
        x = self.model.validate(x)
        d = np.polynomial.polynomial.polyval(self._z(x), self._c1)
        return np.stack([d.real, -d.imag], axis=-1)

    def hessian(self, x):
        x = self.model.validate(x)
        d = np.polynomial.polynomial.polyval(self._z(x), self._c2)
        h = np.empty(x.shape + (2,))
        h[..., 0, 0] = d.real
        h[..., 0, 1] = h[..., 1, 0] = -d.imag
        h[..., 1, 1] = -d.real
        return h


@dataclass(frozen=True)
class RadialMode:
    """Normalised radial profile ``phi_k`` for one Fourier index."""

    k: int
    r0: float
    beta: float
    scale: float  # 1 / u(r_inf) for the unnormalised solution u
    r_end: float
    sol: object = field(repr=False)

    def values(self, r):
        """``(phi_k, phi_k')`` at radii ``r``."""
        r = np.asarray(r, dtype=float)
        phi = np.empty(r.shape)
        dphi = np.empty(r.shape)
        small = r < self.r0
        if np.any(small):
            rs = r[small]
            t = (rs / self.r0) ** self.k
            phi[small] = self.scale * t * (1 + self.beta * rs ** 2)
            with np.errstate(divide="ignore", invalid="ignore"):
                dphi[small] = self.scale * np.where(
                    rs > 0, t * (self.k / rs + self.beta * (self.k + 2) * rs), self.k / self.r0 if self.k == 1 else 0.0)
        big = ~small
        if np.any(big):
            if np.any(r[big] > self.r_end):
                raise HarmonicExtensionError(f"mode k={self.k} tabulated only up to r={self.r_end:.6g}")
            y = self.sol(r[big])
            phi[big] = self.scale * y[0]
            dphi[big] = self.scale * y[1]
        return phi, dphi


def solve_radial_mode(model: HyperbolicModel, k: int, r_inf: float | None = None, r_end: float | None = None) -> RadialMode:
    """Integrate the regular radial solution for mode ``k`` on a warped model."""
    warp = model.warp
    r_inf = CALIBRATION_SCALE / model.b if r_inf is None else r_inf
    if r_end is None:
        r_end = model.rho_ceiling if math.isfinite(model.rho_ceiling) else 40.0 / model.a
    r_end = max(r_end, r_inf)
    c0 = float(warp.curvature_scale(0.0))
    beta = -c0 * k / 12.0
    r0 = MODE_R0

    def rhs(r, y):
        f, df = warp.f_df(r)
        return (y[1], -(df / f) * y[1] + (k * k / (f * f)) * y[0])

    y0 = (1.0 + beta * r0 ** 2, k / r0 + beta * (k + 2) * r0)
    sol = solve_ivp(rhs, (r0, r_end), y0, method="DOP853", rtol=MODE_RTOL, atol=1e-14, dense_output=True)
    if not sol.success:
        raise HarmonicExtensionError(f"mode k={k} ODE failed at r={sol.t[-1]:.6g}: {sol.message}")
    u_inf = float(sol.sol(r_inf)[0])
    if not (math.isfinite(u_inf) and u_inf > 0):
        raise HarmonicExtensionError(f"mode k={k} has invalid calibration value {u_inf} at r={r_inf:.6g}")
    return RadialMode(k, r0, beta, 1.0 / u_inf, float(sol.t[-1]), sol.sol)


class WarpedHarmonicField(HarmonicField):
    """Mode-by-mode ODE extension in geodesic polar coordinates ``(r, theta)``.

    ``phi_k''`` is taken from the mode equation itself, so the Hessian carries
    only the ODE tolerance; the class is still reported as ``fd2``.
    """

    backend = "warped-ODE"
    accuracy = Accuracy.FD2

    def __init__(self, model, phi, r_inf: float | None = None):
        if model.kind is not ModelKind.WARPED:
            raise UnsupportedOperationError("ODE extension needs a warped model")
        super().__init__(model, phi)
        self.r_inf = CALIBRATION_SCALE / model.b if r_inf is None else float(r_inf)
        ks = [k for k, _, _ in phi.coeffs]
        workers = min(thread_count(), max(1, len(ks)))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                modes = list(ex.map(lambda k: solve_radial_mode(model, k, self.r_inf), ks))
        else:
            modes = [solve_radial_mode(model, k, self.r_inf) for k in ks]
        self.modes = dict(zip(ks, modes))

    def _parts(self, x, allow_pole=False):
        x = self.model.validate(x, allow_pole=allow_pole)
        r, th = x[..., 0], x[..., 1]
        return x, r, th

    def value(self, x):
        x, r, th = self._parts(x, allow_pole=True)
        out = np.full(r.shape, 0.5 * self.phi.a0)
        for k, a, b in self.phi.coeffs:
            p, _ = self.modes[k].values(r)
            out = out + p * (a * np.cos(k * th) + b * np.sin(k * th))
        return out

    def gradient(self, x):
        x, r, th = self._parts(x)
        g = np.zeros(x.shape)
        for k, a, b in self.phi.coeffs:
            p, dp = self.modes[k].values(r)
            c, s = np.cos(k * th), np.sin(k * th)
            g[..., 0] += dp * (a * c + b * s)
            g[..., 1] += p * k * (b * c - a * s)
        return g

    def hessian(self, x):
        x, r, th = self._parts(x)
        f, df = self.model.warp.f_df(r)
        h = np.zeros(x.shape + (2,))
        for k, a, b in self.phi.coeffs:
            p, dp = self.modes[k].values(r)
            ddp = -(df / f) * dp + (k * k) / (f * f) * p
            c, s = np.cos(k * th), np.sin(k * th)
            ang, dang = a * c + b * s, k * (b * c - a * s)
            h[..., 0, 0] += ddp * ang
            h[..., 0, 1] += dp * dang
            h[..., 1, 1] += -k * k * p * ang
        h[..., 1, 0] = h[..., 0, 1]
        return h


def extend_disk(phi: FourierBoundaryData, model: HyperbolicModel) -> DiskHarmonicField:
    return DiskHarmonicField(model, phi)


def extend_warped(phi: FourierBoundaryData, model: HyperbolicModel, r_inf: float | None = None) -> WarpedHarmonicField:
    return WarpedHarmonicField(model, phi, r_inf)


def extend(phi: FourierBoundaryData, model: HyperbolicModel) -> HarmonicField:
    """Dispatch to the backend matching ``model.kind``."""
    if model.kind is ModelKind.DISK:
        return extend_disk(phi, model)
    return extend_warped(phi, model)


def poisson_integral(phi: FourierBoundaryData, p, n_nodes: int | None = None) -> float:
    """Poisson-kernel average of ``phi`` at a disk chart point (trapezoid rule).

    The default node count ``max(512, K + ceil(36 / -ln r))`` keeps the
    trapezoid aliasing error (of order ``r^(n-K)``) below 1e-15.
    """
    from .geometry import ChartPoint

    if isinstance(p, ChartPoint):
        if p.model.kind is not ModelKind.DISK:
            raise UnsupportedOperationError("Poisson integral is defined on the disk chart")
        x = p.array
    else:
        x = np.asarray(p, dtype=float)
    r = float(np.hypot(x[0], x[1]))
    if r >= 1.0:
        raise ValueError("Poisson integral needs |x| < 1")
    theta = math.atan2(x[1], x[0])
    if n_nodes is None:
        extra = 0 if r == 0 else math.ceil(36.0 / -math.log(r))
        n_nodes = max(512, phi.k_max + extra)
    t = 2 * np.pi * np.arange(n_nodes) / n_nodes
    kernel = (1 - r * r) / (1 - 2 * r * np.cos(theta - t) + r * r)
    return float(np.mean(kernel * phi.value(t)))


# ---------------------------------------------------------------------------
# decay estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    delta_hat: float
    intercept: float
    rho: tuple[float, float]
    angle: float
    max_abs_residual: float


def gradient_norm_along_ray(F: ScalarField, angle: float, rho) -> np.ndarray:
    x = F.model.from_polar(np.asarray(rho, dtype=float), angle)
    return np.sqrt(grad_norm_sq(F, x))


def decay_exponent(F: ScalarField, angle: float = 0.0, window: Sequence[float] = (3.0, 8.0), n: int = 64) -> DecayFit:
    """Least-squares slope of ``ln |grad F|`` against ``rho`` along a ray."""
    r1, r2 = float(window[0]), float(window[1])
    if not 0 <= r1 < r2:
        raise ValueError("window must satisfy 0 <= rho1 < rho2")
    rho = np.linspace(r1, r2, n)
    g = gradient_norm_along_ray(F, angle, rho)
    if not np.all(g > 0) or not np.all(np.isfinite(g)):
        raise DegenerateFitError(f"gradient vanishes on the ray at angle {angle:.6g} over rho in [{r1}, {r2}]")
    logs = np.log(g)
    slope, intercept = np.polyfit(rho, logs, 1)
    resid = logs - (slope * rho + intercept)
    return DecayFit(float(-slope), float(intercept), (r1, r2), float(angle), float(np.max(np.abs(resid))))


@dataclass(frozen=True)
class DecayBound:
    delta: float
    C_measured: float
    window_max: tuple[float, ...]
    windows: tuple[tuple[float, float], ...]
    passed: bool


def decay_bound_check(F: HarmonicField, delta: float, n_rays: int = 16, n_per_window: int = 24,
                      windows: Sequence[tuple[float, float]] | None = None) -> DecayBound:
    """Measure ``max |grad F| e^{delta rho} / ||phi'||`` over dyadic radius windows.

    The bound is accepted when the last window maximum does not exceed the
    first by more than 5% (no growth trend).
    """
    a = F.model.a
    if delta < 0 or delta >= a:
        raise ValueError(f"need 0 <= delta < a (got delta={delta}, a={a})")
    dphi = F.phi.derivative_sup_bound
    if dphi == 0:
        raise DegenerateFitError("boundary data is constant; the gradient vanishes identically")
    if windows is None:
        windows = tuple((lo / a, 2 * lo / a) for lo in (1.0, 2.0, 4.0, 8.0))
    angles = 2 * np.pi * np.arange(n_rays) / n_rays
    maxima = []
    for lo, hi in windows:
        rho = np.linspace(lo, hi, n_per_window)
        R, TH = np.meshgrid(rho, angles, indexing="ij")
        x = F.model.from_polar(R.ravel(), TH.ravel())
        ratio = np.sqrt(grad_norm_sq(F, x)) * np.exp(delta * R.ravel()) / dphi
        maxima.append(float(np.max(ratio)))
    C = max(maxima)
    passed = bool(math.isfinite(C) and maxima[-1] <= 1.05 * maxima[0])
    return DecayBound(float(delta), C, tuple(maxima), tuple(tuple(map(float, w)) for w in windows), passed)


# ---------------------------------------------------------------------------
# barriers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BarrierReport:
    delta: float
    alpha: float
    rho_range: tuple[float, float]
    min_lap_sub: float  # min of Lap[phi_bar - alpha e^{-delta rho}], should be >= 0
    max_lap_super: float  # max of Lap[phi_bar + alpha e^{-delta rho}], should be <= 0
    hypothesis_ok: bool
    passed: bool
    note: str = ""


def radial_extension(phi: FourierBoundaryData, model: HyperbolicModel) -> FunctionScalar:
    """``phi_bar(r, theta) = phi(theta)`` on the polar chart (analytic derivatives)."""

    def grad(x):
        g = np.zeros(np.shape(x))
        g[..., 1] = phi.derivative(x[..., 1])
        return g

    def hess(x):
        h = np.zeros(np.shape(x) + (2,))
        h[..., 1, 1] = phi.derivative(x[..., 1], 2)
        return h

    return FunctionScalar(model, lambda x: phi.value(x[..., 1]), grad, hess)


def exp_distance_laplacian(model: HyperbolicModel, delta: float, rho) -> np.ndarray:
    """``Lap e^{-delta rho} = delta e^{-delta rho} (delta - Lap rho)``."""
    rho = np.asarray(rho, dtype=float)
    return delta * np.exp(-delta * rho) * (delta - model.distance_laplacian(rho))


def barrier_sign_check(model: HyperbolicModel, phi: FourierBoundaryData, delta: float, alpha: float | None = None,
                       C0: float = 1.0, rho_range: tuple[float, float] = (1.0, 10.0),
                       n_rho: int = 64, n_theta: int = 64) -> BarrierReport:
    """Signs of the Laplacians of the barriers ``phi_bar -+ alpha e^{-delta rho}``.

    ``alpha`` defaults to ``2 C0 ||phi'|| / (delta (a - delta))``. The check
    refuses to pass when ``delta >= a``.
    """
    if model.kind is not ModelKind.WARPED:
        raise UnsupportedOperationError("barrier check works in geodesic polar coordinates (warped model)")
    a = model.a
    hyp_ok = 0 < delta < a
    if alpha is None:
        alpha = 2 * C0 * phi.derivative_sup_bound / (delta * (a - delta)) if hyp_ok else math.inf
    lo, hi = rho_range
    if not hyp_ok:
        return BarrierReport(float(delta), float(alpha), (lo, hi), math.nan, math.nan, False, False,
                             "requires 0 < delta < a strictly")
    rho = np.linspace(lo, hi, n_rho)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(rho, th, indexing="ij")
    x = np.stack([R.ravel(), TH.ravel()], axis=-1)
    lap_phi = laplace_beltrami(radial_extension(phi, model), x)
    lap_exp = exp_distance_laplacian(model, delta, x[:, 0])
    sub = lap_phi - alpha * lap_exp
    sup = lap_phi + alpha * lap_exp
    min_sub, max_sup = float(np.min(sub)), float(np.max(sup))
    return BarrierReport(float(delta), float(alpha), (lo, hi), min_sub, max_sup, True,
                         bool(min_sub >= 0 and max_sup <= 0))
