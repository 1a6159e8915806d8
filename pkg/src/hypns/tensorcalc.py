"""Calculus of scalar fields and 1-forms on a 2-D model.

Conventions (chart basis, indices ``0, 1``):

* ``ScalarField.gradient(x)[..., i] = d_i F`` and
  ``ScalarField.hessian(x)[..., i, j] = d_i d_j F`` (chart partials).
* ``OneFormField.components(x)[..., j] = w_j`` and
  ``OneFormField.jacobian(x)[..., j, k] = d_k w_j``.
* Covariant derivative ``T[..., j, k] = w_{j;k} = d_k w_j - Gamma^l_{jk} w_l``.
* The codifferential is signed so that ``d* dF = -Laplace_Beltrami F``.

All operations accept either a :class:`~hypns.geometry.ChartPoint` (returning a
single value) or a coordinate array with trailing axis 2 (vectorised).
"""

from __future__ import annotations

from enum import Enum
from typing import Callable

import numpy as np

from .errors import ChartDomainError, ModelMismatchError, StencilError
from .geometry import ChartPoint, HyperbolicModel, ModelKind

SECOND_FD_STEP = 1e-4


class Accuracy(str, Enum):
    ANALYTIC = "analytic"
    FD2 = "fd2"


# default tolerances by accuracy class
TOLERANCE = {Accuracy.ANALYTIC: 1e-8, Accuracy.FD2: 1e-4}


def _unpack(p):
    """Return ``(coords, single)`` for a ChartPoint or array-like."""
    if isinstance(p, ChartPoint):
        return p.array, True
    return np.asarray(p, dtype=float), False


def _pack(v, single):
    return v if not single else (float(v) if np.ndim(v) == 0 else np.asarray(v))


def _check_model(field_model: HyperbolicModel, p):
    if isinstance(p, ChartPoint) and p.model != field_model:
        raise ModelMismatchError("point and field belong to different models")


def central_jacobian(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h) -> np.ndarray:
    """``out[..., *shape, k] = d_k fn`` by central differences with per-point step ``h``."""
    x = np.asarray(x, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape[:-1])
    cols = []
    for k in range(2):
        step = np.zeros(x.shape)
        step[..., k] = h
        try:
            fp, fm = np.asarray(fn(x + step)), np.asarray(fn(x - step))
        except ChartDomainError as exc:
            raise StencilError(f"finite-difference stencil leaves the chart: {exc}") from exc
        hk = h.reshape(h.shape + (1,) * (fp.ndim - h.ndim))
        cols.append((fp - fm) / (2.0 * hk))
    return np.stack(cols, axis=-1)


def fd_step(model: HyperbolicModel, x) -> np.ndarray:
    return SECOND_FD_STEP * model.fd_scale(x)


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


class ScalarField:
    """Base scalar field. Subclasses provide ``value`` and usually ``gradient``.

    Missing derivatives fall back to central differences and downgrade the
    accuracy class to ``fd2``.
    """

    accuracy = Accuracy.FD2

    def __init__(self, model: HyperbolicModel):
        self.model = model

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return central_jacobian(self.value, x, fd_step(self.model, x))

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        hs = central_jacobian(self.gradient, x, fd_step(self.model, x))
        return 0.5 * (hs + np.swapaxes(hs, -1, -2))

    def d(self) -> "ExactForm":
        return ExactForm(self)


class FunctionScalar(ScalarField):
    """Scalar field from plain callables; omitted derivatives use finite differences."""

    def __init__(self, model, value, gradient=None, hessian=None):
        super().__init__(model)
        self._value, self._gradient, self._hessian = value, gradient, hessian
        self.accuracy = Accuracy.ANALYTIC if gradient is not None and hessian is not None else Accuracy.FD2

    def value(self, x):
        return self._value(np.asarray(x, dtype=float))

    def gradient(self, x):
        if self._gradient is None:
            return super().gradient(x)
        return self._gradient(np.asarray(x, dtype=float))

    def hessian(self, x):
        if self._hessian is None:
            return super().hessian(x)
        return self._hessian(np.asarray(x, dtype=float))


class ConstantScalar(ScalarField):
    accuracy = Accuracy.ANALYTIC

    def __init__(self, model, c: float):
        super().__init__(model)
        self.c = float(c)

    def value(self, x):
        return np.full(np.shape(x)[:-1], self.c)

    def gradient(self, x):
        return np.zeros(np.shape(x))

    def hessian(self, x):
        return np.zeros(np.shape(x) + (2,))


class PolynomialScalar(ScalarField):
    """``F = sum_{m,n} c[m, n] x0^m x1^n`` in chart coordinates."""

    accuracy = Accuracy.ANALYTIC

    def __init__(self, model, coeffs):
        super().__init__(model)
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))

    @staticmethod
    def _eval(c, x):
        return np.polynomial.polynomial.polyval2d(x[..., 0], x[..., 1], c) if c.size else np.zeros(x.shape[:-1])

    @staticmethod
    def _der(c, axis):
        return np.polynomial.polynomial.polyder(c, axis=axis) if c.shape[axis] > 1 else np.zeros((1, 1))

    def value(self, x):
        return self._eval(self.coeffs, np.asarray(x, dtype=float))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([self._eval(self._der(self.coeffs, k), x) for k in range(2)], axis=-1)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        rows = []
        for i in range(2):
            ci = self._der(self.coeffs, i)
            rows.append(np.stack([self._eval(self._der(ci, j), x) for j in range(2)], axis=-1))
        return np.stack(rows, axis=-2)


class DistanceField(ScalarField):
    """``rho(x)``, the distance from the origin. Gradient analytic, Hessian by FD."""

    accuracy = Accuracy.FD2

    def value(self, x):
        return self.model.radius(x)

    def gradient(self, x):
        x = self.model.validate(x)
        if self.model.kind is ModelKind.WARPED:
            g = np.zeros(x.shape)
            g[..., 0] = 1.0
            return g
        r2 = np.sum(x * x, axis=-1)
        r = np.sqrt(r2)
        return (2.0 / self.model.a) * x / (r * (1.0 - r2))[..., None]


class OneFormField:
    """Base covector field; ``jacobian`` defaults to finite differences."""

    accuracy = Accuracy.FD2

    def __init__(self, model: HyperbolicModel):
        self.model = model

    def components(self, x) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return central_jacobian(self.components, x, fd_step(self.model, x))

    def scaled(self, s: float) -> "OneFormField":
        return ScaledOneForm(self, s)


class ExactForm(OneFormField):
    """``dF`` for a scalar field ``F``."""

    def __init__(self, F: ScalarField):
        super().__init__(F.model)
        self.F = F
        self.accuracy = F.accuracy

    def components(self, x):
        return self.F.gradient(x)

    def jacobian(self, x):
        return self.F.hessian(x)


class ScaledOneForm(OneFormField):
    def __init__(self, base: OneFormField, s: float):
        super().__init__(base.model)
        self.base, self.s = base, float(s)
        self.accuracy = base.accuracy

    def components(self, x):
        return self.s * self.base.components(x)

    def jacobian(self, x):
        return self.s * self.base.jacobian(x)


class PolynomialOneForm(OneFormField):
    """``w_j = P_j(x0, x1)`` with polynomial coefficient arrays ``coeffs[j]``."""

    accuracy = Accuracy.ANALYTIC

    def __init__(self, model, coeffs0, coeffs1):
        super().__init__(model)
        self.parts = (PolynomialScalar(model, coeffs0), PolynomialScalar(model, coeffs1))

    @classmethod
    def random(cls, model, rng: np.random.Generator, degree: int = 2, scale: float = 1.0):
        c = rng.normal(scale=scale, size=(2, degree + 1, degree + 1))
        return cls(model, c[0], c[1])

    def components(self, x):
        return np.stack([P.value(x) for P in self.parts], axis=-1)

    def jacobian(self, x):
        return np.stack([P.gradient(x) for P in self.parts], axis=-2)


# ---------------------------------------------------------------------------
# index gymnastics and inner products
# ---------------------------------------------------------------------------


def sharp(w, p, model: HyperbolicModel | None = None):
    """Raise an index: ``v^i = g^{ij} w_j``.

    ``w`` may be a :class:`OneFormField` or a raw component array (then
    ``model`` is required).
    """
    x, single = _unpack(p)
    if isinstance(w, OneFormField):
        model = w.model
        comps = w.components(x)
    else:
        comps = np.asarray(w, dtype=float)
        model = model or (p.model if isinstance(p, ChartPoint) else None)
        if model is None:
            raise ValueError("model required for raw components")
    v = np.einsum("...ij,...j->...i", model.inverse_metric(x), comps)
    return _pack(v, single)


def flat(v, p, model: HyperbolicModel):
    """Lower an index: ``w_i = g_ij v^j``."""
    x, single = _unpack(p)
    return _pack(np.einsum("...ij,...j->...i", model.metric(x), np.asarray(v, dtype=float)), single)


def oneform_norm_sq(model: HyperbolicModel, x, w) -> np.ndarray:
    """``g^{ij} w_i w_j``."""
    return np.einsum("...ij,...i,...j->...", model.inverse_metric(x), w, w)


def vector_norm_sq(model: HyperbolicModel, x, v) -> np.ndarray:
    return np.einsum("...ij,...i,...j->...", model.metric(x), v, v)


def orthonormal_components(model: HyperbolicModel, x, T) -> np.ndarray:
    """Components of a (0,2)-tensor in the orthonormal co-frame ``theta = L^T dx``
    where ``g = L L^T`` is the Cholesky factorisation."""
    L = np.linalg.cholesky(model.metric(x))
    Linv = np.linalg.inv(L)
    return Linv @ np.asarray(T) @ np.swapaxes(Linv, -1, -2)


def tensor_inner(model: HyperbolicModel, p, S, T=None):
    """``g-bar(S, T)`` for (0,2)-tensors via the orthonormal co-frame."""
    x, single = _unpack(p)
    S = np.asarray(S, dtype=float)
    Sn = orthonormal_components(model, x, S)
    Tn = Sn if T is None else orthonormal_components(model, x, np.asarray(T, dtype=float))
    return _pack(np.sum(Sn * Tn, axis=(-1, -2)), single)


# ---------------------------------------------------------------------------
# first-order operators
# ---------------------------------------------------------------------------


def _cov(model, x, comps, jac):
    gam = model.christoffel(x)
    return jac - np.einsum("...ljk,...l->...jk", gam, comps)


def covariant_derivative(w: OneFormField, p):
    """``T[j, k] = w_{j;k} = d_k w_j - Gamma^l_{jk} w_l``."""
    _check_model(w.model, p)
    x, single = _unpack(p)
    return _pack(_cov(w.model, x, w.components(x), w.jacobian(x)), single)


def deformation(w: OneFormField, p):
    """Symmetric part ``(w_{j;k} + w_{k;j}) / 2`` of the covariant derivative."""
    T = np.asarray(covariant_derivative(w, p))
    return 0.5 * (T + np.swapaxes(T, -1, -2))


def codifferential(w: OneFormField, p):
    """``d* w = -g^{jk} w_{j;k}``; equals ``-(1/sqrt g) d_i(sqrt g g^{ij} w_j)``."""
    _check_model(w.model, p)
    x, single = _unpack(p)
    T = _cov(w.model, x, w.components(x), w.jacobian(x))
    return _pack(-np.einsum("...jk,...jk->...", w.model.inverse_metric(x), T), single)


def codifferential_divergence_form(w: OneFormField, p):
    """Independent evaluation of ``d* w`` by differencing ``sqrt g g^{ij} w_j``."""
    x, single = _unpack(p)
    m = w.model

    def flux(y):
        return m.sqrt_det(y)[..., None] * np.einsum("...ij,...j->...i", m.inverse_metric(y), w.components(y))

    J = central_jacobian(flux, x, fd_step(m, x))
    return _pack(-np.trace(J, axis1=-2, axis2=-1) / m.sqrt_det(x), single)


def exterior_derivative(w: OneFormField, p):
    """Coefficient ``beta`` of ``dw = beta dx0 ^ dx1``."""
    x, single = _unpack(p)
    J = w.jacobian(x)
    return _pack(J[..., 1, 0] - J[..., 0, 1], single)


def codifferential_2form(model: HyperbolicModel, beta: Callable[[np.ndarray], np.ndarray], x) -> np.ndarray:
    """``d*(beta dx0^dx1) = -*d*`` in two dimensions.

    With ``s = beta / sqrt g`` this is
    ``(sqrt g g^{1j} d_j s, -sqrt g g^{0j} d_j s)``.
    """
    x = np.asarray(x, dtype=float)
    ds = central_jacobian(lambda y: beta(y) / model.sqrt_det(y), x, fd_step(model, x))
    gi = model.inverse_metric(x)
    sg = model.sqrt_det(x)
    up = np.einsum("...ij,...j->...i", gi, ds)
    return np.stack([sg * up[..., 1], -sg * up[..., 0]], axis=-1)


def ricci_operator(w, p, model: HyperbolicModel | None = None):
    """``Ric(w) = K(p) w`` (Ricci equals sectional curvature in 2-D)."""
    x, single = _unpack(p)
    if isinstance(w, OneFormField):
        model = w.model
        comps = w.components(x)
    else:
        comps = np.asarray(w, dtype=float)
        model = model or (p.model if isinstance(p, ChartPoint) else None)
        if model is None:
            raise ValueError("model required for raw components")
    return _pack(model.gauss_curvature(x)[..., None] * comps, single)


# ---------------------------------------------------------------------------
# second-order operators
# ---------------------------------------------------------------------------


def hodge_laplacian_oneform(w: OneFormField, p):
    """``(d d* + d* d) w`` with the outer derivatives taken by central differences."""
    _check_model(w.model, p)
    x, single = _unpack(p)
    m = w.model
    dd = central_jacobian(lambda y: codifferential(w, y), x, fd_step(m, x))
    beta = lambda y: exterior_derivative(w, y)
    return _pack(dd + codifferential_2form(m, beta, x), single)


def bochner_laplacian_oneform(w: OneFormField, p):
    """Rough Laplacian ``(nabla* nabla w)_j = -g^{kl} w_{j;kl}``.

    ``w_{j;kl} = d_l T_jk - Gamma^m_{lj} T_mk - Gamma^m_{lk} T_jm`` with
    ``d_l T`` from central differences of the covariant derivative.
    """
    _check_model(w.model, p)
    x, single = _unpack(p)
    m = w.model
    T = _cov(m, x, w.components(x), w.jacobian(x))
    dT = central_jacobian(lambda y: _cov(m, y, w.components(y), w.jacobian(y)), x, fd_step(m, x))  # [j,k,l]
    gam = m.christoffel(x)
    second = dT - np.einsum("...mlj,...mk->...jkl", gam, T) - np.einsum("...mlk,...jm->...jkl", gam, T)
    return _pack(-np.einsum("...kl,...jkl->...j", m.inverse_metric(x), second), single)


def weitzenbock_gap(w: OneFormField, p):
    """``(d d* + d* d) w - (nabla* nabla w + Ric w)``."""
    x, single = _unpack(p)
    return _pack(hodge_laplacian_oneform(w, x) - bochner_laplacian_oneform(w, x) - ricci_operator(w, x), single)


# ---------------------------------------------------------------------------
# scalar-field helpers
# ---------------------------------------------------------------------------


def grad_norm_sq(F: ScalarField, p):
    """``|dF|^2 = g^{ij} F_i F_j``."""
    x, single = _unpack(p)
    return _pack(oneform_norm_sq(F.model, x, F.gradient(x)), single)


def gradient_vector(F: ScalarField, p):
    """``(grad F)^i = g^{ij} F_j``."""
    return sharp(ExactForm(F), p)


def half_d_grad_norm_sq(F: ScalarField, p):
    """``(1/2) d|dF|^2`` by the product rule:
    ``(1/2) d_k g^{ij} F_i F_j + g^{ij} F_{ik} F_j``."""
    x, single = _unpack(p)
    m = F.model
    g1 = F.gradient(x)
    H = F.hessian(x)
    dgi = m.inverse_metric_gradient(x)
    out = 0.5 * np.einsum("...kij,...i,...j->...k", dgi, g1, g1) + np.einsum("...ij,...ik,...j->...k", m.inverse_metric(x), H, g1)
    return _pack(out, single)


def convection(F: ScalarField, p):
    """``nabla_{grad F} dF``, i.e. ``F_{j;k} (grad F)^k``."""
    _check_model(F.model, p)
    x, single = _unpack(p)
    m = F.model
    g1 = F.gradient(x)
    T = _cov(m, x, g1, F.hessian(x))
    v = np.einsum("...ij,...j->...i", m.inverse_metric(x), g1)
    return _pack(np.einsum("...jk,...k->...j", T, v), single)


def laplace_beltrami(F: ScalarField, p):
    """``g^{ij}(F_ij - Gamma^k_ij F_k)``."""
    x, single = _unpack(p)
    m = F.model
    T = _cov(m, x, F.gradient(x), F.hessian(x))
    return _pack(np.einsum("...ij,...ij->...", m.inverse_metric(x), T), single)


class GradNormSqField(ScalarField):
    """``h = |dF|^2`` with analytic gradient ``d|dF|^2`` and FD Hessian."""

    accuracy = Accuracy.FD2

    def __init__(self, F: ScalarField):
        super().__init__(F.model)
        self.F = F

    def value(self, x):
        return grad_norm_sq(self.F, x)

    def gradient(self, x):
        return 2.0 * half_d_grad_norm_sq(self.F, x)


def bochner_residual(F: ScalarField, p):
    """``Lap|grad F|^2 - 2 g-bar(nabla dF, nabla dF) - 2 Ric(grad F, grad F)``.

    Vanishes for harmonic ``F``. The Laplacian of ``|grad F|^2`` uses
    differences of its analytic gradient (one FD level).
    """
    x, single = _unpack(p)
    m = F.model
    lap = laplace_beltrami(GradNormSqField(F), x)
    T = _cov(m, x, F.gradient(x), F.hessian(x))
    hess_sq = tensor_inner(m, x, T)
    ric = m.gauss_curvature(x) * oneform_norm_sq(m, x, F.gradient(x))
    return _pack(lap - 2.0 * hess_sq - 2.0 * ric, single)
