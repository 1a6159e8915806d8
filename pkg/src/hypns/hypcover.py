"""Geometric estimates: annulus coverings, chord bounds and volume comparison.

* Covering: ``N(R) = floor(pi e^{bR}) + 1`` balls of radius ``3(1 + 1/b)``
  centred at the points at distance ``R`` along evenly spaced rays cover the
  annulus ``R - 1 <= rho <= R + 1``.
* Chords: two points at distance ``R`` from ``O`` separated by angle
  ``theta`` satisfy ``2R + (2/a)(ln theta - 1) <= d <= 2R + (2/b)(ln theta + 1)``
  for ``R`` beyond some threshold.
* Volume comparison: ``sinh(a r)/a <= f(r) <= sinh(b r)/b`` whenever
  ``-b^2 <= K <= -a^2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CoverRangeError, UnsupportedOperationError
from .geometry import HyperbolicModel, ModelKind, polar_distance

EXP_GUARD = 700.0


def cover_count(R: float, b: float) -> int:
    """``floor(pi e^{bR}) + 1`` with an overflow guard at ``R b > 700``."""
    if R < 0 or b <= 0:
        raise ValueError("need R >= 0 and b > 0")
    if R * b > EXP_GUARD:
        raise CoverRangeError(f"R*b = {R * b:.6g} exceeds {EXP_GUARD}; e^(bR) would overflow")
    return int(math.floor(math.pi * math.exp(b * R))) + 1


@dataclass(frozen=True)
class AnnulusSpec:
    R: float
    model: HyperbolicModel

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError("annulus needs R > 1")

    @property
    def inner(self) -> float:
        return self.R - 1.0

    @property
    def outer(self) -> float:
        return self.R + 1.0


@dataclass(frozen=True)
class CoverSpec:
    """Ball centres at distance ``R`` on ``N`` evenly spaced rays.

    ``thinning`` divides the count (``N // thinning``, at least 1); it is a
    falsification control.
    """

    R: float
    b: float
    thinning: int = 1

    @property
    def N(self) -> int:
        return max(1, cover_count(self.R, self.b) // self.thinning)

    @property
    def radius(self) -> float:
        return 3.0 * (1.0 + 1.0 / self.b)

    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.N) / self.N

    def centers(self, model: HyperbolicModel) -> np.ndarray:
        return model.from_polar(np.full(self.N, float(self.R)), self.angles())


@dataclass(frozen=True)
class CoverResult:
    R: float
    N: int
    radius: float
    n_samples: int
    covered_fraction: float
    worst_excess: float
    samples: np.ndarray  # columns rho, theta, min_center_dist, covered

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rho", "theta", "min_center_dist", "covered"])
            for rho, th, d, c in self.samples:
                w.writerow([repr(float(rho)), repr(float(th)), repr(float(d)), int(c)])


def annulus_samples(annulus: AnnulusSpec, n_samples: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Stratified ``rho`` x ``theta`` grid with one jittered point per cell."""
    n_r = max(1, int(round(math.sqrt(n_samples / (2 * math.pi)))))
    n_t = max(1, math.ceil(n_samples / n_r))
    rng = np.random.default_rng(seed)
    i, j = np.meshgrid(np.arange(n_r), np.arange(n_t), indexing="ij")
    u = (i.ravel() + rng.random(i.size)) / n_r
    v = (j.ravel() + rng.random(j.size)) / n_t
    rho = annulus.inner + 2.0 * u
    theta = 2 * np.pi * v
    return rho[:n_samples], theta[:n_samples]


def nearest_center_distance(model: HyperbolicModel, spec: CoverSpec, rho, theta) -> np.ndarray:
    """Distance from each sample to its closest centre.

    On constant curvature the distance to a centre at radius ``R`` grows
    with the angular offset, so only the two angularly adjacent centres
    need checking.
    """
    N = spec.N
    step = 2 * np.pi / N
    k = np.floor(np.mod(theta, 2 * np.pi) / step)
    best = np.full(np.shape(rho), np.inf)
    for off in (0, 1):
        v = (k + off) * step
        best = np.minimum(best, polar_distance(rho, theta, spec.R, v, model.a))
    return best


def verify_cover(spec: CoverSpec, annulus: AnnulusSpec, n_samples: int = 10_000, seed: int = 0) -> CoverResult:
    model = annulus.model
    if not model.is_constant_curvature:
        raise UnsupportedOperationError("covering check needs point-to-point distances (constant curvature only)")
    if model.b != spec.b:
        raise ValueError("cover spec and model disagree on b")
    rho, theta = annulus_samples(annulus, n_samples, seed)
    d = nearest_center_distance(model, spec, rho, theta)
    covered = d <= spec.radius
    samples = np.column_stack([rho, theta, d, covered.astype(float)])
    return CoverResult(float(spec.R), spec.N, spec.radius, int(rho.size), float(np.mean(covered)),
                       float(np.max(d - spec.radius)), samples)


def measure_cover_threshold(model: HyperbolicModel, R_values: Sequence[float], n_samples: int = 10_000,
                            seed: int = 0, thinning: int = 1) -> float | None:
    """Smallest tested ``R`` from which every larger tested ``R`` is fully covered."""
    ok = []
    for R in R_values:
        res = verify_cover(CoverSpec(R, model.b, thinning), AnnulusSpec(R, model), n_samples, seed)
        ok.append(res.covered_fraction == 1.0)
    threshold = None
    for R, good in zip(reversed(list(R_values)), reversed(ok)):
        if not good:
            break
        threshold = float(R)
    return threshold


# ---------------------------------------------------------------------------
# chords
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChordResult:
    R: float
    theta: float
    d_exact: float
    lower: float
    upper: float
    passed: bool


def chord_length(R: float, theta: float, a: float) -> float:
    """Distance between two points at radius ``R`` separated by angle ``theta``."""
    return float(polar_distance(R, 0.0, R, theta, a))


def chord_bounds(R: float, theta: float, a: float, b: float) -> tuple[float, float]:
    return 2 * R + (2 / a) * (math.log(theta) - 1), 2 * R + (2 / b) * (math.log(theta) + 1)


def chord_bounds_check(R: float, theta: float, a: float = 1.0, b: float | None = None) -> ChordResult:
    b = a if b is None else b
    if not 0 < theta <= math.pi:
        raise ValueError(f"theta must lie in (0, pi], got {theta}")
    if a != b:
        raise UnsupportedOperationError("exact chord length needs constant curvature (a == b)")
    d = chord_length(R, theta, a)
    lo, hi = chord_bounds(R, theta, a, b)
    return ChordResult(float(R), float(theta), d, lo, hi, bool(lo <= d <= hi))


@dataclass(frozen=True)
class ChordSweep:
    R_values: tuple[float, ...]
    thetas: tuple[str, ...]
    passed: tuple[bool, ...]  # all thetas pass at each R
    R0_measured: float | None
    results: tuple[ChordResult, ...]


def chord_sweep(a: float = 1.0, R_values: Sequence[float] | None = None,
                thetas: Sequence[float | str] = ("exp(-R)", 0.01, 0.1, 1.0)) -> ChordSweep:
    """Sweep ``R`` and report the smallest ``R`` from which all later ``R`` pass.

    The entry ``"exp(-R)"`` stands for the angle ``e^{-R}``.
    """
    if R_values is None:
        R_values = np.arange(2.0, 20.0 + 1e-9, 0.5)
    results, passed = [], []
    for R in R_values:
        row = []
        for th in thetas:
            t = math.exp(-R) if th == "exp(-R)" else float(th)
            row.append(chord_bounds_check(float(R), t, a, a))
        results.extend(row)
        passed.append(all(r.passed for r in row))
    R0 = None
    for R, ok in zip(reversed(list(R_values)), reversed(passed)):
        if not ok:
            break
        R0 = float(R)
    return ChordSweep(tuple(map(float, R_values)), tuple(map(str, thetas)), tuple(passed), R0, tuple(results))


# ---------------------------------------------------------------------------
# Jacobi field / volume comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobiResult:
    lower_margin: float  # min of f/(sinh(ar)/a) - 1
    upper_margin: float  # min of (sinh(br)/b)/f - 1
    min_margin: float
    r_range: tuple[float, float]
    lower_ok: bool
    upper_ok: bool
    passed: bool


def jacobi_bounds_check(model: HyperbolicModel, r_samples=None, tol: float = 1e-10) -> JacobiResult:
    """Relative slack of ``sinh(ar)/a <= f(r) <= sinh(br)/b`` over samples.

    Margins are relative so that both sides are comparable at large ``r``;
    the check passes when both margins are ``>= -tol``.
    """
    if model.kind is not ModelKind.WARPED:
        raise UnsupportedOperationError("Jacobi comparison is stated for the warped model")
    if r_samples is None:
        r_samples = np.linspace(0.05, min(20.0 / model.a, model.rho_ceiling), 400)
    r = np.asarray(r_samples, dtype=float)
    f = model.warp.f(r)
    lo = np.sinh(model.a * r) / model.a
    hi = np.sinh(model.b * r) / model.b
    lm = float(np.min(f / lo - 1.0))
    um = float(np.min(hi / f - 1.0))
    lo_ok, hi_ok = lm >= -tol, um >= -tol
    return JacobiResult(lm, um, min(lm, um), (float(r.min()), float(r.max())), bool(lo_ok), bool(hi_ok),
                        bool(lo_ok and hi_ok))
