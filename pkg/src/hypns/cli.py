"""Command-line front end: ``hypns {verify-family,estimates,geometry,all}``.

Configuration comes from built-in defaults, then an optional JSON file
(``--config``), then command-line flags. Exit codes: 0 all checks pass,
1 a verification failed, 2 bad usage or configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CoverRangeError, DegenerateFitError, HypnsError, InadmissibleProfileError
from .geometry import HyperbolicModel, WARP_PRESETS
from .harmonic import (
    FourierBoundaryData,
    barrier_sign_check,
    decay_bound_check,
    decay_exponent,
    extend,
)
from .hypcover import (
    AnnulusSpec,
    CoverSpec,
    chord_bounds_check,
    chord_sweep,
    cover_count,
    jacobi_bounds_check,
    measure_cover_threshold,
    verify_cover,
)
from .nsverify import (
    ExponentialProfile,
    SolutionFamily,
    default_grid,
    dissipation_identity_check,
    energy_inequality_report,
    family_variant,
    l1_gradnorm_report,
    nonuniqueness_certificate,
    residual_sample,
)
from .reporting import SCHEMA_VERSION, check, write_csv, write_json

log = logging.getLogger("hypns")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "all"
    model: str = "disk"
    a: float = 1.0
    b: float | None = None
    warp: str = "default"
    phi: str = "1:1:0"
    A: list = field(default_factory=lambda: [2.0, 4.0])
    t: float = 1.0
    t_max: float = 2.0
    rho_max: float | None = None
    n_rho: int = 128
    n_theta: int = 64
    samples: int = 200
    sample_rho: float = 5.0
    cover_R: list = field(default_factory=lambda: [6.0, 8.0, 10.0])
    cover_samples: int = 10_000
    cover_thinning: int = 1
    out: str = "hypns-out"
    seed: int = 0

    KEYS = ("model", "a", "b", "warp", "phi", "A", "t", "t_max", "rho_max", "n_rho", "n_theta", "samples",
            "sample_rho", "cover_R", "cover_samples", "cover_thinning", "out", "seed")

    def validate(self) -> None:
        if self.model not in ("disk", "warped"):
            raise ConfigError(f"model must be 'disk' or 'warped', got {self.model!r}")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ConfigError("a must be positive")
        b = self.b_value
        if b < self.a:
            raise ConfigError("b must satisfy b >= a")
        if self.model == "disk" and b != self.a:
            raise ConfigError("the disk model has constant curvature: b must equal a")
        if self.warp not in WARP_PRESETS:
            raise ConfigError(f"warp must be one of {WARP_PRESETS}")
        if not self.A or any(not (float(x) > 0) for x in self.A):
            raise ConfigError("A must be a non-empty list of positive numbers")
        for name in ("t_max", "sample_rho"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.t < 0:
            raise ConfigError("t must be nonnegative")
        if self.rho_max is not None and not self.rho_max > 0:
            raise ConfigError("rho_max must be positive")
        if self.n_rho < 4 or self.n_theta < 4 or self.samples < 1 or self.cover_samples < 1:
            raise ConfigError("node and sample counts must be positive (nodes >= 4)")
        if self.cover_thinning < 1:
            raise ConfigError("cover_thinning must be >= 1")
        if any(not R > 1 for R in self.cover_R):
            raise ConfigError("cover radii must exceed 1")

    @property
    def b_value(self) -> float:
        return float(self.a if self.b is None else self.b)

    def build_model(self) -> HyperbolicModel:
        if self.model == "disk":
            return HyperbolicModel.disk(self.a)
        return HyperbolicModel.warped(self.a, self.b_value, self.warp)

    def load_phi(self) -> FourierBoundaryData:
        text = str(self.phi)
        if ":" in text:
            return FourierBoundaryData.parse_inline(text)
        path = Path(text)
        if not path.is_file():
            raise ConfigError(f"boundary data file not found: {text}")
        return FourierBoundaryData.from_csv(path)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.KEYS}


def _listify(v, cast=float):
    if isinstance(v, (list, tuple)):
        return [cast(x) for x in v]
    if isinstance(v, str):
        return [cast(x) for x in v.replace(",", " ").split()]
    return [cast(v)]


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    merged: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(RunConfig.KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(data)
    for key in RunConfig.KEYS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    try:
        for key, v in merged.items():
            if key in ("A", "cover_R"):
                v = _listify(v)
            elif key in ("n_rho", "n_theta", "samples", "cover_samples", "cover_thinning", "seed"):
                v = int(v)
            elif key in ("a", "t", "t_max", "sample_rho") or (key in ("b", "rho_max") and v is not None):
                v = float(v)
            setattr(cfg, key, v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    cfg.validate()
    return cfg


def _header(cfg: RunConfig, kind: str) -> dict:
    return {"schema_version": SCHEMA_VERSION, "report": kind, "version": __version__, "config": cfg.to_dict()}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_verify_family(cfg: RunConfig) -> int:
    model = cfg.build_model()
    phi = cfg.load_phi()
    F = extend(phi, model)
    grid = default_grid(model, cfg.rho_max, cfg.n_rho, cfg.n_theta)
    variant = family_variant(model)
    t_grid = np.linspace(0.0, cfg.t_max, 9)
    checks, rows, families = [], [], []
    res_tol = 1e-6 if F.accuracy.value == "analytic" else 1e-4
    div_tol = 1e-8 if F.accuracy.value == "analytic" else 1e-5
    for A in cfg.A:
        sol = SolutionFamily(F, ExponentialProfile(A), variant)
        rs = residual_sample(sol, cfg.samples, cfg.t_max, cfg.sample_rho, cfg.seed)
        er = energy_inequality_report(sol, t_grid, grid)
        families.append({"A": A, "residual": rs, "energy": er})
        checks.append(check(f"residual[A={A:g}]", "U = psi dF with the matching pressure solves the equation",
                            rs.residual_max < res_tol, residual_max=rs.residual_max, tolerance=res_tol))
        checks.append(check(f"divergence[A={A:g}]", "d* U = 0", rs.divergence_max < div_tol,
                            divergence_max=rs.divergence_max, tolerance=div_tol))
        claim = "E(t) + 2 int_0^t D <= E(0); requires A >= 2 b^2"
        note = "" if er.admissible else f"A={A:g} is below the admissibility threshold 2b^2={er.threshold:g}"
        checks.append(check(f"energy[A={A:g}]", claim, er.passed, admissible=er.admissible, threshold=er.threshold,
                            max_ratio=float(er.ratios().max()), note=note))
        for r in er.rows:
            for q in ("E", "dissipation_full", "total", "ratio"):
                rows.append(["energy", A, r.t, q, float(getattr(r, q))])
    admissible = [A for A in dict.fromkeys(cfg.A) if ExponentialProfile(A).admissible(model.b)]
    certificate = None
    if len(admissible) >= 2:
        A1, A2 = admissible[:2]
        certificate = nonuniqueness_certificate(phi, model, A1, A2, grid, cfg.t, n_samples=cfg.samples,
                                                t_max=cfg.t_max, rho_sample=cfg.sample_rho, seed=cfg.seed)
        checks.append(check("nonuniqueness", "two admissible families share u0 and differ at t > 0",
                            certificate["certified"], gap=certificate["gap"], t=cfg.t))
        E0 = certificate["energy0"]
        p1, p2 = ExponentialProfile(A1), ExponentialProfile(A2)
        for t in t_grid:
            rows.append(["gap", f"{A1:g}|{A2:g}", float(t), "l2_gap", float((p1.psi(t) - p2.psi(t)) ** 2 * E0)])
    report = _header(cfg, "verify-family")
    report.update({"variant": variant.value, "families": families, "certificate": certificate, "checks": checks,
                   "passed": all(c["passed"] for c in checks)})
    out = Path(cfg.out)
    write_json(out / "report.json", report)
    write_csv(out / "tables.csv", ["table", "A", "t", "quantity", "value"], rows)
    _log_checks(checks)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_estimates(cfg: RunConfig) -> int:
    model = cfg.build_model()
    phi = cfg.load_phi()
    F = extend(phi, model)
    a = model.a
    checks = []
    result: dict = {}
    try:
        fit = decay_exponent(F, 0.0, (3.0 / a, 8.0 / a))
    except DegenerateFitError as exc:
        log.error("decay fit failed: %s", exc)
        report = _header(cfg, "estimates")
        report.update({"error": str(exc), "passed": False, "checks": [
            check("decay_fit", "|grad F| decays like e^{-a rho}", False, error=str(exc))]})
        write_json(Path(cfg.out) / "estimates.json", report)
        return EXIT_FAIL
    result["decay_fit"] = fit
    checks.append(check("decay_fit", "|grad F| decays like e^{-a rho}", abs(fit.delta_hat - a) <= 0.05 * a,
                        delta_hat=fit.delta_hat, expected=a))
    bound = decay_bound_check(F, 0.9 * a)
    result["decay_bound"] = bound
    checks.append(check("decay_bound", "|grad F| e^{delta rho} stays bounded for delta < a", bound.passed,
                        delta=bound.delta, C_measured=bound.C_measured))
    grid = default_grid(model, cfg.rho_max, cfg.n_rho, cfg.n_theta)
    if model.is_constant_curvature:
        ident = dissipation_identity_check(F, grid)
        result["dissipation_identity"] = ident
        checks.append(check("dissipation_identity", "int |nabla dF|^2 = a^2 int |dF|^2", ident.passed,
                            lhs=ident.lhs, rhs=ident.rhs, relative_gap=ident.relative_gap))
    else:
        result["dissipation_identity"] = {"skipped": "identity holds on constant curvature only"}
        barrier = barrier_sign_check(model, phi, 0.5 * a)
        result["barrier"] = barrier
        checks.append(check("barrier", "phi_bar -+ alpha e^{-delta rho} are sub/superharmonic", barrier.passed,
                            min_lap_sub=barrier.min_lap_sub, max_lap_super=barrier.max_lap_super))
    l1 = l1_gradnorm_report(F, n_rho=cfg.n_rho, n_theta=cfg.n_theta)
    result["l1"] = l1
    checks.append(check("l1_finiteness", "int |grad |grad F|^2| dV is finite", l1.passed, limit=l1.limit,
                        ratios=list(l1.ratios)))
    report = _header(cfg, "estimates")
    report.update({"results": result, "checks": checks, "passed": all(c["passed"] for c in checks)})
    write_json(Path(cfg.out) / "estimates.json", report)
    _log_checks(checks)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_geometry(cfg: RunConfig) -> int:
    a, b = cfg.a, cfg.b_value
    for R in cfg.cover_R:
        cover_count(R, b)  # raises CoverRangeError before any work
    checks: list = []
    result: dict = {}
    covers = []
    if a == b:
        disk = HyperbolicModel.disk(a)
        for R in cfg.cover_R:
            res = verify_cover(CoverSpec(R, b, cfg.cover_thinning), AnnulusSpec(R, disk), cfg.cover_samples, cfg.seed)
            covers.append({"R": R, "N": res.N, "radius": res.radius, "covered_fraction": res.covered_fraction,
                           "worst_excess": res.worst_excess, "thinning": cfg.cover_thinning})
            checks.append(check(f"cover[R={R:g}]", "N(R) balls of radius 3(1+1/b) cover the annulus",
                                res.covered_fraction == 1.0, covered_fraction=res.covered_fraction,
                                worst_excess=res.worst_excess, N=res.N))
        result["cover_threshold_measured"] = measure_cover_threshold(
            disk, sorted(cfg.cover_R), cfg.cover_samples, cfg.seed, cfg.cover_thinning)
        chord = chord_bounds_check(10.0, 0.1, a, a)
        sweep = chord_sweep(a)
        result["chord_example"] = chord
        result["chord_R0_measured"] = sweep.R0_measured
        result["chord_sweep"] = {"R": list(sweep.R_values), "all_pass": list(sweep.passed), "thetas": list(sweep.thetas)}
        checks.append(check("chord_bounds", "2R + (2/a)(ln th - 1) <= d <= 2R + (2/b)(ln th + 1) for large R",
                            chord.passed and sweep.R0_measured is not None, d_exact=chord.d_exact,
                            R0_measured=sweep.R0_measured))
    else:
        result["cover_skipped"] = "covering and chord checks need constant curvature (a == b)"
    result["cover"] = covers
    warped = HyperbolicModel.warped(a, b, cfg.warp if cfg.model == "warped" else "default",
                                    check_curvature=(cfg.warp != "flat"))
    jac = jacobi_bounds_check(warped)
    result["jacobi"] = jac
    checks.append(check("jacobi_bounds", "sinh(ar)/a <= f(r) <= sinh(br)/b", jac.passed, min_margin=jac.min_margin))
    report = _header(cfg, "geometry")
    report.update({"results": result, "checks": checks, "passed": all(c["passed"] for c in checks)})
    write_json(Path(cfg.out) / "geometry.json", report)
    _log_checks(checks)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_all(cfg: RunConfig) -> int:
    codes = [cmd_verify_family(cfg), cmd_estimates(cfg), cmd_geometry(cfg)]
    return max(codes)


COMMANDS = {"verify-family": cmd_verify_family, "estimates": cmd_estimates, "geometry": cmd_geometry, "all": cmd_all}


def _log_checks(checks) -> None:
    for c in checks:
        log.info("%-28s %s", c["name"], "PASS" if c["passed"] else "FAIL  (" + c["claim"] + ")")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings (flags override it)")
    common.add_argument("--model", choices=["disk", "warped"])
    common.add_argument("--a", type=float, help="upper curvature scale (K <= -a^2)")
    common.add_argument("--b", type=float, help="lower curvature scale (K >= -b^2)")
    common.add_argument("--warp", choices=list(WARP_PRESETS), help="warp profile preset")
    common.add_argument("--phi", help="boundary data: CSV path or inline 'k:a_k:b_k,...'")
    common.add_argument("--A", nargs="+", type=float, help="decay rates of psi(t) = exp(-A t/2)")
    common.add_argument("--t", type=float, help="time at which the L2 gap is certified")
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--rho-max", dest="rho_max", type=float, help="quadrature truncation radius")
    common.add_argument("--n-rho", dest="n_rho", type=int)
    common.add_argument("--n-theta", dest="n_theta", type=int)
    common.add_argument("--samples", type=int, help="random (t, p) samples for residual checks")
    common.add_argument("--cover-R", dest="cover_R", nargs="+", type=float)
    common.add_argument("--cover-samples", dest="cover_samples", type=int)
    common.add_argument("--cover-thinning", dest="cover_thinning", type=int,
                        help="divide the ball count by this factor (falsification control)")
    common.add_argument("--halve-cover", action="store_true", help="shorthand for --cover-thinning 2")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hypns", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hypns {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-family", parents=[common], help="residual, energy and non-uniqueness checks")
    sub.add_parser("estimates", parents=[common], help="decay, dissipation identity and L1 estimates")
    sub.add_parser("geometry", parents=[common], help="covering, chord and volume-comparison checks")
    sub.add_parser("all", parents=[common], help="run every suite")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.halve_cover and args.cover_thinning is None:
        args.cover_thinning = 2
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, CoverRangeError) as exc:
        print(f"hypns: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateFitError, InadmissibleProfileError) as exc:
        print(f"hypns: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except HypnsError as exc:
        print(f"hypns: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        # invalid model parameters surface as ValueError from the constructors
        print(f"hypns: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
