"""Command-line entry point: ``caplab <command> [options]``.

Every command writes deterministic JSON (sorted keys, no timestamps) into
``--out``; wall-clock data goes to a separate ``<command>_meta.json``.
Exit codes: 0 pass, 1 check failure, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .calibrate import drift_study, refinement_orders, run_calibration
from .config import RunConfig, load_config
from .errors import AdmissibilityViolationError, CaplabError, InvalidInputError
from .export import (PROFILE_COLUMNS, RADIAL_COLUMNS, dump_json, profile_json, read_csv,
                     read_profile_csv, write_profile_csv, write_radial_csv)
from .physics import (CapillarySetup, height_scaling_exponent, plate_rise_height,
                      rise_height_closed_form)
from .profile import (ProfileSolution, assert_profile_characterization, method_agreement,
                      profile_by_quadrature, profile_by_shooting, terminal_diagnostics)
from .radial import (Grid, RadialSolution, convergence_to_profile, discrete_energy,
                     energy_sandwich, graded_nodes, is_positive, level_set_localization,
                     minimizer_check, sweep)
from .reaction import ReactionTerm, check_admissibility, reaction_from_declaration
from .report import CheckResult, VerificationReport
from .truncation import TruncatedReaction, truncate
from .verify import (boundary_identities, extend_profile_to_2d, gradient_bound_check,
                     hamiltonian_check, modica_check, pohozaev_residual, radial_residual_check,
                     radial_to_patch, subsolution_residual, tolerance)
from .verify import bounds_check

log = logging.getLogger("caplab")

SEED_ENV = "CAPLAB_SEED"  # reserved; the deterministic core never reads it


# ---------------------------------------------------------------- argument parsing


def _float_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
    p.add_argument("--out", type=Path, default=Path("."),
                   help="existing output directory (default: current directory)")
    p.add_argument("--workers", type=int, default=1, help="parallel sweep members")
    p.add_argument("--kappa", type=float, help="boundary slope, overrides the config")
    p.add_argument("--radius", type=_float_list,
                   help="comma-separated ball radii, overrides the config")
    p.add_argument("--expr", help="reaction term f(u) as an expression in u")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="caplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"caplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("admissibility", parents=[common],
                   help="check the reaction term hypotheses")

    p = sub.add_parser("profile", parents=[common],
                       help="build the parallel profile both ways and verify it")
    p.add_argument("--step", type=float, help="shooting step")
    p.add_argument("--T", type=float, dest="T", help="shooting horizon")

    p = sub.add_parser("ball", parents=[common],
                       help="radial minimization sweep with the full verifier battery")
    p.add_argument("--grid-points", type=int, help="radial cells per ball")

    p = sub.add_parser("verify", parents=[common],
                       help="run the verifier on exported profile or radial CSV files")
    p.add_argument("files", nargs="+", type=Path)

    p = sub.add_parser("capillary", parents=[common],
                       help="map SI capillary data to the normalized problem")
    p.add_argument("--rho", type=float, help="liquid density [kg/m^3]")
    p.add_argument("--rho0", type=float, help="surrounding fluid density [kg/m^3]")
    p.add_argument("--sigma", type=float, help="surface tension [N/m]")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta", type=float, help="wetting angle [rad]")
    g.add_argument("--theta-deg", type=float, help="wetting angle [degrees]")
    p.add_argument("--g", type=float, help="gravitational acceleration [m/s^2]")

    sub.add_parser("calibrate", parents=[common],
                   help="grid-refinement studies that freeze the verifier tolerances")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    over: dict[str, Any] = {}
    if args.kappa is not None:
        over["kappa"] = args.kappa
    if args.radius is not None:
        over["radii"] = args.radius
    if args.expr is not None:
        over["reaction"] = {"kind": "expression", "expr": args.expr}
    if getattr(args, "grid_points", None) is not None:
        over["radial"] = dataclasses.replace(cfg.radial, grid_points=args.grid_points)
    prof = {k: getattr(args, k, None) for k in ("step", "T")}
    prof = {k: v for k, v in prof.items() if v is not None}
    if prof:
        over["profile"] = dataclasses.replace(cfg.profile, **prof)
    return cfg.with_overrides(**over) if over else cfg


def _config_dict(cfg: RunConfig) -> dict[str, Any]:
    return dataclasses.asdict(cfg)


# ---------------------------------------------------------------- shared pieces


def _reaction(cfg: RunConfig) -> ReactionTerm:
    return reaction_from_declaration(cfg.reaction, cfg.kappa)


def _admissible_reaction(cfg: RunConfig) -> ReactionTerm:
    r = _reaction(cfg)
    rep = check_admissibility(r)
    if not rep.admissible:
        bad = next(c for c in rep.conditions if not c.passed)
        raise AdmissibilityViolationError(f"reaction term is not admissible: {bad.name} fails",
                                          bad.witness)
    return r


def _tagged(c: CheckResult, R: float) -> CheckResult:
    if "[R=" in c.check:
        return c
    return dataclasses.replace(c, check=f"{c.check}[R={R:g}]")


def _merge_tagged(rep: VerificationReport, other, R: float) -> None:
    for c in other:
        rep.append(_tagged(c, R))


def _ball_battery(s: RadialSolution, cfg: RunConfig, rep: VerificationReport) -> dict[str, Any]:
    """Per-radius checks; returns informational flags."""
    tol = cfg.tolerances
    tr = s.tr
    rep.merge(bounds_check(s))
    rep.append(radial_residual_check(s, tol))
    rep.append(pohozaev_residual(s, tol))
    _merge_tagged(rep, modica_check(s, tolerances=tol), s.R)
    rep.append(_tagged(gradient_bound_check(s, tolerances=tol), s.R))
    _merge_tagged(rep, boundary_identities(s, tr.f_tilde, s.n, tol), s.R)
    if s.n == 2:
        fld = radial_to_patch(s, s.R / cfg.patch_points)
        rep.append(_tagged(subsolution_residual(fld, tr.f_tilde, tr.F_tilde, cfg.grad_floor,
                                                tol), s.R))
    ok, worst = minimizer_check(s)
    rep.add(f"minimizer[R={s.R:g}]", worst, 1e-10, ok, None,
            note="relative energy excess over random admissible perturbations")
    width, degenerate = level_set_localization(s, cfg.localization_rho * tr.L)
    return {"positive": is_positive(s), "localization_width": width,
            "localization_degenerate": degenerate, "solution": s.to_dict()}


def _finish(rep: VerificationReport, payload: dict[str, Any], out: Path, name: str) -> int:
    payload = dict(payload)
    payload["report"] = rep.to_dict()
    dump_json(payload, out / f"{name}.json")
    for c in rep.failures():
        print(f"FAIL {c.check}: residual {c.residual:.3e} > tolerance {c.tolerance:.3e}")
    print(f"{name}: {len(rep) - len(rep.failures())}/{len(rep)} checks passed "
          f"-> {out / (name + '.json')}")
    return 0 if rep.passed else 1


def _manifest(out: Path, name: str, plots: list[dict[str, Any]]) -> None:
    dump_json({"plots": plots}, out / f"{name}_plots.json")


def _line(title: str, data: str, x: str, y: str | list[str], **kw) -> dict[str, Any]:
    return {"kind": "line", "title": title, "data": data, "x": x,
            "y": [y] if isinstance(y, str) else y, **kw}


# ---------------------------------------------------------------- commands


def cmd_admissibility(cfg: RunConfig, args, out: Path) -> int:
    r = _reaction(cfg)
    rep = check_admissibility(r)
    payload = {"command": "admissibility", "config": _config_dict(cfg),
               "reaction": {"label": r.label, "L": r.L, "inf_F": r.inf_F, "F0": r.F0},
               "admissibility": rep.to_dict()}
    dump_json(payload, out / "admissibility.json")
    for c in rep.conditions:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}")
    return 0 if rep.admissible else 1


def _profiles(cfg: RunConfig, r: ReactionTerm) -> tuple[ProfileSolution, ProfileSolution]:
    pc = cfg.profile
    q = profile_by_quadrature(r, pc.height_cut, dt=pc.dt)
    s = profile_by_shooting(r, pc.T, pc.step)
    return q, s


def _strip_checks(p: ProfileSolution, r: ReactionTerm, cfg: RunConfig,
                  rep: VerificationReport) -> None:
    dt = np.diff(p.t)
    if dt.size == 0 or np.ptp(dt) > 1e-9 * dt.max():
        rep.add(f"strip_grid[{p.method}]", float(np.ptp(dt)) if dt.size else math.nan, 0.0,
                True, None, note="non-uniform t grid; strip checks skipped")
        return
    fld = extend_profile_to_2d(p, 10 * float(dt[0]), 11)
    tag = f"[{p.method}]"
    for c in boundary_identities(fld, r.f, 2, cfg.tolerances, F=r.F):
        rep.append(dataclasses.replace(c, check=c.check + tag))
    c = subsolution_residual(fld, r.f, r.F, cfg.grad_floor, cfg.tolerances)
    rep.append(dataclasses.replace(c, check=c.check + tag))


def cmd_profile(cfg: RunConfig, args, out: Path) -> int:
    r = _admissible_reaction(cfg)
    tol = cfg.tolerances
    q, s = _profiles(cfg, r)
    rep = VerificationReport("profile")
    for p in (q, s):
        rep.merge(assert_profile_characterization(p, r), prefix=f"{p.method}:")
        for c in modica_check(p, r, tol):
            rep.append(dataclasses.replace(c, check=f"{c.check}[{p.method}]"))
        c = gradient_bound_check(p, r, tol)
        rep.append(dataclasses.replace(c, check=f"{c.check}[{p.method}]"))
        _strip_checks(p, r, cfg, rep)
    c = hamiltonian_check(s, r, tol)
    rep.append(c)
    rep.append(method_agreement(q, s, tol=tolerance("method_agreement", tol)))
    diag = terminal_diagnostics(s, r)
    slope_tol = tolerance("terminal_slope", tol)
    rep.add("terminal_slope", abs(diag["terminal_slope"]), slope_tol,
            abs(diag["terminal_slope"]) <= slope_tol, s.T)
    paths = {}
    for p in (q, s):
        paths[p.method] = write_profile_csv(p, out / f"profile_{p.method}.csv").name
    plots = [_line("parallel profile", paths[p.method], "t", "phi", method=p.method)
             for p in (q, s)]
    plots.append(_line("Hamiltonian along the shooting profile", paths[s.method], "t",
                       "hamiltonian"))
    _manifest(out, "profile", plots)
    payload = {"command": "profile", "config": _config_dict(cfg),
               "profiles": {p.method: profile_json(p) for p in (q, s)},
               "files": paths, "terminal": diag}
    return _finish(rep, payload, out, "profile")


def cmd_ball(cfg: RunConfig, args, out: Path) -> int:
    if not cfg.radii:
        raise InvalidInputError("ball needs at least one radius (--radius)")
    r = _admissible_reaction(cfg)
    tr = truncate(r, cfg.delta_hint, mu_count=cfg.mu_count)
    sols = sweep(tr, cfg.radii, cfg.dimension, cfg.radial, workers=max(args.workers, 1))
    rep = VerificationReport("ball")
    flags: dict[str, Any] = {}
    files = {}
    for R, s in sols.items():
        flags[f"{R:g}"] = _ball_battery(s, cfg, rep)
        files[f"{R:g}"] = write_radial_csv(s, out / f"ball_R{R:g}.csv").name
    ordered = [sols[R] for R in sorted(sols)]
    skipped = []
    if len(ordered) >= 2:
        rep.merge(energy_sandwich(ordered))
    else:
        skipped.append("energy_sandwich: needs two radii")
    if len(ordered) >= 3:
        p = profile_by_shooting(r, max(cfg.profile.T, cfg.convergence_window), cfg.profile.step)
        rep.merge(convergence_to_profile(ordered, p, cfg.convergence_window))
    else:
        skipped.append("convergence_to_profile: needs three radii")
    plots = [_line(f"ball solution R={R}", f, "r", "u") for R, f in files.items()]
    _manifest(out, "ball", plots)
    payload = {"command": "ball", "config": _config_dict(cfg), "files": files,
               "flags": flags, "skipped": skipped,
               "truncation": {"delta": tr.delta, "L": tr.L, "mu": list(tr.mu_sequence),
                              "gradient_bound": tr.gradient_bound()}}
    for R, fl in flags.items():
        if not fl["positive"]:
            print(f"note: R={R} minimizer is not positive (below the positivity threshold)")
    return _finish(rep, payload, out, "ball")


def _radial_from_csv(path: Path, tr: TruncatedReaction, cfg: RunConfig) -> RadialSolution:
    d = read_csv(path)
    r, u = d["r"], d["u"]
    R, N = float(r[-1]), r.size - 1
    if N < 4 or r[0] != 0.0:
        raise InvalidInputError(f"{path}: radial data must start at r = 0 with >= 5 nodes")
    for ls in (cfg.radial.layer_scale, None):
        if np.allclose(graded_nodes(R, N, ls), r, rtol=0, atol=1e-12 * R):
            break
    else:
        raise InvalidInputError(f"{path}: nodes match neither the graded nor the uniform grid")
    g = Grid(R, cfg.dimension, N, ls)
    slopes = np.diff(u) / np.diff(r)
    return RadialSolution(R=R, n=cfg.dimension, r=r, u=u, u_prime=d["u_prime"],
                          energy=discrete_energy(g, tr, u), epsilon_path=(0.0,), tr=tr,
                          layer_scale=ls, eps_energies=(discrete_energy(g, tr, u),),
                          eps_max_slope2=(float(np.max(slopes**2)),), start="file")


def cmd_verify(cfg: RunConfig, args, out: Path) -> int:
    r = _admissible_reaction(cfg)
    tr = None
    rep = VerificationReport("verify")
    inputs: dict[str, Any] = {}
    for path in args.files:
        cols = set(read_csv(path))
        if set(PROFILE_COLUMNS) <= cols:
            p = read_profile_csv(path, r.L, method=path.stem)
            sub = VerificationReport()
            sub.merge(assert_profile_characterization(p, r))
            sub.append(hamiltonian_check(p, r, cfg.tolerances))
            sub.merge(modica_check(p, r, cfg.tolerances))
            sub.append(gradient_bound_check(p, r, cfg.tolerances))
            _strip_checks(p, r, cfg, sub)
            inputs[path.name] = {"kind": "profile", "T": p.T, "nodes": int(p.t.size)}
        elif set(RADIAL_COLUMNS) <= cols:
            tr = tr or truncate(r, cfg.delta_hint, mu_count=cfg.mu_count)
            s = _radial_from_csv(path, tr, cfg)
            sub = VerificationReport()
            inputs[path.name] = {"kind": "radial", **_ball_battery(s, cfg, sub)}
        else:
            raise InvalidInputError(f"{path}: unrecognized columns {sorted(cols)}")
        rep.merge(sub, prefix=f"{path.name}:")
    return _finish(rep, {"command": "verify", "config": _config_dict(cfg), "inputs": inputs},
                   out, "verify")


def _setup(cfg: RunConfig, args) -> CapillarySetup:
    data = dict(cfg.physics or {})
    for k in ("rho", "rho0", "sigma", "theta", "g"):
        v = getattr(args, k, None)
        if v is not None:
            data[k] = v
    if getattr(args, "theta_deg", None) is not None:
        data["theta"] = math.radians(args.theta_deg)
    missing = {"rho", "rho0", "sigma", "theta"} - set(data)
    if missing:
        raise InvalidInputError(f"capillary needs {sorted(missing)} (flags or physics: config)")
    try:
        return CapillarySetup(**{k: float(v) for k, v in data.items()})
    except TypeError as exc:
        raise InvalidInputError(f"bad physics section: {exc}") from None


def cmd_capillary(cfg: RunConfig, args, out: Path) -> int:
    c = _setup(cfg, args)
    height, p = plate_rise_height(c)
    closed = rise_height_closed_form(c.b, c.theta)
    ell = c.capillary_length
    bs = tuple(c.b * m for m in (0.1, 1.0, 10.0))
    expo = height_scaling_exponent(c.theta, bs)
    path = write_profile_csv(p, out / "capillary_profile.csv")
    rep = VerificationReport("capillary")
    err = abs(height - closed)
    rep.add("wilhelmy_height", err, 1e-4 * ell, err <= 1e-4 * ell, p.T,
            numerical=height, closed_form=closed)
    rep.add("height_scaling_exponent", abs(expo + 0.5), 0.005, abs(expo + 0.5) <= 0.005,
            None, exponent=expo, b_values=list(bs))
    print(f"b = {c.b:.10g} 1/m^2")
    print(f"kappa = {c.kappa:.10g}")
    print(f"c_h = {c.c_h:.10g} m")
    print(f"profile: {path}")
    _manifest(out, "capillary", [_line("meniscus at a vertical plate", path.name, "t", "phi")])
    payload = {"command": "capillary", "setup": dataclasses.asdict(c),
               "derived": {"b": c.b, "kappa": c.kappa, "c_h": c.c_h,
                           "capillary_length": ell},
               "profile_csv": path.name}
    return _finish(rep, payload, out, "capillary")


def cmd_calibrate(cfg: RunConfig, args, out: Path) -> int:
    r = _admissible_reaction(cfg)
    tr = truncate(r, cfg.delta_hint, mu_count=cfg.mu_count)
    radii = tuple(cfg.radii[:2]) if len(cfg.radii) >= 2 else (25.0, 50.0)
    cal = run_calibration(r, tr, radii=radii, grid_points=cfg.radial.grid_points,
                          grad_floor=cfg.grad_floor, cfg=cfg.radial)
    drift = drift_study(r)
    rep = VerificationReport("calibrate")
    for row in cal["studies"]["pohozaev"]:
        order = row["order"] if row["order"] is not None else math.nan
        rep.add(f"pohozaev_order[R={row['R']:g}]", order, 1.5, order >= 1.5, row["R"],
                coarse=row["coarse"], fine=row["fine"])
    worst = min(drift["ratios"])
    rep.add("drift_halving_ratio", worst, 8.0, worst >= 8.0, None, ratios=drift["ratios"])
    dump_json(cal["tolerances"], out / "tolerances.json")
    payload = {"command": "calibrate", "config": _config_dict(cfg),
               "studies": {**cal["studies"], "drift": drift,
                           "drift_orders": refinement_orders(drift["drifts"])},
               "tolerances": cal["tolerances"]}
    return _finish(rep, payload, out, "calibrate")


COMMANDS = {
    "admissibility": cmd_admissibility,
    "profile": cmd_profile,
    "ball": cmd_ball,
    "verify": cmd_verify,
    "capillary": cmd_capillary,
    "calibrate": cmd_calibrate,
}


def _write_meta(out: Path, command: str, argv: list[str], started: float, code: int) -> None:
    meta = {
        "command": command,
        "argv": argv,
        "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "elapsed_s": round(time.time() - started, 3),
        "exit_code": code,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        SEED_ENV: os.environ.get(SEED_ENV),
    }
    dump_json(meta, out / f"{command}_meta.json")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    out: Path = args.out
    try:
        if not out.is_dir():
            raise InvalidInputError(f"output directory does not exist: {out}")
        if args.workers < 1:
            raise InvalidInputError("--workers must be at least 1")
        cfg = _resolve_config(args)
        code = COMMANDS[args.command](cfg, args, out)
    except CaplabError as exc:
        print(f"caplab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = exc.exit_code
    except (ArithmeticError, np.linalg.LinAlgError):
        log.exception("numerical failure")
        code = 3
    if out.is_dir():
        _write_meta(out, args.command, argv, started, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
