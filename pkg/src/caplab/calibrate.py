"""Grid-refinement studies that fix the verifier tolerances."""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .profile import profile_by_quadrature, profile_by_shooting
from .radial import RadialConfig, minimize_energy
from .reaction import ReactionTerm
from .truncation import TruncatedReaction
from .verify import (
    DEFAULT_TOLERANCES,
    boundary_identities,
    extend_profile_to_2d,
    modica_check,
    pohozaev_residual,
    radial_to_patch,
    subsolution_residual,
)

SAFETY = 10.0


def _order(coarse: float, fine: float) -> float | None:
    if coarse > 0 and fine > 0:
        return math.log2(coarse / fine)
    return None


def _round_up(x: float) -> float:
    """Next value of the form {1, 2, 5} x 10^k, so tables stay readable."""
    if x <= 0:
        return 0.0
    e = math.floor(math.log10(x))
    for m in (1, 2, 5, 10):
        v = float(f"{m}e{e}")
        if v >= x * (1 - 1e-12):
            return v
    return float(f"1e{e + 1}")


def _sub_row(name: str, c) -> dict[str, Any]:
    """c was computed with coefficient 1, so tolerance - roundoff = h^2 (1 + M3)."""
    return {"field": name, "h": c.extra["h"], "min_lhs": c.residual,
            "roundoff": c.extra["roundoff"], "scale": c.tolerance - c.extra["roundoff"]}


def run_calibration(r: ReactionTerm, tr: TruncatedReaction, radii=(25.0, 50.0),
                    grid_points: int = 1024, grad_floor: float = 0.05,
                    patch_points: int = 256, cfg: RadialConfig | None = None
                    ) -> dict[str, Any]:
    """Solve every study at two resolutions and freeze SAFETY x the worst
    observed error. Returns {"tolerances": ..., "studies": ...}."""
    cfg = cfg or RadialConfig()
    tol = dict(DEFAULT_TOLERANCES)
    studies: dict[str, Any] = {}

    # subsolution: strip at two profile spacings, patch at two patch spacings
    sub = []
    for dt in (2e-3, 1e-3):
        p = profile_by_quadrature(r, dt=dt)
        fld = extend_profile_to_2d(p, 10 * dt, 11)
        c = subsolution_residual(fld, r.f, r.F, grad_floor, {"subsolution_coeff": 1.0})
        sub.append(_sub_row("strip", c))
    sols = {}
    for N in (grid_points, 2 * grid_points):
        for R in radii:
            sols[(R, N)] = minimize_energy(tr, R, cfg=cfg, grid_points=N)
    for R in radii:
        s = sols[(R, grid_points)]
        for k in (1, 2):
            fld = radial_to_patch(s, R / (k * patch_points))
            c = subsolution_residual(fld, tr.f_tilde, tr.F_tilde, grad_floor,
                                     {"subsolution_coeff": 1.0})
            sub.append(_sub_row(f"ball R={R:g}", c))
    # coefficient needed to cover whatever the roundoff term does not
    coeff = max(max(-row["min_lhs"] - row["roundoff"], 0.0) / row["scale"] for row in sub)
    tol["subsolution_coeff"] = _round_up(max(SAFETY * coeff, 1e-3))
    studies["subsolution"] = sub

    # ball identities and Pohozaev under refinement
    poh, curv, beq, mod = [], [], [], []
    for R in radii:
        pc = pohozaev_residual(sols[(R, grid_points)]).residual
        pf = pohozaev_residual(sols[(R, 2 * grid_points)]).residual
        poh.append({"R": R, "coarse": pc, "fine": pf, "order": _order(pc, pf)})
        for N in (grid_points, 2 * grid_points):
            s = sols[(R, N)]
            rep = boundary_identities(s, tr.f_tilde, s.n, {"H_ball_rel": 1.0,
                                                           "boundary_equation": 1.0})
            curv.append({"R": R, "N": N, "rel_H_error": rep["recovered_H"].residual * R})
            beq.append({"R": R, "N": N, "residual": rep["boundary_equation"].residual,
                        "P_nu": rep["P_nu_identity"].residual})
            mod.append({"R": R, "N": N,
                        "excess": modica_check(s)["modica_bound"].residual})
    coarse_H = max(c["rel_H_error"] for c in curv if c["N"] == grid_points)
    tol["H_ball_rel"] = _round_up(SAFETY * coarse_H)
    coarse_eq = max(max(b["residual"], b["P_nu"]) for b in beq if b["N"] == grid_points)
    tol["boundary_equation"] = _round_up(SAFETY * coarse_eq)
    worst_mod = max(m["excess"] for m in mod)
    tol["modica_bound"] = max(DEFAULT_TOLERANCES["modica_bound"], _round_up(SAFETY * worst_mod))
    studies.update({"pohozaev": poh, "ball_curvature": curv, "boundary_equation": beq,
                    "modica": mod})
    studies["settings"] = {"radii": list(radii), "grid_points": grid_points,
                           "patch_points": patch_points, "safety": SAFETY,
                           "grad_floor": grad_floor}
    return {"tolerances": dict(sorted(tol.items())), "studies": studies}


def refinement_orders(values: list[float]) -> list[float | None]:
    return [_order(a, b) for a, b in zip(values, values[1:])]


def drift_study(r: ReactionTerm, T: float = 20.0, steps=(8e-3, 4e-3, 2e-3, 1e-3)
                ) -> dict[str, Any]:
    """Hamiltonian drift of the shooting profile under step halving."""
    drifts = []
    for h in steps:
        p = profile_by_shooting(r, T, h)
        drifts.append(float(np.max(np.abs(p.hamiltonian - p.hamiltonian[0]))))
    ratios = [a / b for a, b in zip(drifts, drifts[1:])]
    return {"steps": list(steps), "drifts": drifts, "ratios": ratios}
