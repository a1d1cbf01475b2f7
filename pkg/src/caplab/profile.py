"""One-dimensional parallel profile phi'' / (1 + phi'^2)^(3/2) + f(phi) = 0,
phi(0) = 0, phi'(0) = |kappa|, built two independent ways."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy import interpolate

from .errors import AdmissibilityViolationError, DivergenceError, InvalidInputError
from .quadrature import gauss16
from .reaction import ReactionTerm, check_admissibility
from .report import CheckResult, VerificationReport


@dataclass(frozen=True)
class ProfileSolution:
    t: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray
    hamiltonian: np.ndarray
    L_target: float
    method: str
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def T(self) -> float:
        return float(self.t[-1]) if self.t.size else 0.0

    def interpolant(self):
        """C^1 Hermite interpolant of phi on the t grid."""
        return interpolate.CubicHermiteSpline(self.t, self.phi, self.phi_prime)

    def phi_second(self, r: ReactionTerm) -> np.ndarray:
        """phi'' taken from the ODE itself."""
        q = 1.0 + self.phi_prime**2
        return -np.asarray(r.f(self.phi)) * q**1.5


def hamiltonian(r: ReactionTerm, phi, phi_prime) -> np.ndarray:
    return np.asarray(r.F(phi)) - 1.0 / np.sqrt(1.0 + np.asarray(phi_prime) ** 2)


def _require_admissible(r: ReactionTerm) -> None:
    rep = check_admissibility(r)
    if not rep.admissible:
        bad = next(c for c in rep.conditions if not c.passed)
        raise AdmissibilityViolationError(
            f"reaction term is not admissible: {bad.name} fails", bad.witness)


def slope_from_height(r: ReactionTerm, phi) -> np.ndarray:
    """phi' on the level set H = -1: sqrt((F(phi) + 1)^-2 - 1)."""
    Fp = np.asarray(r.F(phi)) + 1.0
    return np.sqrt(np.maximum(Fp**-2 - 1.0, 0.0))


def profile_by_quadrature(r: ReactionTerm, height_cut: float = 0.999,
                          dt: float = 1e-3) -> ProfileSolution:
    """Invert t(phi) = int_0^phi ds / sqrt((F(s)+1)^-2 - 1) onto a uniform t grid.

    The integrand is singular at phi = L, so the profile stops at
    L * height_cut; the cut is kept in ``meta``.
    """
    if not 0.0 < height_cut < 1.0:
        raise InvalidInputError("height_cut must lie in (0, 1)")
    _require_admissible(r)
    L = r.L
    top = L * height_cut

    # the integrand must be real on [0, top]
    s = np.linspace(0.0, top, 20001)
    Fp = np.asarray(r.F(s)) + 1.0
    bad = (Fp <= 0.0) | (Fp >= 1.0)
    bad[0] = Fp[0] <= 0.0 or Fp[0] > 1.0
    if bad.any():
        where = float(s[np.argmax(bad)])
        raise AdmissibilityViolationError(
            f"integrand is not real at s={where:.6g} (F(s)+1={Fp[np.argmax(bad)]:.6g})",
            where)

    def inv_slope(x):
        return 1.0 / slope_from_height(r, x)

    # panels graded geometrically toward the singular end
    gap = L - top
    frac = np.geomspace(L, gap, 400)
    edges = np.unique(np.concatenate([np.linspace(0.0, top, 200), L - frac]))
    edges = edges[(edges >= 0.0) & (edges <= top)]
    for _ in range(6):
        mids = 0.5 * (edges[:-1] + edges[1:])
        whole = gauss16(inv_slope, edges[:-1], edges[1:])
        halves = gauss16(inv_slope, edges[:-1], mids) + gauss16(inv_slope, mids, edges[1:])
        bad = np.abs(whole - halves) > 1e-14 * (1.0 + np.abs(halves))
        if not bad.any():
            break
        edges = np.sort(np.concatenate([edges, mids[bad]]))
    else:
        halves = gauss16(inv_slope, edges[:-1], 0.5 * (edges[:-1] + edges[1:])) + \
            gauss16(inv_slope, 0.5 * (edges[:-1] + edges[1:]), edges[1:])
    t_edges = np.concatenate([[0.0], np.cumsum(halves)])
    T = float(t_edges[-1])

    n = max(int(math.ceil(T / dt)), 1) + 1
    t = np.linspace(0.0, T, n)
    guess = interpolate.PchipInterpolator(t_edges, edges)(t)
    phi = guess.copy()
    for _ in range(6):
        k = np.clip(np.searchsorted(edges, phi, side="right") - 1, 0, edges.size - 2)
        t_of_phi = t_edges[k] + gauss16(inv_slope, edges[k], phi)
        step = (t_of_phi - t) * slope_from_height(r, phi)
        phi = np.clip(phi - step, 0.0, top)
        if np.max(np.abs(step)) < 1e-15:
            break
    phi[0], phi[-1] = 0.0, top
    phi_prime = slope_from_height(r, phi)
    phi_prime[0] = abs(r.kappa)
    return ProfileSolution(
        t=t, phi=phi, phi_prime=phi_prime, hamiltonian=hamiltonian(r, phi, phi_prime),
        L_target=L, method="quadrature", meta={"height_cut": height_cut, "dt": dt},
    )


def profile_by_shooting(r: ReactionTerm, T: float, step: float,
                        exit_margin: float | None = None) -> ProfileSolution:
    """Classical RK4 on (phi, phi') from (0, |kappa|); the Hamiltonian is
    recorded at every step as a drift diagnostic.

    Raises DivergenceError if phi leaves [-m, L + m], m = ``exit_margin``
    (default 0.1 L).
    """
    if T < 0 or step <= 0:
        raise InvalidInputError("need T >= 0 and step > 0")
    _require_admissible(r)
    L = r.L
    m = 0.1 * L if exit_margin is None else exit_margin
    n = int(round(T / step))
    f = r.f

    def acc(y: float, p: float) -> float:
        q = 1.0 + p * p
        return -float(f(y)) * q * math.sqrt(q)

    ys = np.empty(n + 1)
    ps = np.empty(n + 1)
    y, p = 0.0, abs(r.kappa)
    ys[0], ps[0] = y, p
    h = step
    for i in range(n):
        k1y, k1p = p, acc(y, p)
        k2y = p + 0.5 * h * k1p
        k2p = acc(y + 0.5 * h * k1y, k2y)
        k3y = p + 0.5 * h * k2p
        k3p = acc(y + 0.5 * h * k2y, k3y)
        k4y = p + h * k3p
        k4p = acc(y + h * k3y, k4y)
        y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if not (-m <= y <= L + m) or not math.isfinite(p):
            raise DivergenceError(
                f"phi left [{-m:.3g}, {L + m:.3g}] at t={(i + 1) * h:.6g}", (i + 1) * h)
        ys[i + 1], ps[i + 1] = y, p
    t = np.arange(n + 1) * h
    return ProfileSolution(
        t=t, phi=ys, phi_prime=ps, hamiltonian=hamiltonian(r, ys, ps), L_target=L,
        method="shooting", meta={"T": T, "step": step},
    )


def rescaled(p: ProfileSolution, r: ReactionTerm, factor: float) -> ProfileSolution:
    """Profile with phi and phi' multiplied by ``factor`` (no longer a solution)."""
    phi, dphi = p.phi * factor, p.phi_prime * factor
    return replace(p, phi=phi, phi_prime=dphi, hamiltonian=hamiltonian(r, phi, dphi),
                   method=f"{p.method}*{factor:g}")


def terminal_diagnostics(p: ProfileSolution, r: ReactionTerm) -> dict[str, float]:
    """Terminal slope, height gap and an observed exponential approach rate."""
    out = {
        "T": p.T,
        "terminal_slope": float(p.phi_prime[-1]),
        "terminal_gap": float(p.L_target - p.phi[-1]),
        "terminal_curvature": float(abs(p.phi_second(r)[-1])),
    }
    # fit log(L - phi) where the gap is small enough to be in the linear
    # regime and large enough to be clear of roundoff growth near the saddle
    gap = p.L_target - p.phi
    sel = (gap > 1e-6 * p.L_target) & (gap < 1e-2 * p.L_target)
    if np.count_nonzero(sel) > 2:
        out["approach_rate"] = float(-np.polyfit(p.t[sel], np.log(gap[sel]), 1)[0])
    return out


def assert_profile_characterization(p: ProfileSolution, r: ReactionTerm,
                                    tolerances: dict[str, float] | None = None
                                    ) -> VerificationReport:
    """Recover the admissibility conditions from a computed profile."""
    tol = {
        "hamiltonian_drift": 1e-8,
        "recovered_F0": 1e-8,
        "recovered_F_L": 1e-5,
        "recovered_f_L": 1e-3,
        # slopes within this of zero are below the saddle's roundoff amplification
        "slope_noise": 1e-6,
    }
    tol.update(tolerances or {})
    rep = VerificationReport(f"profile_characterization[{p.method}]")
    if p.t.size < 3 or p.T <= 0:
        rep.add("data_sufficiency", float(p.t.size), 3.0, False, None,
                note="profile has fewer than 3 nodes or T = 0")
        return rep
    rep.add("data_sufficiency", float(p.t.size), 3.0, True, None)

    H = hamiltonian(r, p.phi, p.phi_prime)
    drift = np.abs(H - H[0])
    k = int(np.argmax(drift))
    rep.add("hamiltonian_drift", float(drift[k]), tol["hamiltonian_drift"],
            drift[k] <= tol["hamiltonian_drift"], float(p.t[k]))

    inner = p.phi[1:]
    k = int(np.argmin(inner))
    rep.add("phi_positive", float(inner[k]), 0.0, inner[k] > 0, float(p.t[1 + k]))
    over = p.phi - p.L_target
    k = int(np.argmax(over))
    rep.add("phi_below_L", float(over[k]), 0.0, over[k] < 0, float(p.t[k]))
    dp = p.phi_prime[1:]
    k = int(np.argmin(dp))
    rep.add("phi_increasing", float(dp[k]), tol["slope_noise"], dp[k] > -tol["slope_noise"],
            float(p.t[1 + k]))

    # F along the profile, read off the conserved Hamiltonian H(0)
    F_rec = H[0] + 1.0 / np.sqrt(1.0 + p.phi_prime**2)
    F0_rec = float(F_rec[0])
    dev = abs(F0_rec - r.F0_target)
    rep.add("recovered_F0", dev, tol["recovered_F0"], dev <= tol["recovered_F0"], 0.0)
    FL = float(F_rec[-1])
    rep.add("recovered_F_L", abs(FL), tol["recovered_F_L"], abs(FL) <= tol["recovered_F_L"],
            p.T)
    fL = abs(float(r.f(p.phi[-1])))
    # relative to the size of f along the profile
    f_tol = tol["recovered_f_L"] * (1.0 + float(np.max(np.abs(r.f(p.phi)))))
    rep.add("recovered_f_L", fL, f_tol, fL <= f_tol, p.T)
    # F touches zero quadratically at L; strict sign is tested below (1 - 1e-3) L
    below = np.flatnonzero(p.phi <= (1.0 - 1e-3) * p.L_target)
    k = int(below[np.argmax(F_rec[below])])
    rep.add("recovered_F_negative", float(F_rec[k]), 0.0, F_rec[k] < 0, float(p.t[k]))
    k = int(np.argmin(F_rec))
    rep.add("recovered_inf_F", float(F_rec[k] + 1.0), 0.0, F_rec[k] > -1.0, float(p.t[k]))
    return rep


def method_agreement(a: ProfileSolution, b: ProfileSolution, fraction: float = 0.99,
                     tol: float = 1e-6) -> CheckResult:
    """Sup |phi_a - phi_b| over the nodes of ``a`` with phi_a <= fraction * L,
    with ``b`` evaluated through its Hermite interpolant."""
    sel = (a.phi <= fraction * a.L_target) & (a.t <= b.T)
    if not sel.any():
        return CheckResult("method_agreement", math.nan, tol, False, None,
                           note="no common nodes below the height cut")
    diff = np.abs(b.interpolant()(a.t[sel]) - a.phi[sel])
    k = int(np.argmax(diff))
    return CheckResult("method_agreement", float(diff[k]), tol, float(diff[k]) <= tol,
                       float(a.t[sel][k]), extra={"nodes": int(sel.sum()),
                                                  "fraction": fraction})
