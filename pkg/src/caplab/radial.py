"""Radial minimizers of the regularized area-minus-potential energy on a ball.

On nodes 0 = r_0 < ... < r_N = R with u_N = 0 the discrete energy is

    E(u) = sum_i w_{i+1/2} dr_i [sqrt(1 + d_i^2) + eps/2 d_i^2] - sum_j V_j F~(u_j)

with d_i = (u_{i+1} - u_i)/dr_i, face weights w = |S^{n-1}| r^{n-1} at cell
midpoints and exact dual cell volumes V_j. Its gradient is the conservative
(finite-volume) form of the radial Euler-Lagrange equation, so the origin
needs no special stencil. Nodes are uniform in a computational variable and
graded toward r = R, where the boundary layer sits.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from scipy import linalg

from .errors import ContinuationFailureError, InsufficientDataError, InvalidInputError
from .profile import ProfileSolution
from .report import VerificationReport
from .truncation import TruncatedReaction

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RadialConfig:
    grid_points: int = 1024
    epsilon0: float = 1.0
    eps_factor: float = 0.25
    eps_stop: float = 1e-8
    newton_tol: float = 1e-11
    max_newton: int = 60
    max_damping_steps: int = 30
    # sinh grading length near r = R; None gives a uniform grid
    layer_scale: float | None = 1.0
    # cap on the largest cell; None keeps grid_points fixed
    max_spacing: float | None = None
    max_refinements: int = 2
    initial_guesses: tuple[str, ...] = ("cone", "zero")

    def __post_init__(self):
        if self.grid_points < 64:
            raise InvalidInputError("grid_points must be at least 64")
        if not 0.0 < self.epsilon0 <= 1.0:
            raise InvalidInputError("epsilon0 must lie in (0, 1]")
        if not 0.0 < self.eps_factor < 1.0:
            raise InvalidInputError("eps_factor must lie in (0, 1)")
        if self.layer_scale is not None and self.layer_scale <= 0:
            raise InvalidInputError("layer_scale must be positive")
        if self.max_spacing is not None and self.max_spacing <= 0:
            raise InvalidInputError("max_spacing must be positive")
        bad = set(self.initial_guesses) - {"cone", "zero"}
        if bad or not self.initial_guesses:
            raise InvalidInputError(f"unknown initial guesses {sorted(bad)}")

    def grid(self, R: float, n: int) -> "Grid":
        N = self.grid_points
        g = Grid(float(R), int(n), N, self.layer_scale)
        while self.max_spacing is not None and g.dr.max() > self.max_spacing:
            N = int(math.ceil(N * g.dr.max() / self.max_spacing))
            g = Grid(float(R), int(n), N, self.layer_scale)
        return g


class NullReaction:
    """f~ = 0, F~ = 0: the test mode whose minimizer is u = 0."""

    delta = 1.0
    L = 1.0
    kappa = -1.0
    mu_sequence: tuple[float, ...] = ()

    def f_tilde(self, u):
        return 0.0 * np.asarray(u, dtype=float)

    f_tilde_prime = f_tilde
    F_tilde = f_tilde

    def inf_F_tilde(self) -> float:
        return 0.0

    def gradient_bound(self) -> float:
        return 0.0


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def graded_nodes(R: float, N: int, layer_scale: float | None) -> np.ndarray:
    """r_i = R - l sinh(g (1 - i/N)) with sinh(g) = R/l, so the spacing near R
    is about l asinh(R/l)/N whatever R is."""
    if layer_scale is None:
        return np.linspace(0.0, R, N + 1)
    gam = math.asinh(R / layer_scale)
    eta = 1.0 - np.arange(N + 1) / N
    r = R - layer_scale * np.sinh(gam * eta)
    r[0], r[-1] = 0.0, R
    return r


@dataclass(frozen=True)
class Grid:
    R: float
    n: int
    N: int
    layer_scale: float | None = None

    @cached_property
    def r(self) -> np.ndarray:
        return graded_nodes(self.R, self.N, self.layer_scale)

    @cached_property
    def dr(self) -> np.ndarray:
        return np.diff(self.r)

    @property
    def h(self) -> float:
        """Spacing of the last cell, at the boundary."""
        return float(self.dr[-1])

    @cached_property
    def faces(self) -> np.ndarray:
        r = self.r
        return 0.5 * (r[1:] + r[:-1])

    @cached_property
    def face_weights(self) -> np.ndarray:
        """w_{i+1/2} for i = 0..N-1."""
        return sphere_area(self.n) * self.faces ** (self.n - 1)

    @cached_property
    def volumes(self) -> np.ndarray:
        """Exact measure of the shell around node j, j = 0..N."""
        edges = np.concatenate([[0.0], self.faces, [self.R]])
        return sphere_area(self.n) / self.n * np.diff(edges**self.n)


def _flux(d, eps):
    return d / np.sqrt(1.0 + d * d) + eps * d


def _flux_prime(d, eps):
    return (1.0 + d * d) ** -1.5 + eps


def discrete_energy(g: Grid, tr, u: np.ndarray, eps: float = 0.0) -> float:
    dr = g.dr
    d = np.diff(u) / dr
    area = np.sum(g.face_weights * dr * (np.sqrt(1.0 + d * d) + 0.5 * eps * d * d))
    return float(area - np.sum(g.volumes * tr.F_tilde(u)))


def discrete_residual(g: Grid, tr, u: np.ndarray, eps: float = 0.0) -> np.ndarray:
    """Residual of the radial equation at nodes 0..N-1 (divergence form)."""
    d = np.diff(u) / g.dr
    q = g.face_weights * _flux(d, eps)
    div = q.copy()
    div[1:] -= q[:-1]
    return div / g.volumes[:-1] + tr.f_tilde(u[:-1])


def _gradient(g: Grid, tr, u: np.ndarray, eps: float) -> np.ndarray:
    return -g.volumes[:-1] * discrete_residual(g, tr, u, eps)


def _hessian_banded(g: Grid, tr, u: np.ndarray, eps: float) -> np.ndarray:
    """Upper banded storage for solveh_banded."""
    dr = g.dr
    d = np.diff(u) / dr
    k = g.face_weights * _flux_prime(d, eps) / dr
    diag = k.copy()
    diag[1:] += k[:-1]
    diag -= g.volumes[:-1] * tr.f_tilde_prime(u[:-1])
    ab = np.zeros((2, g.N))
    ab[1] = diag
    ab[0, 1:] = -k[:-1]
    return ab


def _newton_direction(ab: np.ndarray, grad: np.ndarray) -> np.ndarray:
    shift = 0.0
    scale = float(np.max(np.abs(ab[1])))
    for _ in range(30):
        m = ab.copy()
        m[1] += shift
        try:
            return linalg.solveh_banded(m, -grad)
        except linalg.LinAlgError:
            shift = max(1e-10 * scale, 10.0 * shift)
    raise linalg.LinAlgError("Hessian could not be shifted to positive definite")


def newton_solve(g: Grid, tr, u0: np.ndarray, eps: float,
                 cfg: RadialConfig) -> tuple[np.ndarray, int]:
    """Damped Newton with an Armijo line search on the discrete energy."""
    u = u0.copy()
    u[-1] = 0.0
    E = discrete_energy(g, tr, u, eps)
    res = float(np.max(np.abs(discrete_residual(g, tr, u, eps))))
    for it in range(cfg.max_newton):
        if res <= cfg.newton_tol:
            return u, it
        grad = _gradient(g, tr, u, eps)
        step = _newton_direction(_hessian_banded(g, tr, u, eps), grad)
        slope = float(grad @ step)
        t = 1.0
        accepted = False
        for _ in range(cfg.max_damping_steps):
            trial = u.copy()
            trial[:-1] += t * step
            E_t = discrete_energy(g, tr, trial, eps)
            if E_t <= E + 1e-4 * t * slope + 1e-13 * abs(E):
                accepted = True
                break
            t *= 0.5
        res_t = float(np.max(np.abs(discrete_residual(g, tr, trial, eps))))
        if not accepted and not res_t < res:
            raise ContinuationFailureError(
                f"line search exhausted at eps={eps:g} (residual {res:.3e})", eps)
        if not np.all(np.isfinite(trial)):
            raise ContinuationFailureError(f"non-finite iterate at eps={eps:g}", eps)
        if np.max(np.abs(t * step)) < 1e-15 * (1.0 + np.max(np.abs(u))) and res_t >= res:
            # stalled at roundoff
            return trial, it + 1
        u, E, res = trial, E_t, res_t
    if res <= 100 * cfg.newton_tol:
        return u, cfg.max_newton
    raise ContinuationFailureError(
        f"Newton did not converge at eps={eps:g} (residual {res:.3e})", eps)


def initial_guess(kind: str, g: Grid, L: float) -> np.ndarray:
    r = g.r
    if kind == "zero":
        return np.zeros_like(r)
    cone = L * np.minimum(1.0, g.R - r)
    # smooth the kink over one cell
    smoothed = cone.copy()
    smoothed[1:-1] = 0.25 * cone[:-2] + 0.5 * cone[1:-1] + 0.25 * cone[2:]
    smoothed[0] = cone[0]
    smoothed[-1] = 0.0
    return smoothed


@dataclass(frozen=True)
class RadialSolution:
    R: float
    n: int
    r: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    energy: float
    epsilon_path: tuple[float, ...]
    tr: Any
    layer_scale: float | None = None
    eps_energies: tuple[float, ...] = ()
    eps_max_slope2: tuple[float, ...] = ()
    start: str = "cone"
    alternatives: dict[str, float] = field(default_factory=dict, compare=False)
    refinements: int = 0
    gradient_flag: bool = False

    @property
    def grid(self) -> Grid:
        return Grid(self.R, self.n, self.r.size - 1, self.layer_scale)

    @property
    def h(self) -> float:
        """Boundary cell width."""
        return float(self.r[-1] - self.r[-2])

    @property
    def face_slopes(self) -> np.ndarray:
        return np.diff(self.u) / np.diff(self.r)

    def boundary_slope(self) -> float:
        """u'(R) from a fourth-order one-sided stencil on the last five nodes."""
        x = self.r[-5:]
        return float(np.dot(fd_weights(x, self.R, 1), self.u[-5:]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "R": self.R, "n": self.n, "nodes": int(self.r.size),
            "delta": float(self.tr.delta), "layer_scale": self.layer_scale, "epsilon_path": list(self.epsilon_path),
            "eps_energies": list(self.eps_energies), "energy": self.energy,
            "start": self.start, "alternatives": dict(sorted(self.alternatives.items())),
            "refinements": self.refinements, "gradient_flag": self.gradient_flag,
            "u_min": float(self.u.min()), "u_max": float(self.u.max()),
            "boundary_slope": self.boundary_slope(),
        }


def fd_weights(x: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Weights of the m-th derivative at x0 exact for polynomials of degree < len(x)."""
    k = len(x)
    A = np.vander(x - x0, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[m] = math.factorial(m)
    return np.linalg.solve(A, rhs)


def _continuation(g: Grid, tr, u0: np.ndarray, cfg: RadialConfig):
    eps = cfg.epsilon0
    path, energies, slopes = [], [], []
    u = u0
    prev = None
    while True:
        u, _ = newton_solve(g, tr, u, eps, cfg)
        path.append(eps)
        energies.append(discrete_energy(g, tr, u, eps))
        slopes.append(float(np.max((np.diff(u) / g.dr) ** 2)))
        if prev is not None and np.max(np.abs(u - prev)) < cfg.eps_stop:
            break
        if eps < 1e-14:
            break
        prev = u
        eps *= cfg.eps_factor
    u, _ = newton_solve(g, tr, u, 0.0, cfg)
    path.append(0.0)
    energies.append(discrete_energy(g, tr, u, 0.0))
    slopes.append(float(np.max((np.diff(u) / g.dr) ** 2)))
    return u, tuple(path), tuple(energies), tuple(slopes)


def minimize_energy(tr: TruncatedReaction | NullReaction, R: float, n: int = 2,
                    cfg: RadialConfig | None = None, **overrides) -> RadialSolution:
    """Minimize the discrete energy with eps-continuation to eps = 0.

    Every start in ``cfg.initial_guesses`` is continued; the lowest final
    energy wins and the others are recorded in ``alternatives``.
    """
    cfg = cfg or RadialConfig()
    if overrides:
        cfg = RadialConfig(**{**cfg.__dict__, **overrides})
    if not R > 0:
        raise InvalidInputError("R must be positive")
    if n < 2:
        raise InvalidInputError("dimension n must be at least 2")
    bound = tr.gradient_bound()
    g = cfg.grid(R, n)
    for refinement in range(cfg.max_refinements + 1):
        runs = {}
        for kind in cfg.initial_guesses:
            runs[kind] = _continuation(g, tr, initial_guess(kind, g, tr.L), cfg)
        best = min(runs, key=lambda k: runs[k][2][-1])
        u, path, energies, slopes = runs[best]
        violated = max(slopes) > bound + 1e-8
        if not violated or refinement == cfg.max_refinements:
            break
        log.warning("gradient bound violated at R=%g on %d nodes; refining", R, g.N)
        g = Grid(g.R, g.n, 2 * g.N, g.layer_scale)
    u_prime = np.gradient(u, g.r, edge_order=2)
    u_prime[0] = 0.0
    return RadialSolution(
        R=float(R), n=int(n), r=g.r, u=u, u_prime=u_prime, energy=energies[-1],
        epsilon_path=path, tr=tr, layer_scale=g.layer_scale, eps_energies=energies, eps_max_slope2=slopes,
        start=best, alternatives={k: v[2][-1] for k, v in runs.items()},
        refinements=refinement, gradient_flag=violated,
    )


def radial_residual(s: RadialSolution) -> float:
    """Sup norm of the discrete equation at nodes r < R (eps = 0)."""
    return float(np.max(np.abs(discrete_residual(s.grid, s.tr, s.u, 0.0))))


def _solve_one(args):
    tr, R, n, cfg = args
    return minimize_energy(tr, R, n, cfg)


def sweep(tr, radii: Sequence[float], n: int = 2, cfg: RadialConfig | None = None,
          workers: int = 1) -> dict[float, RadialSolution]:
    """Independent minimizations keyed by radius."""
    cfg = cfg or RadialConfig()
    radii = [float(R) for R in radii]
    jobs = [(tr, R, n, cfg) for R in radii]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(_solve_one, jobs))
    else:
        sols = [_solve_one(j) for j in jobs]
    return {s.R: s for s in sorted(sols, key=lambda s: s.R)}


# ------------------------------------------------------------------ diagnostics


def level_set_localization(s: RadialSolution, rho: float) -> tuple[float, bool]:
    """Width R - min{r : u(r) < rho}; flag True when rho is never attained
    (u < rho everywhere)."""
    u, r = s.u, s.r
    below = u < rho
    if below.all():
        return float(s.R), True
    k = int(np.argmax(below))
    # linear interpolation between r[k-1] (u >= rho) and r[k] (u < rho)
    a, b = u[k - 1], u[k]
    x = r[k - 1] + (a - rho) / (a - b) * (r[k] - r[k - 1]) if a != b else r[k]
    return float(s.R - x), False


def is_positive(s: RadialSolution) -> bool:
    return bool(np.all(s.u[:-1] > 0))


def positivity_threshold(tr, R_lo: float, R_hi: float, n: int = 2,
                         cfg: RadialConfig | None = None, iterations: int = 8
                         ) -> dict[str, Any]:
    """Bisection for the smallest sampled R with u > 0 at interior nodes.

    Assumes positivity persists above the threshold; every sampled R and
    its outcome are returned.
    """
    samples: dict[float, bool] = {}

    def pos(R):
        samples[R] = is_positive(minimize_energy(tr, R, n, cfg))
        return samples[R]

    if pos(R_lo):
        return {"R0": R_lo, "bracket": [R_lo, R_lo], "samples": samples}
    if not pos(R_hi):
        return {"R0": None, "bracket": [R_lo, R_hi], "samples": samples}
    lo, hi = R_lo, R_hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if pos(mid) else (mid, hi)
    return {"R0": hi, "bracket": [lo, hi], "samples": dict(sorted(samples.items()))}


def potential_integral(s: RadialSolution) -> float:
    """Discrete integral of F~(u) over the ball."""
    return float(np.sum(s.grid.volumes * s.tr.F_tilde(s.u)))


def area_integral(s: RadialSolution) -> float:
    d = s.face_slopes
    g = s.grid
    return float(np.sum(g.face_weights * g.dr * np.sqrt(1.0 + d * d)))


def ball_measure(s: RadialSolution) -> float:
    return sphere_area(s.n) / s.n * s.R**s.n


def energy_sandwich(sols: Sequence[RadialSolution], stability: float = 0.10,
                    quad_tol: float = 1e-12) -> VerificationReport:
    """|B_R| <= I_R(u_R), a single constant bounding (I_R - |B_R|)/R over the
    sweep, and -C R <= int F~(u_R) <= 0."""
    if len(sols) < 2:
        raise InsufficientDataError("energy sandwich needs at least two radii")
    rep = VerificationReport("energy_sandwich")
    excess, pot = [], []
    for s in sols:
        I = s.energy
        lower = ball_measure(s)
        gap = I - lower
        rep.add(f"lower_bound[R={s.R:g}]", -gap, 1e-12 * lower, gap >= -1e-12 * lower, s.R)
        P = potential_integral(s)
        scale = float(np.sum(s.grid.volumes * np.abs(s.tr.F_tilde(s.u)))) + 1.0
        rep.add(f"potential_upper[R={s.R:g}]", P, quad_tol * scale, P <= quad_tol * scale,
                s.R)
        excess.append(gap / s.R)
        pot.append(-P / s.R)
    C = np.array(excess)
    spread = float((C.max() - C.min()) / C.mean()) if C.mean() > 0 else math.inf
    rep.add("energy_constant_stability", spread, 2 * stability, spread <= 2 * stability,
            None, C=float(C.max()), per_radius=[float(c) for c in C])
    Cp = np.array(pot)
    spread_p = float((Cp.max() - Cp.min()) / Cp.mean()) if Cp.mean() > 0 else 0.0
    rep.add("potential_constant_stability", spread_p, 2 * stability,
            spread_p <= 2 * stability, None, C=float(Cp.max()),
            per_radius=[float(c) for c in Cp])
    return rep


def convergence_to_profile(sweep_sols: Sequence[RadialSolution], p: ProfileSolution,
                           Y: float = 10.0, tol: float | None = None,
                           kappa: float | None = None) -> VerificationReport:
    """e(R) = sup_{y in [0, Y]} |u_R(R - y) - phi(y)| along the sweep."""
    sols = sorted(sweep_sols, key=lambda s: s.R)
    if len(sols) < 3:
        raise InsufficientDataError("convergence study needs at least 3 radii")
    if p.T < Y:
        raise InsufficientDataError(f"profile covers t <= {p.T:g} < Y = {Y:g}")
    phi = p.interpolant()
    rep = VerificationReport("convergence_to_profile")
    errs, slopes = [], []
    for s in sols:
        y = np.linspace(0.0, min(Y, s.R), 2001)
        uR = np.interp(s.R - y, s.r, s.u)
        diff = np.abs(uR - phi(y))
        k = int(np.argmax(diff))
        errs.append(float(diff[k]))
        slopes.append(abs(s.boundary_slope()))
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    worst = next((sols[i + 1].R for i in range(len(errs) - 1) if errs[i + 1] >= errs[i]),
                 None)
    rep.add("e_decreasing", errs[-1], errs[0], decreasing, worst,
            e=errs, radii=[s.R for s in sols])
    if tol is not None:
        rep.add("e_final", errs[-1], tol, errs[-1] <= tol, sols[-1].R)
    target = abs(kappa if kappa is not None else sols[0].tr.kappa)
    gaps = [abs(target - v) for v in slopes]
    mono = all(b < a for a, b in zip(gaps, gaps[1:]))
    rep.add("boundary_slope_monotone", gaps[-1], gaps[0], mono, None, slopes=slopes)
    return rep


def minimizer_check(s: RadialSolution, trials: int = 20, scale: float = 1e-2,
                    seed: int = 0, rtol: float = 1e-10) -> tuple[bool, float]:
    """Energy of u against random smooth perturbations vanishing at R.

    Returns (passed, worst relative excess E(u) - E(v)).
    """
    rng = np.random.default_rng(seed)
    g = s.grid
    E = discrete_energy(g, s.tr, s.u)
    worst = -math.inf
    x = s.r / s.R
    for _ in range(trials):
        k = rng.integers(1, 8)
        bump = rng.normal(size=k) @ np.cos(np.outer(np.arange(k) + 0.5, math.pi * x))
        v = s.u + scale * rng.uniform(0.1, 1.0) * bump
        v[-1] = 0.0
        Ev = discrete_energy(g, s.tr, v)
        worst = max(worst, (E - Ev) / abs(Ev))
    return worst <= rtol, worst
