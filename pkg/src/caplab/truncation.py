"""C^1 truncation of an admissible reaction term outside [0, L]."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, TruncationInfeasibleError
from .reaction import ReactionTerm, check_admissibility

_C_REF = 1.0 - math.sqrt(2.0) / 2.0  # gap -F(0) at kappa = -1


@dataclass(frozen=True)
class Margins:
    """Bounds on F~: ``lower <= F~ <= upper`` for u <= 0 and
    ``F~ >= close`` on [L - 2 delta, L]."""

    lower: float
    upper: float
    close: float
    general_kappa: bool

    @classmethod
    def for_kappa(cls, kappa: float, F0: float) -> "Margins":
        if kappa == -1.0:
            return cls(math.sqrt(2.0) / 4.0 - 1.0, -0.25, -0.125, False)
        gap = -F0
        return cls(-1.0 + (1.0 + F0) / 2.0, -0.25 * gap / _C_REF,
                   -0.125 * gap / _C_REF, True)


@dataclass(frozen=True)
class TruncatedReaction:
    base: ReactionTerm
    delta: float
    margins: Margins
    mu_sequence: tuple[float, ...] = field(default=())

    @property
    def L(self) -> float:
        return self.base.L

    @property
    def kappa(self) -> float:
        return self.base.kappa

    def _ends(self):
        b = self.base
        f0, d0 = float(b.f(0.0)), float(b.f_prime(0.0))
        fL, dL = float(b.f(self.L)), float(b.f_prime(self.L))
        return f0, d0, fL, dL

    def f_tilde(self, u):
        u_arr = np.asarray(u, dtype=float)
        d, L = self.delta, self.L
        f0, d0, fL, dL = self._ends()
        out = np.zeros_like(u_arr)
        left = (u_arr > -d) & (u_arr < 0)
        s = (u_arr[left] + d) / d
        out[left] = f0 * (3 * s**2 - 2 * s**3) + d * d0 * (s**3 - s**2)
        mid = (u_arr >= 0) & (u_arr <= L)
        if mid.any():
            out[mid] = self.base.f(u_arr[mid])
        right = (u_arr > L) & (u_arr < L + d)
        t = (u_arr[right] - L) / d
        out[right] = d * dL * t * (1 - t) ** 2 + fL * (2 * t**3 - 3 * t**2 + 1)
        return float(out) if np.ndim(u) == 0 else out

    def f_tilde_prime(self, u):
        u_arr = np.asarray(u, dtype=float)
        d, L = self.delta, self.L
        f0, d0, fL, dL = self._ends()
        out = np.zeros_like(u_arr)
        left = (u_arr > -d) & (u_arr < 0)
        s = (u_arr[left] + d) / d
        out[left] = f0 * (6 * s - 6 * s**2) / d + d0 * (3 * s**2 - 2 * s)
        mid = (u_arr >= 0) & (u_arr <= L)
        if mid.any():
            out[mid] = self.base.f_prime(u_arr[mid])
        right = (u_arr > L) & (u_arr < L + d)
        t = (u_arr[right] - L) / d
        out[right] = dL * (1 - 4 * t + 3 * t**2) + fL * (6 * t**2 - 6 * t) / d
        return float(out) if np.ndim(u) == 0 else out

    def F_tilde(self, u):
        u_arr = np.asarray(u, dtype=float)
        d, L = self.delta, self.L
        f0, d0, fL, dL = self._ends()
        F0 = self.base.F0
        FL = float(self.base.F(L))
        out = np.empty_like(u_arr)

        def left_int(s):  # integral of f~ from -delta to -delta + s*delta
            return d * (f0 * (s**3 - s**4 / 2) + d * d0 * (s**4 / 4 - s**3 / 3))

        def right_int(t):  # integral of f~ from L to L + t*delta
            return d * (d * dL * (t**2 / 2 - 2 * t**3 / 3 + t**4 / 4)
                        + fL * (t**4 / 2 - t**3 + t))

        neg = u_arr < 0
        s = np.clip((u_arr[neg] + d) / d, 0.0, 1.0)
        out[neg] = F0 - (left_int(1.0) - left_int(s))
        mid = (u_arr >= 0) & (u_arr <= L)
        if mid.any():
            out[mid] = self.base.F(u_arr[mid])
        pos = u_arr > L
        t = np.clip((u_arr[pos] - L) / d, 0.0, 1.0)
        out[pos] = FL + right_int(t)
        return float(out) if np.ndim(u) == 0 else out

    def inf_F_tilde(self) -> float:
        """Infimum of F~ over the real line (F~ is constant outside
        [-delta, L + delta])."""
        lo = self.base.search_interval[0]
        x = np.concatenate([np.linspace(-self.delta, 0.0, 2001),
                            np.linspace(min(lo, 0.0), self.L, 8001),
                            np.linspace(self.L, self.L + self.delta, 2001)])
        return float(np.min(self.F_tilde(x)))

    def gradient_bound(self) -> float:
        """Squared-slope bound (inf F~ + 1)^-2 - 1."""
        return (self.inf_F_tilde() + 1.0) ** -2 - 1.0


@dataclass(frozen=True)
class MarginCheck:
    ok: bool
    e62_lower: float
    e62_upper: float
    close_u: float
    cond_F: float
    left_bound: float
    right_sign: float

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in self.__dict__.items() if k != "ok"}


def check_margins(tr: TruncatedReaction, samples: int = 10_000) -> MarginCheck:
    """Slack of every truncation condition on dense grids; all slacks
    are >= 0 when the conditions hold."""
    d, L, m = tr.delta, tr.L, tr.margins
    f0 = abs(float(tr.base.f(0.0)))
    neg = np.linspace(-2 * d, 0.0, samples)
    Fn = tr.F_tilde(neg)
    near = np.linspace(L - 2 * d, L, samples)
    below = np.linspace(-2 * d, L, samples + 1)[:-1]
    left = np.linspace(-d, 0.0, samples)
    right = np.linspace(L, L + d, samples)
    slack = dict(
        e62_lower=float(np.min(Fn) - m.lower),
        e62_upper=float(m.upper - np.max(Fn)),
        close_u=float(np.min(tr.F_tilde(near)) - m.close),
        cond_F=float(-np.max(tr.F_tilde(below))),
        left_bound=float(2 * (f0 + 1) - np.max(np.abs(tr.f_tilde(left)))),
        right_sign=float(-np.max(tr.f_tilde(right))),
    )
    ok = (slack["e62_lower"] >= 0 and slack["e62_upper"] >= 0 and slack["close_u"] >= 0
          and slack["cond_F"] > 0 and slack["left_bound"] >= 0
          and slack["right_sign"] >= -1e-14)
    return MarginCheck(ok=ok, **slack)


def truncate(r: ReactionTerm, delta_hint: float = 0.1, *, mu_count: int = 8,
             samples: int = 10_000) -> TruncatedReaction:
    """Largest delta <= delta_hint (found by halving, then bisection) for which
    all margin conditions hold."""
    if delta_hint <= 0:
        raise InvalidInputError("delta_hint must be positive")
    if not check_admissibility(r).admissible:
        raise InvalidInputError("truncation needs an admissible reaction term")
    margins = Margins.for_kappa(r.kappa, r.F0)

    def feasible(d: float) -> bool:
        return check_margins(TruncatedReaction(r, d, margins), samples).ok

    if feasible(delta_hint):
        delta = delta_hint
    else:
        hi, lo = delta_hint, None
        for _ in range(40):
            cand = hi / 2
            if feasible(cand):
                lo = cand
                break
            hi = cand
        if lo is None:
            raise TruncationInfeasibleError(
                f"no delta in (0, {delta_hint:g}] meets the margins; f violates the "
                "hypotheses near 0 or L")
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if feasible(mid) else (lo, mid)
        delta = lo
    tr = TruncatedReaction(r, delta, margins)
    return TruncatedReaction(r, delta, margins, tuple(mu_levels(tr, mu_count)))


def mu_levels(tr: TruncatedReaction, count: int, grid: int = 10_001) -> list[float]:
    """Strict-maximum levels mu_n < L built from m_n = max F~ on [0, L - 1/n].

    Only levels that beat F~ on all of (-inf, 0] are kept, and repeated
    levels are dropped so the list is strictly increasing.
    """
    if count < 1:
        raise InvalidInputError("count must be positive")
    L = tr.L
    sup_neg = float(np.max(tr.F_tilde(np.linspace(-tr.delta, 0.0, 2001))))
    n = math.floor(1.0 / L) + 1
    out: list[float] = []
    while len(out) < count:
        hi = L - 1.0 / n
        x = np.linspace(0.0, hi, grid)
        if (1.0 / n - 1.0 / (n + 1)) < hi / (grid - 1):
            warnings.warn(f"only {len(out)} mu levels resolvable on a {grid}-point grid",
                          RuntimeWarning, stacklevel=2)
            break
        Fx = tr.F_tilde(x)
        k = int(np.argmax(Fx))
        mu = float(x[k])
        if Fx[k] > sup_neg and (not out or mu > out[-1]):
            out.append(mu)
        n += 1
    return out
