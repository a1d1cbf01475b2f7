"""Reaction terms f with their normalized primitive and admissibility tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import interpolate, optimize

from .errors import InvalidInputError
from .expression import Expression
from .quadrature import Primitive

# tolerance used for the equality conditions of the admissibility report
EQ_TOL = 1e-7


def f0_target(kappa: float) -> float:
    """The value F(0) = (1+kappa^2)^(-1/2) - 1 of the equality regime."""
    return 1.0 / math.sqrt(1.0 + kappa * kappa) - 1.0


@dataclass(frozen=True)
class ReactionTerm:
    f: Callable
    f_prime: Callable
    F: Callable
    kappa: float
    search_interval: tuple[float, float]
    L: float | None
    inf_F: float
    inf_F_at: float
    label: str = ""
    declaration: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def F0(self) -> float:
        return float(self.F(0.0))

    @property
    def F0_target(self) -> float:
        return f0_target(self.kappa)


@dataclass(frozen=True)
class Condition:
    name: str
    passed: bool
    margin: float
    deviation: float | None = None
    witness: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "condition": self.name,
            "pass": bool(self.passed),
            "margin": _num(self.margin),
            "deviation": _num(self.deviation),
            "witness": _num(self.witness),
        }


@dataclass(frozen=True)
class AdmissibilityReport:
    conditions: tuple[Condition, ...]
    search_interval: tuple[float, float]

    @property
    def admissible(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "admissible": self.admissible,
            "certified_on": list(self.search_interval),
            "conditions": [c.to_dict() for c in self.conditions],
        }


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _dense(lo: float, hi: float, n: int = 8001) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _locate_L(f: Callable, F: Callable, hi: float, ftol: float) -> float | None:
    """Smallest zero of F in (0, hi]: either a sign change of F or a
    tangential touch (local max of F where f changes sign from + to -)."""
    x = _dense(0.0, hi)
    Fx = np.asarray(F(x))
    fx = np.asarray(f(x))
    candidates = []
    for k in range(x.size - 1):
        if Fx[k + 1] == 0.0 and x[k + 1] > 0:
            candidates.append(x[k + 1])
        elif Fx[k] * Fx[k + 1] < 0:
            candidates.append(optimize.brentq(F, x[k], x[k + 1], xtol=1e-15))
        if fx[k] > 0 >= fx[k + 1] or (fx[k] == 0 and k > 0 and fx[k - 1] > 0):
            a, b = x[k], x[k + 1]
            root = a if fx[k] == 0 else (b if fx[k + 1] == 0 else
                                         optimize.brentq(f, a, b, xtol=1e-15))
            if abs(F(root)) <= ftol:
                candidates.append(root)
        if candidates and min(candidates) <= x[k]:
            break
    positive = [c for c in candidates if c > 1e-12 * max(1.0, hi)]
    return float(min(positive)) if positive else None


def _minimize_on(F: Callable, lo: float, hi: float) -> tuple[float, float]:
    x = _dense(lo, hi)
    Fx = np.asarray(F(x))
    k = int(np.argmin(Fx))
    a, b = x[max(k - 1, 0)], x[min(k + 1, x.size - 1)]
    best_x, best = float(x[k]), float(Fx[k])
    if b > a:
        res = optimize.minimize_scalar(F, bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-13})
        if res.fun < best:
            best_x, best = float(res.x), float(res.fun)
    return best, best_x


def make_reaction(
    f: Callable,
    f_prime: Callable,
    kappa: float,
    search_interval: tuple[float, float],
    *,
    F0: float | None = None,
    label: str = "",
    declaration: dict[str, Any] | None = None,
) -> ReactionTerm:
    """Build the normalized primitive, locate L, estimate inf F.

    ``F0`` overrides the normalization constant; it exists for testing the
    normalization check and should normally be left alone.
    """
    kappa = float(kappa)
    if not kappa < 0:
        raise InvalidInputError(f"kappa must be negative, got {kappa}")
    lo, hi = (float(v) for v in search_interval)
    if not (lo <= 0.0 < hi):
        raise InvalidInputError("search interval must contain 0 and extend above it")
    x = _dense(lo, hi, 4097)
    with np.errstate(all="ignore"):
        fx = np.asarray(f(x), dtype=float) * np.ones_like(x)
        dfx = np.asarray(f_prime(x), dtype=float) * np.ones_like(x)
    if not np.all(np.isfinite(fx)):
        bad = float(x[~np.isfinite(fx)][0])
        raise InvalidInputError(f"f is not finite at u={bad:.6g}")
    if not np.all(np.isfinite(dfx)):
        bad = float(x[~np.isfinite(dfx)][0])
        raise InvalidInputError(f"f' is not finite at u={bad:.6g}")

    value0 = f0_target(kappa) if F0 is None else float(F0)
    F = Primitive(f, lo, hi, origin=0.0, value_at_origin=value0)
    scale = 1.0 + float(np.max(np.abs(F(x))))
    L = _locate_L(f, F, hi, ftol=1e-10 * scale)
    inf_F, inf_at = _minimize_on(F, lo, L if L is not None else hi)
    return ReactionTerm(
        f=f, f_prime=f_prime, F=F, kappa=kappa, search_interval=(lo, hi),
        L=L, inf_F=inf_F, inf_F_at=inf_at, label=label,
        declaration=dict(declaration or {}),
    )


def check_admissibility(r: ReactionTerm) -> AdmissibilityReport:
    """The five conditions under which a bounded parallel profile exists."""
    lo, hi = r.search_interval
    conds = []

    dev = abs(r.F0 - r.F0_target)
    conds.append(Condition("F0_normalization", dev <= EQ_TOL, EQ_TOL - dev, dev, 0.0))

    if r.L is None:
        x = _dense(0.0, hi)
        Fx = np.asarray(r.F(x))
        k = int(np.argmax(Fx[1:])) + 1
        conds.append(Condition("L_exists", False, float(Fx[k]), None, float(x[k])))
        conds.append(Condition("f_L_zero", False, -math.inf, None, None))
        conds.append(Condition("F_negative_below_L", False, -math.inf, None, None))
    else:
        L = r.L
        conds.append(Condition("L_exists", True, L, abs(float(r.F(L))), L))
        fl = abs(float(r.f(L)))
        # measured against the size of f, which grows with b
        ftol = EQ_TOL * (1.0 + float(np.max(np.abs(r.f(_dense(0.0, L))))))
        conds.append(Condition("f_L_zero", fl <= ftol, ftol - fl, fl, L))
        # F touches zero quadratically at L; margin is taken below L - eta
        eta = 1e-3 * L
        x = _dense(lo, L - eta)
        Fx = np.asarray(r.F(x))
        k = int(np.argmax(Fx))
        conds.append(Condition("F_negative_below_L", Fx[k] < 0, -float(Fx[k]),
                               None, float(x[k])))

    margin = r.inf_F + 1.0
    conds.append(Condition("inf_F_above_minus_one", margin > 0, margin, None, r.inf_F_at))
    return AdmissibilityReport(tuple(conds), (lo, hi))


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class _Affine:
    """b (c - v); a class rather than a closure so sweeps can pickle it."""

    b: float
    c: float

    def __call__(self, v):
        return self.b * (self.c - v)

    def derivative(self, v):
        return -self.b + 0.0 * v


def linear_reaction(b: float = 1.0, c_h: float | None = None, kappa: float = -1.0,
                    search_interval: tuple[float, float] | None = None) -> ReactionTerm:
    """f(v) = b (c_h - v). Without ``c_h`` the height closing F(c_h) = 0 is used."""
    if b <= 0:
        raise InvalidInputError("b must be positive")
    if c_h is None:
        c_h = math.sqrt(-2.0 * f0_target(kappa) / b)
    c_h = float(c_h)
    if search_interval is None:
        search_interval = (0.0, 2.0 * max(c_h, 1e-3))

    f = _Affine(b, c_h)
    return make_reaction(f, f.derivative, kappa, search_interval, label=f"linear(b={b:g})",
                         declaration={"kind": "linear", "b": b, "c_h": c_h})


def table_reaction(u, fu, kappa: float = -1.0,
                   search_interval: tuple[float, float] | None = None) -> ReactionTerm:
    u = np.asarray(u, dtype=float)
    fu = np.asarray(fu, dtype=float)
    if u.ndim != 1 or u.size < 2 or u.shape != fu.shape or np.any(np.diff(u) <= 0):
        raise InvalidInputError("table needs strictly increasing u with matching f(u)")
    pchip = interpolate.PchipInterpolator(u, fu, extrapolate=False)
    dpchip = pchip.derivative()
    if search_interval is None:
        search_interval = (max(u[0], 0.0), u[-1])
    lo, hi = search_interval
    if lo < u[0] or hi > u[-1]:
        raise InvalidInputError("search interval exceeds the tabulated range")
    return make_reaction(pchip, dpchip, kappa, search_interval, label="table",
                         declaration={"kind": "table", "u": u.tolist(), "f": fu.tolist()})


def expression_reaction(source: str, kappa: float = -1.0,
                        search_interval: tuple[float, float] = (0.0, 2.0)) -> ReactionTerm:
    expr = Expression(source)
    return make_reaction(expr, expr.derivative, kappa, search_interval,
                         label=source, declaration={"kind": "expression", "expr": source})


def reaction_from_declaration(decl: dict[str, Any], kappa: float = -1.0) -> ReactionTerm:
    """Build a term from a config mapping with ``kind`` in linear/table/expression."""
    decl = dict(decl)
    kind = decl.pop("kind", None)
    interval = decl.pop("search_interval", None)
    interval = tuple(interval) if interval is not None else None
    if kind == "linear":
        return linear_reaction(float(decl.get("b", 1.0)), decl.get("c_h"), kappa, interval)
    if kind == "table":
        return table_reaction(decl["u"], decl["f"], kappa, interval)
    if kind == "expression":
        return expression_reaction(str(decl["expr"]), kappa, interval or (0.0, 2.0))
    raise InvalidInputError(f"unknown reaction kind {kind!r}")
