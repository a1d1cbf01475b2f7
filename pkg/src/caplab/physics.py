"""Physical capillary parameters mapped onto the normalized problem."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .profile import ProfileSolution, profile_by_shooting
from .reaction import ReactionTerm, linear_reaction

G_EARTH = 9.80665


@dataclass(frozen=True)
class CapillarySetup:
    """SI units: densities in kg/m^3, sigma in N/m, g in m/s^2, theta in radians."""

    rho: float
    rho0: float
    sigma: float
    theta: float
    g: float = G_EARTH

    def __post_init__(self):
        if not self.rho > self.rho0:
            raise InvalidInputError("need rho > rho0")
        if not self.sigma > 0 or not self.g > 0:
            raise InvalidInputError("sigma and g must be positive")
        if not 0.0 < self.theta < math.pi / 2:
            raise InvalidInputError(
                f"theta={self.theta:g} outside (0, pi/2); for obtuse angles pass to -u first")

    @classmethod
    def from_b(cls, b: float, theta: float) -> "CapillarySetup":
        """Setup with the given b = (rho - rho0) g / sigma."""
        if not b > 0:
            raise InvalidInputError("b must be positive")
        return cls(rho=b, rho0=0.0, sigma=1.0, theta=theta, g=1.0)

    @property
    def b(self) -> float:
        return (self.rho - self.rho0) * self.g / self.sigma

    @property
    def kappa(self) -> float:
        return -1.0 / math.tan(self.theta)

    @property
    def capillary_length(self) -> float:
        return 1.0 / math.sqrt(self.b)

    @property
    def c_h(self) -> float:
        return rise_height_closed_form(self.b, self.theta)


def rise_height_closed_form(b: float, theta: float) -> float:
    """sqrt(2 (1 - sin theta) / b); zero at neutral wetting."""
    return math.sqrt(max(2.0 * (1.0 - math.sin(theta)), 0.0) / b)


def to_reaction(c: CapillarySetup) -> ReactionTerm:
    """f(v) = b (c_h - v) with kappa = -cot theta."""
    return linear_reaction(b=c.b, c_h=c.c_h, kappa=c.kappa)


def plate_rise_height(c: CapillarySetup, lengths: float = 15.0, steps_per_length: int = 10000
                      ) -> tuple[float, ProfileSolution]:
    """Terminal height phi(T) of the shooting profile, T = ``lengths`` capillary
    lengths. The closed form is not used, so the two routes are independent."""
    r = to_reaction(c)
    ell = c.capillary_length
    p = profile_by_shooting(r, T=lengths * ell, step=ell / steps_per_length)
    return float(p.phi[-1]), p


def rescale_solution(u: Callable, b: float) -> Callable:
    """Map a solution for b = 1 to one for b: v(x) = u(sqrt(b) x) / sqrt(b)."""
    sb = math.sqrt(b)
    return lambda x: np.asarray(u(sb * np.asarray(x))) / sb


def height_scaling_exponent(theta: float, bs=(0.1, 1.0, 10.0),
                            height: Callable[[CapillarySetup], float] | None = None) -> float:
    """Least-squares slope of log(height) against log(b)."""
    height = height or (lambda c: plate_rise_height(c)[0])
    hs = [height(CapillarySetup.from_b(b, theta)) for b in bs]
    return float(np.polyfit(np.log(bs), np.log(hs), 1)[0])
