"""Run configuration loaded from YAML (or JSON, which YAML parses)."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from .errors import InvalidInputError
from .radial import RadialConfig
from .verify import DEFAULT_TOLERANCES


@dataclass(frozen=True)
class ProfileConfig:
    T: float = 20.0
    step: float = 1e-4
    height_cut: float = 0.999
    dt: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    reaction: dict[str, Any] = field(default_factory=lambda: {"kind": "linear", "b": 1.0})
    kappa: float = -1.0
    radii: tuple[float, ...] = (25.0, 50.0, 100.0)
    dimension: int = 2
    delta_hint: float = 0.1
    mu_count: int = 8
    radial: RadialConfig = field(default_factory=RadialConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    localization_rho: float = 0.5  # as a fraction of L
    convergence_window: float = 10.0
    grad_floor: float = 0.05
    patch_points: int = 512
    physics: dict[str, float] | None = None

    def __post_init__(self):
        if not self.kappa < 0:
            raise InvalidInputError("kappa must be negative")
        r = list(self.radii)
        if any(b <= a for a, b in zip(r, r[1:])):
            raise InvalidInputError("radii must be strictly increasing")
        if any(x <= 0 for x in r):
            raise InvalidInputError("radii must be positive")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise InvalidInputError(f"unknown tolerance names {sorted(unknown)}")
        missing = set(DEFAULT_TOLERANCES) - set(self.tolerances)
        if missing:
            raise InvalidInputError(f"tolerance table lacks {sorted(missing)}")

    def with_overrides(self, **kw) -> "RunConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update({k: v for k, v in kw.items() if v is not None})
        return RunConfig(**data)


def _sub(cls, data: dict[str, Any] | None):
    data = dict(data or {})
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise InvalidInputError(f"unknown {cls.__name__} keys {sorted(unknown)}")
    if "initial_guesses" in data:
        data["initial_guesses"] = tuple(data["initial_guesses"])
    return cls(**data)


def _tolerance_table(value, base: Path | None) -> dict[str, Any]:
    """Inline mapping, or a path to a file such as ``caplab calibrate``'s tolerances.json."""
    if value is None:
        return {}
    if isinstance(value, (str, Path)):
        path = Path(value)
        if not path.is_absolute() and base is not None:
            path = base / path
        if not path.is_file():
            raise InvalidInputError(f"tolerance file not found: {path}")
        value = yaml.safe_load(path.read_text())
    if not isinstance(value, dict):
        raise InvalidInputError("tolerances must be a mapping or a file path")
    return value


def config_from_mapping(data: dict[str, Any], base: Path | None = None) -> RunConfig:
    data = dict(data or {})
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys {sorted(unknown)}")
    if "radial" in data:
        data["radial"] = _sub(RadialConfig, data["radial"])
    if "profile" in data:
        data["profile"] = _sub(ProfileConfig, data["profile"])
    if "radii" in data:
        data["radii"] = tuple(float(r) for r in data["radii"])
    tol = dict(DEFAULT_TOLERANCES)
    tol.update({k: float(v) for k, v in _tolerance_table(data.get("tolerances"), base).items()})
    data["tolerances"] = tol
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise InvalidInputError(f"bad config: {exc}") from None


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.is_file():
        raise InvalidInputError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise InvalidInputError(f"cannot parse {path}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise InvalidInputError(f"{path}: top level must be a mapping")
    return config_from_mapping(data or {}, base=path.parent)
