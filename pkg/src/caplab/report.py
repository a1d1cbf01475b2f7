"""Named check results with deterministic JSON output."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable


def _num(x):
    if x is None:
        return None
    if isinstance(x, (bool, str)):
        return x
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class CheckResult:
    check: str
    residual: float
    tolerance: float
    passed: bool
    worst_location: Any = None
    note: str = ""
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "check": self.check,
            "residual": _num(self.residual),
            "tolerance": _num(self.tolerance),
            "pass": bool(self.passed),
            "worst_location": _num(self.worst_location),
        }
        if self.note:
            out["note"] = self.note
        if self.extra:
            out["extra"] = {k: _num(v) if not isinstance(v, dict) else v
                            for k, v in sorted(self.extra.items())}
        return out


class VerificationReport:
    """Ordered collection of checks; names are unique."""

    def __init__(self, title: str = "", checks: Iterable[CheckResult] = ()):
        self.title = title
        self._checks: dict[str, CheckResult] = {}
        for c in checks:
            self.append(c)

    def append(self, c: CheckResult) -> CheckResult:
        if c.check in self._checks:
            raise ValueError(f"duplicate check name {c.check!r}")
        self._checks[c.check] = c
        return c

    def add(self, check: str, residual, tolerance, passed, worst_location=None,
            note: str = "", **extra) -> CheckResult:
        return self.append(CheckResult(check, float(residual), float(tolerance),
                                       bool(passed), worst_location, note, extra))

    def merge(self, other: "VerificationReport", prefix: str = "") -> "VerificationReport":
        for c in other:
            name = f"{prefix}{c.check}"
            self.append(CheckResult(name, c.residual, c.tolerance, c.passed,
                                    c.worst_location, c.note, c.extra))
        return self

    def __iter__(self):
        return iter(self._checks.values())

    def __len__(self) -> int:
        return len(self._checks)

    def __contains__(self, name: str) -> bool:
        return name in self._checks

    def __getitem__(self, name: str) -> CheckResult:
        return self._checks[name]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self._checks.values())

    def failures(self) -> list[CheckResult]:
        return [c for c in self if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        return {"title": self.title, "pass": self.passed,
                "checks": [c.to_dict() for c in self]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def __repr__(self) -> str:
        bad = len(self.failures())
        return f"VerificationReport({self.title!r}, {len(self)} checks, {bad} failed)"
