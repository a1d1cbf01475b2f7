"""CSV for curves, JSON for everything else."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidInputError
from .profile import ProfileSolution

PROFILE_COLUMNS = ("t", "phi", "phi_prime", "hamiltonian")
RADIAL_COLUMNS = ("r", "u", "u_prime")


def write_csv(path: Path, columns: tuple[str, ...], arrays) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in zip(*arrays):
            w.writerow([repr(float(v)) for v in row])
    return path


def read_csv(path: Path) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise InvalidInputError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInputError(f"{path} is empty")
    head, body = rows[0], rows[1:]
    try:
        data = np.array([[float(v) for v in row] for row in body], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: non-numeric entry ({exc})") from None
    data = data.reshape(len(body), len(head))
    return {name: data[:, k] for k, name in enumerate(head)}


def write_profile_csv(p: ProfileSolution, path: Path) -> Path:
    return write_csv(path, PROFILE_COLUMNS, (p.t, p.phi, p.phi_prime, p.hamiltonian))


def read_profile_csv(path: Path, L_target: float, method: str = "file") -> ProfileSolution:
    d = read_csv(path)
    missing = set(PROFILE_COLUMNS) - set(d)
    if missing:
        raise InvalidInputError(f"{path}: missing columns {sorted(missing)}")
    return ProfileSolution(d["t"], d["phi"], d["phi_prime"], d["hamiltonian"],
                           L_target, method, {"source": str(path)})


def write_radial_csv(s, path: Path) -> Path:
    return write_csv(path, RADIAL_COLUMNS, (s.r, s.u, s.u_prime))


def profile_json(p: ProfileSolution) -> dict[str, Any]:
    return {"method": p.method, "T": p.T, "nodes": int(p.t.size), "L_target": p.L_target,
            "phi_T": float(p.phi[-1]) if p.t.size else None,
            "meta": {k: v for k, v in sorted(p.meta.items())}}


def dump_json(obj: Any, path: Path) -> Path:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n")
    return path


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
