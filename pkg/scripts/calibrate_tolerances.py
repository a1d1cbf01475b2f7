"""Rerun the refinement studies behind the frozen tolerance table and diff it."""

from __future__ import annotations

from caplab import linear_reaction, truncate
from caplab.calibrate import run_calibration
from caplab.verify import DEFAULT_TOLERANCES


def main():
    r = linear_reaction()
    cal = run_calibration(r, truncate(r))
    for name, value in cal["tolerances"].items():
        frozen = DEFAULT_TOLERANCES[name]
        mark = "" if value == frozen else f"   (frozen {frozen:g})"
        print(f"{name:22s} {value:g}{mark}")
    for row in cal["studies"].get("pohozaev", []):
        print(f"pohozaev R={row['R']:g}: {row['coarse']:.3e} -> {row['fine']:.3e}, "
              f"order {row['order']:.2f}")


if __name__ == "__main__":
    main()
