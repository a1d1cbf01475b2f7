"""Ball minimizers against the parallel profile as the radius grows."""

from __future__ import annotations

import argparse
import json

from caplab import linear_reaction, profile_by_shooting, truncate
from caplab.radial import convergence_to_profile, energy_sandwich, level_set_localization, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=float, nargs="+", default=[25.0, 50.0, 100.0, 200.0])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json", help="write the study here")
    args = ap.parse_args()

    r = linear_reaction()
    tr = truncate(r)
    p = profile_by_shooting(r, 20.0, 1e-4)
    sols = sweep(tr, args.radii, workers=args.workers)
    conv = convergence_to_profile(list(sols.values()), p)
    sand = energy_sandwich(list(sols.values()))

    e = conv["e_decreasing"].extra["e"]
    slopes = conv["boundary_slope_monotone"].extra["slopes"]
    C = sand["energy_constant_stability"].extra["per_radius"]
    print(f"{'R':>6} {'e(R)':>10} {'|du/dr(R)|':>11} {'(I-|B|)/R':>10} {'width(L/2)':>10}")
    for k, (R, s) in enumerate(sols.items()):
        w, _ = level_set_localization(s, 0.5 * tr.L)
        print(f"{R:6g} {e[k]:10.3e} {slopes[k]:11.6f} {C[k]:10.5f} {w:10.5f}")
    print("monotone:", conv.passed, " sandwich:", sand.passed)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"convergence": conv.to_dict(), "sandwich": sand.to_dict()}, fh,
                      indent=2, default=float)


if __name__ == "__main__":
    main()
