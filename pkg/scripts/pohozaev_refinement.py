"""Normalized Pohozaev residual of ball minimizers under grid refinement."""

from __future__ import annotations

import argparse
import math

from caplab import linear_reaction, minimize_energy, truncate
from caplab.verify import pohozaev_residual


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=float, nargs="+", default=[25.0, 50.0, 100.0])
    ap.add_argument("--grids", type=int, nargs="+", default=[256, 512, 1024, 2048])
    args = ap.parse_args()

    tr = truncate(linear_reaction())
    for R in args.radii:
        print(f"R = {R:g}")
        prev = None
        for N in args.grids:
            res = pohozaev_residual(minimize_energy(tr, R, grid_points=N)).residual
            order = f"{math.log2(prev / res):6.2f}" if prev else ""
            print(f"  N = {N:5d}  residual {res:.3e}  {order}")
            prev = res


if __name__ == "__main__":
    main()
