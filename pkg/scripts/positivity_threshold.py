"""Bisect for the smallest radius with a positive minimizer.

The default term has f(0) < 0, so small balls have negative minimizers.
"""

from __future__ import annotations

import argparse
import math

from caplab import expression_reaction, truncate
from caplab.radial import positivity_threshold

F0 = math.sqrt(2.0) / 2.0 - 1.0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--expr", default=f"{F0!r}*(1-u)*(1-9*u)")
    ap.add_argument("--lo", type=float, default=1.0)
    ap.add_argument("--hi", type=float, default=12.0)
    ap.add_argument("--iterations", type=int, default=10)
    args = ap.parse_args()

    tr = truncate(expression_reaction(args.expr))
    out = positivity_threshold(tr, args.lo, args.hi, iterations=args.iterations)
    for R, pos in out["samples"].items():
        print(f"R = {R:10.6f}  {'positive' if pos else 'not positive'}")
    print("R0 =", out["R0"], "bracket", out["bracket"])


if __name__ == "__main__":
    main()
