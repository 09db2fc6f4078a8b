"""Sweep the adaptation gain for the quadratic seeking loop.

Prints which feasibility conditions hold at each gain and where the
largest certifiable gain sits.  Run from the repo root:

    python3 scripts/gain_sweep.py --amp 1.0 --radius 1.0 --box 0.05
"""

import argparse
import csv
import math
import sys

import numpy as np

from cycleseek.extremum import EsParams, analyze, named_map


def sweep(map_name: str, amp: float, radius: float, box, gains):
    m = named_map(map_name)
    rows = []
    for eps in gains:
        a = analyze(m, EsParams(epsilon=eps, amp=amp, radius=radius, box=box))
        rows.append({
            "epsilon": eps,
            "slope": a.slope_gain_ok.holds,
            "value": a.value_gain_ok.holds,
            "residual": a.residual_within_radius.holds,
            "box": None if a.box_feasible is None else a.box_feasible.holds,
            "radius_bound": a.asymptotic_radius,
        })
    return m, rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--map", default="quadratic",
                    choices=("quadratic", "quartic"))
    ap.add_argument("--amp", type=float, default=1.0)
    ap.add_argument("--radius", type=float, default=1.0)
    ap.add_argument("--box", type=float, default=None,
                    help="certificate half-width; omit to skip the box row")
    ap.add_argument("--gains", type=int, default=13,
                    help="number of log-spaced gains in [1e-6, 1e-2]")
    ap.add_argument("--csv", default=None, help="optional output table")
    args = ap.parse_args(argv)

    gains = np.logspace(-6.0, -2.0, args.gains)
    m, rows = sweep(args.map, args.amp, args.radius, args.box, gains)

    print(f"map={args.map}  amp={args.amp}  radius={args.radius}  "
          f"box={args.box}")
    print(f"{'epsilon':>10}  {'slope':>5}  {'value':>5}  {'resid':>5}  "
          f"{'box':>5}  {'radius bound':>12}")
    for r in rows:
        box_s = "-" if r["box"] is None else str(r["box"])
        print(f"{r['epsilon']:10.3e}  {str(r['slope']):>5}  "
              f"{str(r['value']):>5}  {str(r['residual']):>5}  {box_s:>5}  "
              f"{r['radius_bound']:12.4e}")

    ref = analyze(m, EsParams(epsilon=gains[0], amp=args.amp,
                              radius=args.radius, box=args.box))
    if ref.eps_star is not None:
        print(f"largest certifiable gain (bisection): {ref.eps_star:.6e}")
    else:
        print("largest certifiable gain: needs --box")
    sigma = ref.curvature_floor
    print(f"curvature floor {sigma:.6f}, residual gain {ref.residual_gain:g}")

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
