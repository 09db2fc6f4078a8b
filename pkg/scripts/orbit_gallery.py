"""Locate attracting cycles of elliptic planar fields across aspect ratios.

For each aspect the planar field is reduced to a scalar angle-parametrized
equation, the radial anchor located by monotone iteration, and the orbit
lifted back to the plane:

    python3 scripts/orbit_gallery.py --aspects 0.5 1 2 4 --out runs/orbits
"""

import argparse
import os
import sys

from cycleseek.planar import PlanarOrbit, find_planar_periodic
from cycleseek.systems import hopf_circle


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--aspects", type=float, nargs="+",
                    default=[0.5, 1.0, 2.0, 4.0])
    ap.add_argument("--z0", type=float, default=0.7)
    ap.add_argument("--out", default=None,
                    help="directory for per-aspect orbit CSVs")
    args = ap.parse_args(argv)

    if args.out:
        os.makedirs(args.out, exist_ok=True)

    print(f"{'aspect':>7}  {'verdict':>9}  {'period':>12}  {'anchor':>10}  "
          f"{'closure':>9}")
    worst = 0.0
    for aspect in args.aspects:
        result, _ = find_planar_periodic(hopf_circle(aspect), z0=args.z0)
        if not isinstance(result, PlanarOrbit):
            print(f"{aspect:7.3f}  {'no orbit':>9}  ({result!r})")
            continue
        anchor = float(result.z_solution.anchor[0])
        worst = max(worst, result.closure_residual)
        print(f"{aspect:7.3f}  {'periodic':>9}  {result.period:12.8f}  "
              f"{anchor:10.2e}  {result.closure_residual:9.2e}")
        if args.out:
            path = os.path.join(args.out, f"orbit_aspect_{aspect:g}.csv")
            result.to_csv(path)
    print(f"worst closure residual: {worst:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
