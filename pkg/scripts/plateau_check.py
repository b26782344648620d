"""Long-run ergotropy plateaus of coherent charging (N = 200, theta = pi/4).

Runs until the ergotropy changes by less than 1e-4 (relative) over four
consecutive 500-collision blocks, then prints the plateau values.
Takes a few minutes.
"""

from __future__ import annotations

import argparse
import math
import time

from qbatt.experiments import ergotropy_plateau


def main() -> None:
    ap = argparse.ArgumentParser(description="ergotropy plateau check")
    ap.add_argument("--N", type=int, default=200)
    ap.add_argument("--q", type=float, nargs="+", default=[0.25, 0.49])
    ap.add_argument("--window", type=int, default=500)
    ap.add_argument("--rel-tol", type=float, default=1e-4)
    args = ap.parse_args()
    print("q       k_plateau  ergotropy  dephased  seconds")
    for q in args.q:
        t0 = time.perf_counter()
        r = ergotropy_plateau(args.N, q, 1.0, math.pi / 4, window=args.window, rel_tol=args.rel_tol)
        flag = "" if r["converged"] else "  (not converged)"
        print(f"{q:<7} {r['k']:>9}  {r['ergotropy']:9.4f}  {r['dephased_ergotropy']:8.4f}  {time.perf_counter() - t0:7.1f}{flag}")


if __name__ == "__main__":
    main()
