"""Regenerate the data behind every figure into one output tree.

    python scripts/reproduce_figures.py [--out figures-out] [--threads N]
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from qbatt.cli import run
from qbatt.config import ExperimentConfig
from qbatt.experiments import default_threads

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

JOBS = [
    ("fig2a", "distribution"),
    ("fig2b", "distribution"),
    ("fig3", "energy-ergotropy"),
    ("fig4", "efficiency-map"),
    ("fig5", "power-scan"),
    ("figS1", "free-energy-ratio"),
    ("validate", "validate"),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures-out")
    ap.add_argument("--threads", type=int, default=default_threads())
    ap.add_argument("--only", nargs="*", help="subset of config names")
    args = ap.parse_args()
    status = 0
    for name, command in JOBS:
        if args.only and name not in args.only:
            continue
        cfg = ExperimentConfig.load(CONFIGS / f"{name}.cfg")
        t0 = time.perf_counter()
        rc = run(command, cfg, Path(args.out) / name, args.threads)
        print(f"{name:<9} {command:<18} rc={rc}  {time.perf_counter() - t0:7.1f} s")
        status |= rc
    return status


if __name__ == "__main__":
    raise SystemExit(main())
