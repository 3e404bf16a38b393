#!/usr/bin/env python3
"""Oscillation index over a grid of (h, dtau) for one Leland number.

    python3 scripts/stability_sweep.py --c 0.03 --order 1 --csv sweep.csv

Each row holds the two mesh ratios, the index and whether it exceeds the
threshold. Runs that blow up are reported with an index of inf.
"""

from __future__ import annotations

import argparse
import csv
import sys

from lelandfem import MarketParams, SchemeConfig, analyze, assemble, build_aligned, run
from lelandfem.timestepper import NumericalBlowup


def sweep(c: float, order: int, hs: list[float], ratios: list[float]):
    params = MarketParams(c=c)
    for h in hs:
        mesh = build_aligned(h, params.K, order)
        system = assemble(mesh, params.K)
        for ratio in ratios:
            d_tau = ratio * mesh.h_max**2
            cfg = SchemeConfig(d_tau=d_tau, Le=params.leland)
            try:
                rep = analyze(run(system, params, cfg), mesh, cfg)
                yield h, d_tau, rep.ratio_tau_h, rep.ratio_tau_h2, rep.oscillation_index, rep.flagged
            except NumericalBlowup:
                yield h, d_tau, d_tau / mesh.h_max, ratio, float("inf"), True


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, default=0.03)
    ap.add_argument("--order", type=int, default=1, choices=(1, 2))
    ap.add_argument("--h", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125])
    ap.add_argument("--ratio", type=float, nargs="+", default=[0.1, 0.4, 0.8])
    ap.add_argument("--csv", default=None, help="write rows here instead of stdout")
    args = ap.parse_args()
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["h", "d_tau", "tau_h", "tau_h2", "oscillation_index", "flagged"])
    for row in sweep(args.c, args.order, args.h, args.ratio):
        w.writerow([f"{v:.6g}" if isinstance(v, float) else v for v in row])
        fh.flush()
    if fh is not sys.stdout:
        fh.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
