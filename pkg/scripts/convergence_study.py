#!/usr/bin/env python3
"""Observed convergence orders of P1 and P2 against the closed form.

    python3 scripts/convergence_study.py --levels 4 --base-h 0.1 [--c 0.0]

For c > 0 the reference is the closed form with volatility sigma sqrt(1 + Le),
which the Leland solution of a call follows only approximately on a finite
domain, so the orders there level off once that gap dominates.
"""

from __future__ import annotations

import argparse

from lelandfem import MarketParams, study


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--base-h", type=float, default=0.1)
    ap.add_argument("--c", type=float, default=0.0)
    ap.add_argument("--rule", choices=("tau_h2", "tau_h"), default="tau_h2")
    ap.add_argument("--ratio", type=float, default=0.1)
    args = ap.parse_args()
    params = MarketParams(c=args.c)
    for order in (1, 2):
        res = study(params, order, args.levels, args.base_h, ratio_rule=args.rule, ratio=args.ratio)
        print(f"P{order}")
        print(f"{'h':>10} {'d_tau':>12} {'max error':>12} {'order':>7}")
        for row in res.rows():
            print(f"{row['h']:>10.5f} {row['d_tau']:>12.4e} {row['error']:>12.4e} {row['order']:>7.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
