#!/usr/bin/env python3
"""Run every named preset (or a chosen subset) and write one output folder each.

    python3 scripts/run_presets.py --out runs/ [--only le04-coarse le12-p1-unstable] [--jobs 4]

Presets are independent, so they can run in parallel worker processes.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from lelandfem.cli import RunConfig, apply_settings, run_experiment
from lelandfem.presets import PRESETS, get_preset


def _run(name: str, root: Path, times: str) -> tuple[str, int]:
    preset = get_preset(name)
    cfg = apply_settings(RunConfig(), {**preset.settings(), "times": times})
    cfg = replace(cfg, preset=name, outputs=replace(cfg.outputs, directory=root / name))
    return name, run_experiment(cfg)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs"))
    ap.add_argument("--only", nargs="*", default=None)
    ap.add_argument("--times", default="0,0.5")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    names = args.only or list(PRESETS)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run, names, [args.out] * len(names), [args.times] * len(names)))
    else:
        results = [_run(n, args.out, args.times) for n in names]
    failed = [n for n, code in results if code != 0]
    if failed:
        print("non-zero exit:", ", ".join(failed))
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
