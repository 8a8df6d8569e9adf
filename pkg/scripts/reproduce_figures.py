#!/usr/bin/env python3
"""Run every figure preset and emit gnuplot scripts for each output directory.

Usage:
    python3 scripts/reproduce_figures.py [--out OUT_DIR] [--workers N]

Scenario presets are integrated one by one; the Coulomb-coupling sweep runs
last (optionally in parallel). Expect a few minutes of wall time in total.
"""

import argparse
import os
import sys

from coulsync.runner import (
    PRESETS,
    SweepConfig,
    emit_plot_scripts,
    preset_config,
    run_scenario,
    run_sweep,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="figures", help="root output directory")
    parser.add_argument("--workers", type=int, default=1, help="sweep workers")
    args = parser.parse_args(argv)

    failures = []
    for name in sorted(PRESETS):
        cfg = preset_config(name)
        out = os.path.join(args.out, name)
        print(f"=== {name} -> {out}")
        try:
            if isinstance(cfg, SweepConfig):
                if args.workers > 1:
                    cfg = SweepConfig(
                        base=cfg.base, sweep_params=cfg.sweep_params,
                        sweep_values=cfg.sweep_values, workers=args.workers,
                    )
                manifest = run_sweep(cfg, out_dir=out)
            else:
                manifest = run_scenario(cfg, out_dir=out)
            for path in emit_plot_scripts(manifest):
                print(f"    {path}")
        except Exception as exc:
            print(f"    FAILED: {exc}", file=sys.stderr)
            failures.append(name)
    if failures:
        print(f"failed presets: {', '.join(failures)}", file=sys.stderr)
        return 1
    print("all presets completed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
