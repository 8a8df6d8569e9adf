"""Command-line interface: run scenarios, sweeps, and emit plot scripts."""

import argparse
import sys

from . import __version__
from .errors import CoulsyncError, IntegrationDivergedError
from .runner import (
    RunManifest,
    ScenarioConfig,
    SweepConfig,
    default_config_text,
    emit_plot_scripts,
    load_config,
    preset_config,
    run_scenario,
    run_sweep,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coulsync",
        description="Coulomb-coupled optomechanical synchronization simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--print-defaults", action="store_true",
        help="print the documented default configuration and exit",
    )
    sub = parser.add_subparsers(dest="command")

    for name, help_text in (
        ("run", "integrate a single scenario and write CSV outputs"),
        ("sweep", "run a parameter sweep and write a summary CSV"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", nargs="?", help="key=value configuration file")
        p.add_argument("--preset", help="built-in figure preset name")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--workers", type=int, help="parallel sweep workers")

    p = sub.add_parser("plot", help="emit gnuplot scripts for an existing run")
    p.add_argument("manifest", help="path to a run manifest.json")
    p.add_argument("--out", help="directory for the scripts")
    return parser


def _resolve_config(args):
    if args.preset and args.config:
        raise CoulsyncError("give either a config file or --preset, not both")
    if args.preset:
        return preset_config(args.preset)
    if args.config:
        return load_config(args.config)
    raise CoulsyncError("a config file or --preset is required")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.print_defaults:
        print(default_config_text(), end="")
        return 0
    if args.command is None:
        parser.print_help()
        return 2

    try:
        if args.command == "plot":
            manifest = RunManifest.load(args.manifest)
            for path in emit_plot_scripts(manifest, out_dir=args.out):
                print(path)
            return 0

        cfg = _resolve_config(args)
        if args.command == "run":
            if isinstance(cfg, SweepConfig):
                raise CoulsyncError("'run' needs a scenario config; use 'sweep'")
            manifest = run_scenario(cfg, out_dir=args.out)
            print(f"wrote {manifest.outputs['sync_csv']}")
            return 0
        if args.command == "sweep":
            if isinstance(cfg, ScenarioConfig):
                raise CoulsyncError("'sweep' needs a sweep config (sweep_param key)")
            if args.workers:
                cfg = SweepConfig(
                    base=cfg.base, sweep_params=cfg.sweep_params,
                    sweep_values=cfg.sweep_values, workers=args.workers,
                )
            manifest = run_sweep(cfg, out_dir=args.out)
            failures = manifest.flags["failures"]
            print(f"wrote {manifest.outputs['sweep_summary_csv']}"
                  f" ({manifest.flags['n_points'] - len(failures)}"
                  f"/{manifest.flags['n_points']} points ok)")
            return 1 if failures else 0
    except IntegrationDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CoulsyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
