"""Command-line entry point for batch calibration campaigns."""
from __future__ import annotations

import argparse
import sys

from .campaign import run_campaign
from .config import ConfigError, default_config, emit_config, parse_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chan3d",
        description="System-level 3D channel simulator and calibration driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a calibration campaign")
    run_p.add_argument("--config", required=True, help="path to the run configuration file")
    run_p.add_argument("--seed", type=int, default=None, help="override run.master_seed")
    run_p.add_argument("--phase", type=int, choices=(1, 2), default=None, help="override run.phase")
    run_p.add_argument("--output", default=None, help="override run.output_dir")
    run_p.add_argument("--workers", type=int, default=None, help="override run.workers")
    run_p.add_argument(
        "--downtilts", default=None,
        help="comma-separated downtilt sweep in degrees (overrides the config)",
    )
    run_p.add_argument(
        "--dv-list", default=None,
        help="comma-separated vertical spacings in wavelengths (overrides the config)",
    )
    run_p.add_argument("--drop-mode", choices=("3d", "legacy2d"), default=None)
    run_p.add_argument("-q", "--quiet", action="store_true", help="suppress progress output")

    def_p = sub.add_parser(
        "default-config",
        help="emit the canonical configuration with all defaults documented",
    )
    def_p.add_argument("--scenario", choices=("UMa", "UMi"), default="UMa")
    def_p.add_argument("--output", default="-", help="target file, or - for stdout")
    return parser


def _parse_float_list(raw: str) -> tuple:
    return tuple(float(part) for part in raw.split(",") if part.strip())


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "default-config":
            text = emit_config(default_config(args.scenario))
            if args.output == "-":
                sys.stdout.write(text)
            else:
                with open(args.output, "w") as fh:
                    fh.write(text)
            return 0

        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg.run.master_seed = args.seed
        if args.phase is not None:
            cfg.run.phase = args.phase
        if args.output is not None:
            cfg.run.output_dir = args.output
        if args.workers is not None:
            cfg.run.workers = args.workers
        if args.drop_mode is not None:
            cfg.run.drop_mode = args.drop_mode
        if args.downtilts is not None:
            cfg.antenna.downtilt_sweep_deg = _parse_float_list(args.downtilts)
        if args.dv_list is not None:
            cfg.antenna.d_v_sweep = _parse_float_list(args.dv_list)
        from .config import validate

        validate(cfg)
        log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
        written = run_campaign(cfg, log=log)
        if not args.quiet:
            for path in written:
                print(path, file=sys.stderr)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
