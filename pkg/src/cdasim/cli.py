"""Command line entry point: run, validate, presets, profile-strategies."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex
from .profiling import profile_all, write_table
from .session import ConfigError, SessionFault

EXIT_CONFIG = 2
EXIT_FAULT = 3


def _err(msg: str) -> None:
    print(f"cdasim: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        preset = ex.resolve_experiment(args.experiment)
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    progress = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        result = ex.run_experiment(preset, out_dir=args.out, parallel=args.parallel,
                                   trials=args.trials, seed=args.seed, progress=progress)
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    except SessionFault as e:
        _err(f"session fault: {e}")
        return EXIT_FAULT
    except Exception as e:  # a strategy hook blew up mid-session
        _err(f"session fault: {type(e).__name__}: {e}")
        return EXIT_FAULT
    for row in result.comparisons:
        sig = "*" if row.significant else " "
        print(f"{row.experiment:40s} {row.a:>18s} {row.mean_a:10.1f}  vs  "
              f"{row.b:<18s} {row.mean_b:10.1f}  {row.test:3s} p={row.p_value:.4g} {sig}")
    if not result.comparisons:
        for row in result.summary:
            print(f"{row.experiment:40s} {row.strategy:6s} {row.mean:10.2f} +/- {row.ci95:.2f}")
    print(f"results written to {Path(args.out) / preset.name}")
    return 0


def cmd_validate(args) -> int:
    try:
        data = ex.load_config(args.file)
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    errors = ex.validate_config(data)
    if errors:
        for e in errors:
            print(f"{args.file}: {e}")
        return EXIT_CONFIG
    print(f"{args.file}: ok")
    return 0


def cmd_presets(args) -> int:
    for name in ex.list_presets():
        p = ex.get_preset(name)
        if args.json:
            print(json.dumps(ex.preset_to_dict(p)))
        else:
            print(f"{name:22s} {len(p.points):3d} point(s) x {p.trials:3d} trials  {p.description}")
    return 0


def cmd_profile(args) -> int:
    rows = profile_all(args.strategies or None, calls=args.calls, seed=args.seed)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_table(rows, fh)
    else:
        write_table(rows, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cdasim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a preset or a JSON experiment config")
    r.add_argument("experiment", help="preset name or path to a config file")
    r.add_argument("--trials", type=int, help="override the trial count")
    r.add_argument("--seed", type=int, help="override the 64-bit base seed")
    r.add_argument("--out", default="results", help="output directory (default: results)")
    r.add_argument("--parallel", type=int, default=1, help="worker processes")
    r.add_argument("-q", "--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a JSON experiment config")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    ls = sub.add_parser("presets", help="list built-in presets")
    ls.add_argument("--json", action="store_true", help="print resolved preset definitions")
    ls.set_defaults(func=cmd_presets)

    pr = sub.add_parser("profile-strategies", help="time each strategy's hooks locally")
    pr.add_argument("--calls", type=int, default=20_000)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--out", help="write the table here instead of stdout")
    pr.add_argument("strategies", nargs="*")
    pr.set_defaults(func=cmd_profile)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
