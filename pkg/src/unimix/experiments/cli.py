"""Command-line entry point: ``unimix <experiment> [flags]``.

Exit status is 0 when every invariant flag of the report passes, 1 when
some flag fails and 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..core.errors import UnimixError
from .config import EXPERIMENTS, FORMATS, MODES, build_config, load_config_file
from .runners import run


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unimix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--seed", type=int)
        p.add_argument("--horizon", type=int)
        p.add_argument("--backend", choices=("exact", "logfloat"))
        if name in MODES:
            p.add_argument("--mode", choices=MODES[name])
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {k: getattr(args, k, None)
                 for k in ("out", "format", "seed", "horizon", "backend", "mode")}
    try:
        file_values = load_config_file(args.config) if args.config else None
        cfg = build_config(args.experiment, file_values, overrides)
        report = run(cfg)
    except (UnimixError, OSError) as exc:
        print(f"unimix: error: {exc}", file=sys.stderr)
        return 2
    text = report.render(cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [k for k, v in report.flags.items() if not v]
    if failed:
        print(f"unimix: failed invariants: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
