"""Command line for rendering figures from bathforge output files.

Usage:
    bathforge-plot populations RUN.csv [RUN2.csv ...] -o fig.svg
    bathforge-plot scaling AMP=RUN.csv AMP=RUN.csv ... -o fig.svg
    bathforge-plot scaling SWEEP_REPORT.json -o fig.svg
    bathforge-plot steady_ratio AMP=RUN.csv ... -o fig.svg

Exit codes: 0 success, 1 bad input data, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .contracts import ContractError
from .jobs import KINDS, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bathforge-plot",
        description="Render publication figures from trajectory CSVs and run reports.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="KIND")

    specs = {
        "populations": (
            "Level populations versus time from one or more trajectory CSVs.",
            "trajectory CSV file(s)",
        ),
        "scaling": (
            "Rate versus drive amplitude with the quadratic law fitted. "
            "Inputs: AMPLITUDE=path.csv pairs, or one sweep-report JSON.",
            "AMPLITUDE=path.csv pairs or one report JSON",
        ),
        "steady_ratio": (
            "Final populations versus drive amplitude. "
            "Inputs: AMPLITUDE=path.csv pairs, or one sweep-report JSON.",
            "AMPLITUDE=path.csv pairs or one report JSON",
        ),
    }
    for kind in KINDS:
        help_text, inputs_help = specs[kind]
        p = sub.add_parser(kind, help=help_text, description=help_text)
        p.add_argument("inputs", nargs="+", help=inputs_help)
        p.add_argument("-o", "--out", required=True, help="output figure path (.svg or .pdf)")
        p.add_argument("--title", default=None, help="optional figure title")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        job = PlotJob(
            kind=args.kind,
            inputs=tuple(args.inputs),
            output=args.out,
            title=args.title,
        )
        path = render(job)
    except (ContractError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
