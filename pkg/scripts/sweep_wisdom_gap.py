#!/usr/bin/env python3
"""Sweep the analytic wisdom gap over bias scale, correlation, and crowd size.

Writes one CSV row per grid cell (uniform-weight and optimal-weight gaps
against uniform selection) to stdout or --out.  Cells whose common
correlation is infeasible for the crowd size are marked rather than skipped,
so downstream plots see the full grid.

Usage:
    python scripts/sweep_wisdom_gap.py [--out sweep.csv] [--seed 0]
"""

import argparse
import sys
from contextlib import redirect_stdout

from crowdwise.cli import main as cli_main


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", help="write CSV here instead of stdout")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", help="optional grid file (see README)")
    args = parser.parse_args(argv)

    cli_args = ["sweep", "--seed", str(args.seed)]
    if args.grid:
        cli_args += ["--sweep-grid", args.grid]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            with redirect_stdout(handle):
                code = cli_main(cli_args)
        print(f"wrote {args.out}", file=sys.stderr)
        return code
    return cli_main(cli_args)


if __name__ == "__main__":
    sys.exit(run())
