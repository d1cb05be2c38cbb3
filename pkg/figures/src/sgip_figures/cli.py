"""Command line: render one figure job per invocation.

    sgip-figures profile   -o out.png snapA.sgrd [snapB.sgrd ...]
    sgip-figures front     -o out.png series.csv [more.csv ...]
    sgip-figures contour2d -o out.png snapA.sgrd [...] [--levels 0.1,0.5,0.9]
    sgip-figures slice3d   -o out.png snap.sgrd [--plane x|y|z]
"""

from __future__ import annotations

import argparse
import sys

from .formats import FormatError
from .jobs import DEFAULT_LEVELS, FigureJob, JobError, KINDS, render


def _parse_levels(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sgip-figures")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("inputs", nargs="+", help="snapshot or CSV input files")
    parser.add_argument("-o", "--output", required=True, help="image file to write")
    parser.add_argument("--levels", type=_parse_levels,
                        default=DEFAULT_LEVELS, help="contour levels, comma separated")
    parser.add_argument("--plane", choices=("x", "y", "z"), default="x")
    args = parser.parse_args(argv)
    try:
        job = FigureJob(kind=args.kind, inputs=tuple(args.inputs),
                        output=args.output, levels=args.levels, plane=args.plane)
        render(job)
    except (JobError, FormatError, OSError, ValueError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
