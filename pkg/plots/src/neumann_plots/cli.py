"""Script entry point: render one figure from one CSV."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .render import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="neumann-plots",
        description="Render a figure replica from a neumann-mitigation CSV.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--input", required=True, help="CSV produced by the experiment CLI")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--output", required=True, help="image path (format by extension)")
    parser.add_argument("--true-value", type=float, help="override the embedded true value")
    parser.add_argument("--epsilon", type=float, help="override the embedded tolerance band")
    args = parser.parse_args(argv)
    try:
        report = render(
            FigureSpec(
                input=args.input,
                kind=args.kind,
                output=args.output,
                true_value=args.true_value,
                epsilon=args.epsilon,
            )
        )
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    counts = ", ".join(f"{name}={count}" for name, count in report["series"].items())
    print(f"wrote {report['output']} ({counts})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
