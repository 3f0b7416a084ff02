"""plotkit <kind> <run-dir> -o fig.png"""

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .io import MissingColumn, SchemaError


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="plotkit",
        description="Render standard figures from a recorded run directory")
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("run_dir")
    ap.add_argument("-o", "--out", default="fig.png",
                    help="output image path (default fig.png)")
    args = ap.parse_args(argv)
    try:
        summary = render(FigureSpec(args.kind, args.run_dir, args.out))
    except (SchemaError, MissingColumn, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {summary['path']} ({summary['n_elements']} elements)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
