"""Command line for rendering modkernel figures from CSV outputs."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render
from .reader import BadInput


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="modplot",
        description="Render kernel heatmaps and mass-scan curves from "
                    "modkernel CSV files.")
    sub = ap.add_subparsers(dest="command", required=True)
    ph = sub.add_parser("heatmap", help="kernel heatmap plus diagonal slice")
    ph.add_argument("--in", dest="inputs", action="append", required=True,
                    help="kernel CSV (exactly one)")
    ph.add_argument("--out", required=True, help="output image (.pdf/.png)")
    ph.add_argument("--title", default="")
    ps = sub.add_parser("scan", help="smeared-value curves across masses")
    ps.add_argument("--in", dest="inputs", action="append", required=True,
                    help="scan CSV, repeatable for a mass ladder")
    ps.add_argument("--out", required=True)
    ps.add_argument("--title", default="")
    ps.add_argument("--overlay-parabola", action="store_true",
                    help="massless double-cone parabola")
    ps.add_argument("--overlay-wedge", action="store_true",
                    help="large-mass wedge-line asymptotes")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            inputs=args.inputs,
            kind=args.command,
            out=args.out,
            overlay_parabola=getattr(args, "overlay_parabola", False),
            overlay_wedge_lines=getattr(args, "overlay_wedge", False),
            title=args.title,
        )
        path = render(spec)
    except BadInput as e:
        print(f"modplot: {e}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
