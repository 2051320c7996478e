"""CLI: render one panel from a JSON spec."""

from __future__ import annotations

import argparse
import json
import sys

import matplotlib.pyplot as plt

from .panels import PanelSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magcav-render")
    parser.add_argument("command", choices=["render"])
    parser.add_argument("--spec", required=True, help="panel spec JSON file")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PanelSpec.from_json(args.spec)
        fig = render(spec, args.out)
        plt.close(fig)
        print(args.out)
        return 0
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
