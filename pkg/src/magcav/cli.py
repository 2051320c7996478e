"""Command-line interface.

Each subcommand resolves a configuration (preset, optional config file,
--set overrides), runs one recipe and writes CSV + JSON artifacts into
--out.  On failure a machine-readable JSON error is printed to stdout and
the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness
from .config import apply_overrides, load_config_file, load_preset
from .harness import (
    AVERAGING_WINDOW,
    compare_cm_dm,
    dm_comparison_config,
    run_entanglement_trace,
    run_mn12_suite,
    run_truncation_study,
    sweep_alpha,
    sweep_bath_size,
    write_comparison,
    write_sweep_csv,
    write_trace_csv,
)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--preset", choices=["fe8", "mn12"], default="fe8")
    parser.add_argument("--config", help="INI configuration file", default=None)
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config field, e.g. preset.alpha=3e9 (repeatable)",
    )
    parser.add_argument("--tmax", type=float, default=harness.DEFAULT_TMAX,
                        help="end of the time grid in seconds")
    parser.add_argument("--points", type=int, default=harness.DEFAULT_POINTS)
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--workers", type=int, default=None)


def _resolve_config(args):
    if args.config:
        cfg = load_config_file(args.config)
    else:
        cfg = load_preset(args.preset)
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value
    return apply_overrides(cfg, overrides) if overrides else cfg


def _grid(args):
    return np.linspace(0.0, args.tmax, args.points)


def _out(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magcav",
        description="Cavity-mode entanglement mediated by a molecular nanomagnet",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="covariance-engine entanglement trace")
    _add_common(p)
    p.add_argument("--order", choices=["zeroth", "first", "second"], default="zeroth")
    p.add_argument(
        "--fixed-partition",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="use one trace-wide partition (default); disable to re-optimize per time",
    )

    p = sub.add_parser("sweep-alpha", help="averaged entanglement vs hyperfine coupling")
    _add_common(p)
    p.add_argument(
        "--alphas",
        default="0,1e6,3.162e6,1e7,3.162e7,1e8,3.162e8,1e9,3.162e9,1e10,3.162e10,1e11,3.162e11,1e12",
        help="comma-separated coupling values in rad/s",
    )

    p = sub.add_parser("sweep-bath", help="averaged entanglement vs bath size")
    _add_common(p)
    p.add_argument("--bath-sizes", default="10,50,100,200")

    p = sub.add_parser("compare-dm", help="density-matrix vs covariance engines")
    _add_common(p)
    p.add_argument("--multipliers", default="1,3", help="axial anisotropy multipliers")
    p.add_argument("--spin", type=float, default=3.0)
    p.add_argument("--mode-levels", type=int, default=4)

    p = sub.add_parser("truncation-study", help="entanglement vs Hilbert-space cut")
    _add_common(p)
    p.add_argument("--powers", default="1e-14,1e-13,1e-12", help="watts, comma-separated")
    p.add_argument("--levels", default="4,5")
    p.add_argument("--spin", type=float, default=2.0)

    p = sub.add_parser("mn12-suite", help="all three orders for the Mn12 preset")
    _add_common(p)

    return parser


def _cmd_trace(args) -> int:
    cfg = _resolve_config(args)
    trace = run_entanglement_trace(
        cfg, args.order, _grid(args), fixed_partition=args.fixed_partition
    )
    path = _out(args, f"trace_{args.order}.csv")
    write_trace_csv(trace, path, cfg)
    print(path)
    return 0


def _cmd_sweep_alpha(args) -> int:
    cfg = _resolve_config(args)
    alphas = [float(x) for x in args.alphas.split(",")]
    table = sweep_alpha(cfg, alphas, workers=args.workers)
    path = _out(args, "sweep_alpha.csv")
    write_sweep_csv(table, path, cfg)
    print(path)
    return 0


def _cmd_sweep_bath(args) -> int:
    cfg = _resolve_config(args)
    sizes = [int(x) for x in args.bath_sizes.split(",")]
    table = sweep_bath_size(cfg, sizes, workers=args.workers)
    path = _out(args, "sweep_bath.csv")
    write_sweep_csv(table, path, cfg)
    print(path)
    return 0


def _cmd_compare_dm(args) -> int:
    from .lindblad import TruncationSpec

    cfg = dm_comparison_config(_resolve_config(args), spin=args.spin)
    multipliers = [float(x) for x in args.multipliers.split(",")]
    spec = TruncationSpec(mode_levels=args.mode_levels, spin=args.spin, mode_count=2)
    result = compare_cm_dm(cfg, multipliers, _grid(args), spec=spec)
    summary = write_comparison(result, args.out, cfg)
    print(summary)
    return 0


def _cmd_truncation(args) -> int:
    cfg = _resolve_config(args)
    powers = [float(x) for x in args.powers.split(",")]
    levels = [int(x) for x in args.levels.split(",")]
    result = run_truncation_study(cfg, powers, levels, args.spin, _grid(args))
    rows = []
    for power in powers:
        for level in levels:
            trace = result["traces"][(power, level)]
            rows.append([float(power), level, float(trace.max()), result["t_star"][power]])
    path = _out(args, "truncation_study.csv")
    harness.write_rows(path, ["power_w", "mode_levels", "e_peak", "t_star"], rows)
    for power in powers:
        for level in levels:
            trace = result["traces"][(power, level)]
            tpath = _out(args, f"truncation_p{power:g}_l{level}.csv")
            harness.write_rows(
                tpath,
                ["t", "e_raw"],
                [[float(t), float(e)] for t, e in zip(result["times"], trace)],
            )
    print(path)
    return 0


def _cmd_mn12(args) -> int:
    bundle = run_mn12_suite(_grid(args))
    for order, trace in bundle["traces"].items():
        write_trace_csv(trace, _out(args, f"mn12_{order}.csv"), bundle["config"])
    rows = [[order, bundle["averages"][order]] for order in bundle["averages"]]
    rows.append(["second_vs_zeroth_gap", bundle["second_vs_zeroth_gap"]])
    path = _out(args, "mn12_summary.csv")
    harness.write_rows(path, ["quantity", "value"], rows)
    print(path)
    return 0


_COMMANDS = {
    "trace": _cmd_trace,
    "sweep-alpha": _cmd_sweep_alpha,
    "sweep-bath": _cmd_sweep_bath,
    "compare-dm": _cmd_compare_dm,
    "truncation-study": _cmd_truncation,
    "mn12-suite": _cmd_mn12,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # surface every failure as machine-readable JSON
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
