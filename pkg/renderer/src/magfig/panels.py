"""Figure panels from simulation CSV output.

Consumes only the public CSV/JSON contract of the simulation CLI: trace
files with columns (t, e_raw, e_normalized, ...), sweep files with
(kind, <param>, e_avg) and the compare-dm summary whose JSON sidecar
lists the per-engine trace files.  The renderer never transforms data
beyond the declared normalization toggle: what is plotted is exactly
what was parsed, which the tests verify by reading the line data back
out of the figure.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGSIZE_SINGLE = (6.0, 4.0)
FIGSIZE_GRID = (12.0, 6.5)
DPI = 150

PANEL_KINDS = ("trace-overlay", "sweep", "comparison")


class SchemaError(ValueError):
    pass


@dataclass
class PanelSpec:
    """One figure: input files, kind and labels."""

    kind: str
    inputs: list[str]
    labels: list[str] = field(default_factory=list)
    normalized: bool = False
    title: str = ""

    def __post_init__(self):
        if self.kind not in PANEL_KINDS:
            raise SchemaError(f"unknown panel kind {self.kind!r}; expected {PANEL_KINDS}")
        if not self.inputs:
            raise SchemaError("panel needs at least one input file")
        for path in self.inputs:
            if not os.path.exists(path):
                raise SchemaError(f"input file does not exist: {path}")

    @classmethod
    def from_json(cls, path: str) -> "PanelSpec":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))
        inputs = [
            p if os.path.isabs(p) else os.path.join(base, p)
            for p in raw.get("inputs", [])
        ]
        return cls(
            kind=raw.get("kind", ""),
            inputs=inputs,
            labels=raw.get("labels", []),
            normalized=raw.get("normalized", False),
            title=raw.get("title", ""),
        )


def read_csv_columns(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Columns of a CSV file; numeric where possible, strings otherwise."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = list(reader)
    for column in required:
        if column not in header:
            raise SchemaError(f"{path}: missing column {column!r} (have {header})")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out: dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        raw = [row[i] for row in rows]
        try:
            out[name] = np.array([float(x) for x in raw])
        except ValueError:
            out[name] = np.array(raw)
    return out


def _trace_label(path: str, fallback: str) -> str:
    sidecar = path + ".json"
    if os.path.exists(sidecar):
        with open(sidecar, encoding="utf-8") as fh:
            meta = json.load(fh)
        return meta.get("engine", fallback)
    return fallback


def render_trace_overlay(spec: PanelSpec) -> plt.Figure:
    fig, ax = plt.subplots(figsize=FIGSIZE_SINGLE, dpi=DPI)
    column = "e_normalized" if spec.normalized else "e_raw"
    for i, path in enumerate(spec.inputs):
        data = read_csv_columns(path, ("t", column))
        label = spec.labels[i] if i < len(spec.labels) else _trace_label(path, f"trace {i}")
        ax.plot(data["t"] * 1e9, data[column], label=label, linewidth=1.0)
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("normalized entanglement" if spec.normalized else "log-negativity")
    ax.set_title(spec.title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def render_sweep(spec: PanelSpec) -> plt.Figure:
    fig, ax = plt.subplots(figsize=FIGSIZE_SINGLE, dpi=DPI)
    for i, path in enumerate(spec.inputs):
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh))
        if len(header) != 3 or header[0] != "kind" or header[2] != "e_avg":
            raise SchemaError(f"{path}: not a sweep file (header {header})")
        parameter = header[1]
        data = read_csv_columns(path, ("kind", parameter, "e_avg"))
        mask = data["kind"] == "first_order"
        label = spec.labels[i] if i < len(spec.labels) else parameter
        ax.plot(data[parameter][mask], data["e_avg"][mask], marker="o",
                markersize=3, linewidth=1.0, label=label)
        reference = data["e_avg"][~mask]
        if reference.size:
            ax.axhline(reference[0], linestyle="--", linewidth=0.8, color="0.4")
    ax.set_xscale("log")
    ax.set_xlabel(parameter)
    ax.set_ylabel("time-averaged log-negativity")
    ax.set_title(spec.title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def render_comparison(spec: PanelSpec) -> plt.Figure:
    """Grid of engine overlays: rows are anisotropy multipliers, columns the
    covariance orders, each panel showing the density-matrix trace against
    one covariance trace with dashed lines at the recorded time averages."""
    summary_path = spec.inputs[0]
    data = read_csv_columns(summary_path, ("multiplier", "engine", "e_avg"))
    averages = {
        (float(m), str(e)): float(a)
        for m, e, a in zip(data["multiplier"], data["engine"], data["e_avg"])
    }
    with open(summary_path + ".json", encoding="utf-8") as fh:
        meta = json.load(fh)
    base = os.path.dirname(os.path.abspath(summary_path))
    files = {key: os.path.join(base, name) for key, name in meta["files"].items()}

    multipliers = sorted({m for m, _ in averages})
    orders = ["cm-zeroth", "cm-first", "cm-second"]
    fig, axes = plt.subplots(
        len(multipliers), len(orders), figsize=FIGSIZE_GRID, dpi=DPI,
        sharex=True, squeeze=False,
    )
    column = "e_normalized" if spec.normalized else "e_raw"
    for i, mult in enumerate(multipliers):
        dm = read_csv_columns(files[f"{mult:g}:dm"], ("t", column))
        for j, order in enumerate(orders):
            ax = axes[i][j]
            cm = read_csv_columns(files[f"{mult:g}:{order}"], ("t", column))
            ax.plot(dm["t"] * 1e9, dm[column], label="dm", linewidth=0.9)
            ax.plot(cm["t"] * 1e9, cm[column], label=order, linewidth=0.9)
            if not spec.normalized:
                ax.axhline(averages[(mult, "dm")], linestyle="--", linewidth=0.8)
                ax.axhline(averages[(mult, order)], linestyle="--", linewidth=0.8)
            ax.set_title(f"{order} (D x{mult:g})", fontsize=9)
            ax.legend(frameon=False, fontsize=7)
            if i == len(multipliers) - 1:
                ax.set_xlabel("time (ns)")
            if j == 0:
                ax.set_ylabel("log-negativity")
    fig.suptitle(spec.title)
    fig.tight_layout()
    return fig


_RENDERERS = {
    "trace-overlay": render_trace_overlay,
    "sweep": render_sweep,
    "comparison": render_comparison,
}


def render(spec: PanelSpec, out: str) -> plt.Figure:
    """Render one panel and write the image; returns the figure object so
    callers (and tests) can inspect the plotted data."""
    fig = _RENDERERS[spec.kind](spec)
    fig.savefig(out, metadata={"Software": "magcav-figures"})
    return fig
