import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from magfig import PanelSpec, SchemaError, render
from magfig.cli import main as cli_main


def write_trace(path, times, e_raw, extra=None):
    e_raw = np.asarray(e_raw, dtype=float)
    peak = e_raw.max()
    e_norm = e_raw / peak if peak > 0 else np.zeros_like(e_raw)
    header = ["t", "e_raw", "e_normalized"] + list(extra or [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, t in enumerate(times):
            row = [repr(float(t)), repr(float(e_raw[i])), repr(float(e_norm[i]))]
            row += [repr(0.0)] * len(extra or [])
            writer.writerow(row)
    return np.asarray(times, dtype=float), e_raw, e_norm


@pytest.fixture
def trace_files(tmp_path):
    times = np.linspace(0, 1.5e-9, 31)
    a = write_trace(tmp_path / "a.csv", times, np.abs(np.sin(times * 3e9)) * 2e-8)
    b = write_trace(tmp_path / "b.csv", times, np.abs(np.cos(times * 3e9)) * 1e-8)
    return tmp_path, a, b


class TestTraceOverlay:
    def test_read_back_matches_csv(self, trace_files):
        tmp, (times, e_raw, _), _ = trace_files
        spec = PanelSpec(
            kind="trace-overlay",
            inputs=[str(tmp / "a.csv"), str(tmp / "b.csv")],
            labels=["a", "b"],
        )
        fig = render(spec, str(tmp / "out.png"))
        line = fig.axes[0].get_lines()[0]
        xy = line.get_xydata()
        assert np.array_equal(xy[:, 0], times * 1e9)
        assert np.array_equal(xy[:, 1], e_raw)

    def test_normalized_toggle(self, trace_files):
        tmp, (times, e_raw, e_norm), _ = trace_files
        spec = PanelSpec(
            kind="trace-overlay", inputs=[str(tmp / "a.csv")], normalized=True
        )
        fig = render(spec, str(tmp / "out.png"))
        y = fig.axes[0].get_lines()[0].get_ydata()
        assert np.array_equal(y, e_norm)
        assert y.max() == 1.0

    def test_rerender_is_byte_identical(self, trace_files):
        tmp, _, _ = trace_files
        spec = PanelSpec(kind="trace-overlay", inputs=[str(tmp / "a.csv")])
        render(spec, str(tmp / "one.png"))
        render(spec, str(tmp / "two.png"))
        assert (tmp / "one.png").read_bytes() == (tmp / "two.png").read_bytes()


class TestSchemaErrors:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SchemaError, match="empty"):
            render(
                PanelSpec(kind="trace-overlay", inputs=[str(path)]),
                str(tmp_path / "o.png"),
            )

    def test_missing_column_is_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,wrong\n0.0,1.0\n")
        with pytest.raises(SchemaError, match="e_raw"):
            render(
                PanelSpec(kind="trace-overlay", inputs=[str(path)]),
                str(tmp_path / "o.png"),
            )

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError, match="does not exist"):
            PanelSpec(kind="trace-overlay", inputs=[str(tmp_path / "nope.csv")])

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(SchemaError, match="kind"):
            PanelSpec(kind="pie", inputs=[])


class TestSweepPanel:
    def test_sweep_render(self, tmp_path):
        path = tmp_path / "sweep.csv"
        values = [1e6, 1e8, 1e10]
        avgs = [3e-9, 2e-9, 5e-10]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["kind", "alpha", "e_avg"])
            for v, e in zip(values, avgs):
                writer.writerow(["first_order", repr(v), repr(e)])
            writer.writerow(["zeroth_reference", "nan", repr(3.5e-9)])
        fig = render(
            PanelSpec(kind="sweep", inputs=[str(path)]), str(tmp_path / "o.png")
        )
        line = fig.axes[0].get_lines()[0]
        assert np.array_equal(line.get_xdata(), values)
        assert np.array_equal(line.get_ydata(), avgs)


@pytest.fixture(scope="module")
def compare_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cmp")
    cmd = [
        "magcav", "compare-dm",
        "--preset", "fe8",
        "--spin", "1",
        "--mode-levels", "3",
        "--tmax", "2e-10",
        "--points", "41",
        "--out", str(out),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    return out


@pytest.mark.skipif(shutil.which("magcav") is None, reason="simulation CLI not installed")
class TestComparisonGridFromPipeline:

    def test_grid_read_back(self, compare_dir, tmp_path):
        summary = compare_dir / "compare_summary.csv"
        spec = PanelSpec(kind="comparison", inputs=[str(summary)], title="engines")
        fig = render(spec, str(tmp_path / "grid.png"))
        assert len(fig.axes) == 6  # 2 multipliers x 3 orders
        meta = json.loads((summary.parent / "compare_summary.csv.json").read_text())
        # every panel's first line is the density-matrix trace, untouched
        for mult, row in zip((1.0, 3.0), (0, 1)):
            dm_csv = compare_dir / meta["files"][f"{mult:g}:dm"]
            with open(dm_csv, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                rows = [[float(x) for x in r] for r in reader]
            data = np.array(rows)
            t = data[:, header.index("t")]
            e = data[:, header.index("e_raw")]
            for col in range(3):
                line = fig.axes[row * 3 + col].get_lines()[0]
                assert np.array_equal(line.get_xdata(), t * 1e9)
                assert np.array_equal(line.get_ydata(), e)

    def test_cli_entry_point(self, compare_dir, tmp_path):
        spec_path = tmp_path / "panel.json"
        spec_path.write_text(
            json.dumps(
                {
                    "kind": "comparison",
                    "inputs": [str(compare_dir / "compare_summary.csv")],
                    "title": "comparison",
                }
            )
        )
        out = tmp_path / "fig.png"
        assert cli_main(["render", "--spec", str(spec_path), "--out", str(out)]) == 0
        assert out.exists() and out.stat().st_size > 0
