"""Reproduction recipes: entanglement traces, parameter sweeps and the
covariance-vs-density-matrix comparison, with CSV/JSON export.

Every recipe is a pure function of (config, grid); outputs are written as
UTF-8 CSV files whose floats are emitted with repr() so each row parses
back to bit-identical values, plus a JSON sidecar holding the fully
resolved configuration and run metadata.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import PhysicalConfig, config_as_dict, load_preset
from .drift import build_drift, propagate_covariance
from .entanglement import ModePartition, balanced_partitions, log_negativity
from .lindblad import TruncationSpec, entanglement_trace_dm, truncation_study
from .meanfield import solve_mean_amplitudes

DEFAULT_TMAX = 1.5e-9
DEFAULT_POINTS = 1500
AVERAGING_WINDOW = (0.0, 0.8e-9)
CM_ORDERS = ("zeroth", "first", "second")


def default_time_grid(tmax: float = DEFAULT_TMAX, points: int = DEFAULT_POINTS):
    return np.linspace(0.0, tmax, points)


def config_fingerprint(cfg: PhysicalConfig) -> str:
    payload = json.dumps(config_as_dict(cfg), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class EntanglementTrace:
    """Log-negativity along a time grid for one engine and one partition."""

    times: np.ndarray
    e_raw: np.ndarray
    e_normalized: np.ndarray
    engine: str
    partition: ModePartition | None
    fingerprint: str
    normalization_divisor: float
    fixed_partition: bool = True
    argmax_partitions: list[ModePartition] | None = None
    purity: np.ndarray | None = None
    trace_defect: np.ndarray | None = None

    def time_average(self, window=AVERAGING_WINDOW) -> float:
        lo, hi = window
        mask = (self.times >= lo) & (self.times <= hi)
        if not mask.any():
            raise ValueError("averaging window contains no grid points")
        return float(self.e_raw[mask].mean())


def _normalized(e_raw: np.ndarray) -> tuple[np.ndarray, float]:
    divisor = float(e_raw.max(initial=0.0))
    if divisor == 0.0:
        return np.zeros_like(e_raw), 0.0
    return e_raw / divisor, divisor


def normalize_trace(trace: EntanglementTrace) -> EntanglementTrace:
    """Rescale so the dynamical maximum is 1; zero traces stay zero and the
    recorded divisor flags that (divisor 0)."""
    e_norm, divisor = _normalized(trace.e_raw)
    return replace(trace, e_normalized=e_norm, normalization_divisor=divisor)


def run_entanglement_trace(
    cfg: PhysicalConfig,
    order: str,
    times=None,
    fixed_partition: bool = True,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> EntanglementTrace:
    """Covariance-engine entanglement trace from the vacuum state.

    The balanced bipartition maximizing the inter-group entanglement is
    either fixed for the whole trace (the one with the largest
    time-averaged value; the default, used for figure data) or chosen
    again at every output time, in which case the per-time argmax
    partitions are logged on the returned trace.
    """
    if times is None:
        times = default_time_grid()
    times = np.asarray(times, dtype=float)
    means = solve_mean_amplitudes(cfg) if order == "second" else None
    model = build_drift(cfg, order, means)
    states = propagate_covariance(model, None, times, rtol=rtol, atol=atol)
    parts = balanced_partitions(cfg.mode_count)
    e_matrix = np.zeros((times.size, len(parts)))
    for i, state in enumerate(states):
        for j, part in enumerate(parts):
            e_matrix[i, j] = log_negativity(state.v, part)

    if fixed_partition:
        best = int(e_matrix.mean(axis=0).argmax())
        e_raw = e_matrix[:, best]
        partition = parts[best]
        argmax_list = None
    else:
        per_time = e_matrix.argmax(axis=1)
        e_raw = e_matrix[np.arange(times.size), per_time]
        counts = np.bincount(per_time, minlength=len(parts))
        partition = parts[int(counts.argmax())]
        argmax_list = [parts[j] for j in per_time]

    e_norm, divisor = _normalized(e_raw)
    return EntanglementTrace(
        times=times,
        e_raw=e_raw,
        e_normalized=e_norm,
        engine=f"cm-{order}",
        partition=partition,
        fingerprint=config_fingerprint(cfg),
        normalization_divisor=divisor,
        fixed_partition=fixed_partition,
        argmax_partitions=argmax_list,
    )


def run_entanglement_trace_dm(
    cfg: PhysicalConfig,
    spec: TruncationSpec | None = None,
    times=None,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> EntanglementTrace:
    """Density-matrix engine trace between the two retained cavity modes."""
    if spec is None:
        spec = TruncationSpec()
    if times is None:
        times = default_time_grid(points=601)
    times = np.asarray(times, dtype=float)
    data = entanglement_trace_dm(cfg, spec, times, rtol=rtol, atol=atol)
    e_norm, divisor = _normalized(data["e_raw"])
    return EntanglementTrace(
        times=times,
        e_raw=data["e_raw"],
        e_normalized=e_norm,
        engine="dm",
        partition=ModePartition((1,), (2,)),
        fingerprint=config_fingerprint(cfg),
        normalization_divisor=divisor,
        purity=data["purity"],
        trace_defect=data["trace_defect"],
    )


# -- sweeps ---------------------------------------------------------------------


@dataclass
class SweepTable:
    """Time-averaged entanglement against one swept parameter."""

    parameter: str
    values: list[float]
    e_avg: list[float]
    zeroth_reference: float
    window: tuple[float, float]
    fingerprint: str


def _trace_average_task(args) -> float:
    cfg, order, times, window = args
    trace = run_entanglement_trace(cfg, order, times)
    return trace.time_average(window)


def _run_pool(tasks, workers: int | None):
    if workers is None:
        workers = min(os.cpu_count() or 1, len(tasks))
    if workers <= 1 or len(tasks) <= 1:
        return [_trace_average_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trace_average_task, tasks))


def sweep_alpha(
    cfg: PhysicalConfig,
    alphas,
    times=None,
    window=AVERAGING_WINDOW,
    workers: int | None = None,
) -> SweepTable:
    """First-order averaged entanglement against the hyperfine flip-flop
    coupling; the Ising coupling stays at its preset value.  Includes the
    alpha-independent zeroth-order reference."""
    if times is None:
        times = default_time_grid(tmax=window[1], points=401)
    tasks = []
    for alpha in alphas:
        cfg_a = replace(cfg, preset=replace(cfg.preset, alpha=float(alpha)))
        tasks.append((cfg_a, "first", times, window))
    averages = _run_pool(tasks, workers)
    reference = run_entanglement_trace(cfg, "zeroth", times).time_average(window)
    return SweepTable(
        parameter="alpha",
        values=[float(a) for a in alphas],
        e_avg=averages,
        zeroth_reference=reference,
        window=window,
        fingerprint=config_fingerprint(cfg),
    )


def sweep_bath_size(
    cfg: PhysicalConfig,
    bath_sizes,
    times=None,
    window=AVERAGING_WINDOW,
    workers: int | None = None,
) -> SweepTable:
    """First-order averaged entanglement against the bath spin count N,
    with the collective spin J = N/2 recomputed per value."""
    if times is None:
        times = default_time_grid(tmax=window[1], points=401)
    tasks = []
    for n in bath_sizes:
        cfg_n = replace(cfg, preset=replace(cfg.preset, n_bath=int(n)))
        tasks.append((cfg_n, "first", times, window))
    averages = _run_pool(tasks, workers)
    reference = run_entanglement_trace(cfg, "zeroth", times).time_average(window)
    return SweepTable(
        parameter="n_bath",
        values=[float(n) for n in bath_sizes],
        e_avg=averages,
        zeroth_reference=reference,
        window=window,
        fingerprint=config_fingerprint(cfg),
    )


# -- comparisons ------------------------------------------------------------------


def dm_comparison_config(
    base: PhysicalConfig, spin: float = 3.0, mode_count: int = 2
) -> PhysicalConfig:
    """Shrink a preset to the comparison setting: small spin, two modes."""
    return replace(
        base,
        preset=replace(base.preset, spin=spin),
        geometry=replace(base.geometry, mode_count=mode_count),
    )


@dataclass
class ComparisonResult:
    multipliers: list[float]
    traces: dict  # (multiplier, engine) -> EntanglementTrace
    averages: dict  # (multiplier, engine) -> float
    ratios: dict  # (multiplier, cm engine) -> dm_avg / cm_avg
    closest_order: dict  # multiplier -> engine name
    window: tuple[float, float]


def compare_cm_dm(
    cfg: PhysicalConfig,
    multipliers=(1.0, 3.0),
    times=None,
    window=AVERAGING_WINDOW,
    spec: TruncationSpec | None = None,
    dm_rtol: float = 1e-11,
) -> ComparisonResult:
    """Density-matrix trace against all three covariance orders, per axial
    anisotropy multiplier, with time-averaged values and DM/CM ratios."""
    if spec is None:
        spec = TruncationSpec(mode_levels=4, spin=cfg.spin, mode_count=cfg.mode_count)
    if times is None:
        times = default_time_grid(points=601)
    traces: dict = {}
    averages: dict = {}
    ratios: dict = {}
    closest: dict = {}
    for mult in multipliers:
        cfg_m = replace(
            cfg, preset=replace(cfg.preset, d_axial=cfg.preset.d_axial * float(mult))
        )
        dm_trace = run_entanglement_trace_dm(cfg_m, spec, times, rtol=dm_rtol)
        traces[(mult, "dm")] = dm_trace
        dm_avg = dm_trace.time_average(window)
        averages[(mult, "dm")] = dm_avg
        log_distance = {}
        for order in CM_ORDERS:
            cm_trace = run_entanglement_trace(cfg_m, order, times)
            engine = cm_trace.engine
            traces[(mult, engine)] = cm_trace
            cm_avg = cm_trace.time_average(window)
            averages[(mult, engine)] = cm_avg
            ratio = dm_avg / cm_avg if cm_avg > 0 else math.inf
            ratios[(mult, engine)] = ratio
            log_distance[engine] = abs(math.log10(ratio)) if ratio > 0 else math.inf
        closest[mult] = min(log_distance, key=log_distance.get)
    return ComparisonResult(
        multipliers=[float(m) for m in multipliers],
        traces=traces,
        averages=averages,
        ratios=ratios,
        closest_order=closest,
        window=window,
    )


def run_mn12_suite(times=None, window=AVERAGING_WINDOW) -> dict:
    """Traces at all three orders for the Mn12 preset plus the relative
    zeroth-to-second gap (the nonlinearity has a visibly larger effect here
    than for Fe8)."""
    cfg = load_preset("mn12")
    if times is None:
        times = default_time_grid()
    traces = {order: run_entanglement_trace(cfg, order, times) for order in CM_ORDERS}
    averages = {order: traces[order].time_average(window) for order in CM_ORDERS}
    gap = abs(averages["second"] - averages["zeroth"]) / averages["zeroth"]
    return {
        "config": cfg,
        "traces": traces,
        "averages": averages,
        "second_vs_zeroth_gap": gap,
        "window": window,
    }


def run_truncation_study(
    cfg: PhysicalConfig,
    powers=(1e-14, 1e-13, 1e-12),
    levels=(4, 5),
    spin: float = 2.0,
    times=None,
    rtol: float = 1e-11,
) -> dict:
    """Dimensionality diagnostic at a small spin: how fast entanglement
    traces from adjacent Hilbert-space cuts separate as the drive grows."""
    if times is None:
        times = default_time_grid(points=601)
    cfg_small = replace(cfg, preset=replace(cfg.preset, spin=spin))
    specs = [TruncationSpec(mode_levels=lv, spin=spin, mode_count=2) for lv in levels]
    cfg_small = replace(cfg_small, geometry=replace(cfg_small.geometry, mode_count=2))
    result = truncation_study(cfg_small, powers, specs, times, rtol=rtol)
    result["config"] = cfg_small
    result["levels"] = list(levels)
    result["powers"] = list(powers)
    return result


# -- CSV / JSON output -------------------------------------------------------------


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _partition_str(partition: ModePartition | None) -> str:
    if partition is None:
        return ""
    a = ";".join(str(m) for m in partition.group_a)
    b = ";".join(str(m) for m in partition.group_b)
    return f"{a}|{b}"


def write_trace_csv(trace: EntanglementTrace, path: str, cfg: PhysicalConfig | None = None):
    """Trace CSV plus a .json sidecar with the resolved configuration."""
    header = ["t", "e_raw", "e_normalized"]
    columns = [trace.times, trace.e_raw, trace.e_normalized]
    if trace.purity is not None:
        header += ["purity", "trace_defect"]
        columns += [trace.purity, trace.trace_defect]
    rows = [[float(c[i]) for c in columns] for i in range(trace.times.size)]
    write_rows(path, header, rows)
    sidecar = {
        "engine": trace.engine,
        "partition": _partition_str(trace.partition),
        "fixed_partition": trace.fixed_partition,
        "normalization_divisor": trace.normalization_divisor,
        "fingerprint": trace.fingerprint,
    }
    if trace.argmax_partitions is not None:
        sidecar["argmax_partitions"] = [_partition_str(p) for p in trace.argmax_partitions]
    if cfg is not None:
        sidecar["config"] = config_as_dict(cfg)
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def parse_trace_csv(path: str) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_sweep_csv(table: SweepTable, path: str, cfg: PhysicalConfig | None = None):
    rows = [["first_order", v, e] for v, e in zip(table.values, table.e_avg)]
    rows.append(["zeroth_reference", float("nan"), table.zeroth_reference])
    write_rows(path, ["kind", table.parameter, "e_avg"], rows)
    sidecar = {
        "parameter": table.parameter,
        "window": list(table.window),
        "fingerprint": table.fingerprint,
    }
    if cfg is not None:
        sidecar["config"] = config_as_dict(cfg)
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def write_comparison(result: ComparisonResult, outdir: str, cfg: PhysicalConfig | None = None):
    """One summary CSV plus one trace CSV per (multiplier, engine)."""
    os.makedirs(outdir, exist_ok=True)
    files = {}
    for (mult, engine), trace in result.traces.items():
        tag = f"d{mult:g}_{engine.replace('-', '_')}"
        path = os.path.join(outdir, f"compare_{tag}.csv")
        write_trace_csv(trace, path, cfg)
        files[f"{mult:g}:{engine}"] = os.path.basename(path)
    rows = []
    for (mult, engine), avg in sorted(result.averages.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        ratio = result.ratios.get((mult, engine), float("nan"))
        rows.append([mult, engine, avg, ratio])
    summary = os.path.join(outdir, "compare_summary.csv")
    write_rows(summary, ["multiplier", "engine", "e_avg", "dm_over_cm_ratio"], rows)
    sidecar = {
        "window": list(result.window),
        "closest_order": {f"{k:g}": v for k, v in result.closest_order.items()},
        "files": files,
    }
    if cfg is not None:
        sidecar["config"] = config_as_dict(cfg)
    with open(summary + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
    return summary


def write_means_csv(configs, path: str):
    """Stationary mean amplitudes, one row per configuration.

    Columns: drive power, Re/Im of every mode amplitude, Re/Im of the spin
    and bath amplitudes, and the fixed-point residual.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("need at least one configuration")
    n_modes = configs[0].mode_count
    header = ["power_w"]
    for m in range(1, n_modes + 1):
        header += [f"re_a{m}", f"im_a{m}"]
    header += ["re_s", "im_s", "re_n", "im_n", "residual"]
    rows = []
    for cfg in configs:
        means = solve_mean_amplitudes(cfg)
        row = [float(cfg.drive.power)]
        for a in means.a_means:
            row += [a.real, a.imag]
        row += [
            means.s_mean.real,
            means.s_mean.imag,
            means.n_mean.real,
            means.n_mean.imag,
            means.residual,
        ]
        rows.append(row)
    write_rows(path, header, rows)


def export_covariance_csv(states, layout, path: str):
    """Covariance trajectory as (t, upper-triangle entries by layout order)."""
    dim = len(layout)
    header = ["t"] + [
        f"{layout[i]}*{layout[j]}" for i in range(dim) for j in range(i, dim)
    ]
    rows = []
    for state in states:
        row = [float(state.time)]
        for i in range(dim):
            for j in range(i, dim):
                row.append(float(state.v[i, j]))
        rows.append(row)
    write_rows(path, header, rows)
