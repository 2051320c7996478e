"""Entanglement witness simulations for a molecular nanomagnet coupled to a
driven multi-mode cavity: Gaussian covariance dynamics at three model
orders, a truncated Lindblad engine, symplectic entanglement analysis and
reproduction recipes."""

from .config import (
    CavityGeometry,
    DriveConfig,
    PhysicalConfig,
    SmmPreset,
    derive_cavity,
    hp_frequencies,
    load_preset,
    pump_amplitude,
    zeeman_frequencies,
)
from .drift import (
    CovarianceState,
    DriftModel,
    build_drift,
    build_drift_first,
    build_drift_second,
    build_drift_zeroth,
    covariance_closed_form,
    propagate_covariance,
    propagate_mean,
    stability_check,
    steady_state_covariance,
)
from .entanglement import (
    ModePartition,
    balanced_partitions,
    best_balanced_partition,
    log_negativity,
    partial_transpose,
    physicality_check,
    symplectic_eigenvalues,
    symplectic_form,
)
from .harness import (
    EntanglementTrace,
    SweepTable,
    compare_cm_dm,
    config_fingerprint,
    default_time_grid,
    dm_comparison_config,
    export_covariance_csv,
    normalize_trace,
    parse_trace_csv,
    run_entanglement_trace,
    run_entanglement_trace_dm,
    run_mn12_suite,
    run_truncation_study,
    sweep_alpha,
    sweep_bath_size,
    write_comparison,
    write_means_csv,
    write_sweep_csv,
    write_trace_csv,
)
from .lindblad import (
    OperatorSet,
    TruncatedState,
    TruncationSpec,
    build_hamiltonian_dm,
    build_operators,
    dm_log_negativity,
    evolve_master_equation,
    initial_state,
    reduced_modes_state,
    truncation_study,
)
from .meanfield import (
    MeanAmplitudes,
    fixed_point_mean_modulus,
    mean_residual,
    rotating_detunings,
    solve_mean_amplitudes,
)

__version__ = "0.1.0"
