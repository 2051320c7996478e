"""Truncated density-matrix evolution of the driven spin-photon model.

The Hilbert space is mode_1 x mode_2 x ... x spin with each mode cut at a
finite photon number.  The master equation

    drho/dt = -i [H, rho] + kappa_s L_Sz[rho] + kappa sum_m L_am[rho],
    L_O[rho] = 2 O rho O^dag - {O^dag O, rho},

is integrated in the lab frame; the factor-2 superoperator convention
makes a decoupled mode's occupation decay as exp(-2 kappa t).  For
numerical conditioning the integrator works in the interaction picture of
the pump frequencies (a diagonal, mode-local rotation that leaves the
dissipators, the truncation and all mode-mode entanglement readouts
invariant, and makes no rotating-wave approximation); outputs are rotated
back to the lab frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .config import PhysicalConfig

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
EIGENVALUE_TOL = 1e-9
PURITY_TOL = 1e-9
HAMILTONIAN_HERM_RTOL = 1e-12


class DensityMatrixError(RuntimeError):
    pass


@dataclass(frozen=True)
class TruncationSpec:
    """Hilbert-space truncation: photon levels per mode and spin size."""

    mode_levels: int = 4
    spin: float = 3.0
    mode_count: int = 2

    def __post_init__(self):
        if self.mode_levels < 2:
            raise ValueError("mode_levels must be >= 2")
        if self.mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        if self.spin <= 0 or round(2 * self.spin) != 2 * self.spin:
            raise ValueError("spin must be a positive half-integer")

    @property
    def spin_levels(self) -> int:
        return int(round(2 * self.spin)) + 1

    @property
    def dim(self) -> int:
        return self.mode_levels**self.mode_count * self.spin_levels


@dataclass
class TruncatedState:
    """Density matrix over the truncated product space at one instant."""

    rho: np.ndarray
    time: float

    def trace_defect(self) -> float:
        return abs(float(np.trace(self.rho).real) - 1.0)

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def validate(self) -> "TruncatedState":
        herm = np.abs(self.rho - self.rho.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise DensityMatrixError(
                f"hermiticity defect {herm:.3e} at t = {self.time:.6e} s"
            )
        if self.trace_defect() > TRACE_TOL:
            raise DensityMatrixError(
                f"trace defect {self.trace_defect():.3e} at t = {self.time:.6e} s"
            )
        min_eig = float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])
        if min_eig < -EIGENVALUE_TOL:
            raise DensityMatrixError(
                f"negative eigenvalue {min_eig:.3e} at t = {self.time:.6e} s"
            )
        if self.purity() > 1.0 + PURITY_TOL:
            raise DensityMatrixError(
                f"purity {self.purity():.12f} exceeds 1 at t = {self.time:.6e} s"
            )
        return self


@dataclass
class OperatorSet:
    """Spin and truncated-boson operators embedded in the product space."""

    spec: TruncationSpec
    a: list[np.ndarray] = field(default_factory=list)  # one per mode
    sz: np.ndarray | None = None
    sp: np.ndarray | None = None
    sm: np.ndarray | None = None
    sx: np.ndarray | None = None
    sy: np.ndarray | None = None


def spin_matrices(spin: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Sz, S+, S-) in the basis |S>, |S-1>, ..., |-S>."""
    d = int(round(2 * spin)) + 1
    m = spin - np.arange(d)
    sz = np.diag(m)
    ladder = np.sqrt(spin * (spin + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.zeros((d, d))
    s_plus[np.arange(d - 1), np.arange(1, d)] = ladder
    return sz, s_plus, s_plus.T.copy()


def lowering_matrix(levels: int) -> np.ndarray:
    a = np.zeros((levels, levels))
    a[np.arange(levels - 1), np.arange(1, levels)] = np.sqrt(np.arange(1, levels))
    return a


def build_operators(spec: TruncationSpec) -> OperatorSet:
    """Embed single-factor operators by Kronecker products, modes first."""
    sz, s_plus, s_minus = spin_matrices(spec.spin)
    a_local = lowering_matrix(spec.mode_levels)
    eye_mode = np.eye(spec.mode_levels)
    eye_spin = np.eye(spec.spin_levels)

    def embed(factors):
        out = factors[0]
        for f in factors[1:]:
            out = np.kron(out, f)
        return out

    ops = OperatorSet(spec=spec)
    for m in range(spec.mode_count):
        factors = [eye_mode] * spec.mode_count + [eye_spin]
        factors[m] = a_local
        ops.a.append(embed(factors))
    spin_slot = [eye_mode] * spec.mode_count
    ops.sz = embed(spin_slot + [sz])
    ops.sp = embed(spin_slot + [s_plus])
    ops.sm = embed(spin_slot + [s_minus])
    ops.sx = 0.5 * (ops.sp + ops.sm)
    ops.sy = -0.5j * (ops.sp - ops.sm)
    return ops


def initial_state(spec: TruncationSpec) -> TruncatedState:
    """Cavity modes in vacuum, spin in the m = +S eigenstate of Sz.

    This is the density-matrix counterpart of the vacuum covariance: the
    bosonized spin has zero excitations at m = +S.
    """
    dim = spec.dim
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0  # index 0 = |0, ..., 0> x |m=+S>
    return TruncatedState(rho=np.outer(psi, psi.conj()), time=0.0)


def _drive_amplitudes(cfg: PhysicalConfig, n_modes: int):
    lams = cfg.pump_frequencies()[:n_modes]
    amps = cfg.pump_amplitudes()[:n_modes]
    return list(lams), list(amps)


def build_hamiltonian_dm(cfg: PhysicalConfig, ops: OperatorSet, t: float) -> np.ndarray:
    """Lab-frame Hamiltonian of the spin-photon model at time t."""
    spec = ops.spec
    freqs = cfg.mode_frequencies()[: spec.mode_count]
    lams, amps = _drive_amplitudes(cfg, spec.mode_count)
    p = cfg.preset
    h = (
        cfg.omega_e * ops.sz
        - p.d_axial * ops.sz @ ops.sz
        + p.e_transverse * (ops.sx @ ops.sx - ops.sy @ ops.sy)
    )
    for m, a in enumerate(ops.a):
        adag = a.conj().T
        h = h + freqs[m] * adag @ a + cfg.coupling_g * (adag + a) @ ops.sx
        phase = np.exp(-1j * lams[m] * t)
        h = h + 1j * amps[m] * (adag * phase - a * np.conj(phase))
    defect = np.abs(h - h.conj().T).max()
    scale = max(np.abs(h).max(), 1e-300)
    if defect > HAMILTONIAN_HERM_RTOL * scale:
        raise AssertionError(f"Hamiltonian hermiticity defect {defect:.3e}")
    return h


def _lindblad_superop(op: np.ndarray, rate: float) -> sp.csr_matrix:
    """rate * (2 O . O^dag - O^dag O . - . O^dag O) on row-major vec(rho)."""
    o = sp.csr_matrix(op)
    dim = op.shape[0]
    eye = sp.identity(dim, format="csr")
    odo = (o.conj().T @ o).tocsr()
    return (
        rate
        * (2.0 * sp.kron(o, o.conj()) - sp.kron(odo, eye) - sp.kron(eye, odo.T))
    ).tocsr()


def _commutator_superop(h: np.ndarray) -> sp.csr_matrix:
    hs = sp.csr_matrix(h)
    dim = h.shape[0]
    eye = sp.identity(dim, format="csr")
    return (-1j * (sp.kron(hs, eye) - sp.kron(eye, hs.T))).tocsr()


def evolve_master_equation(
    rho0: TruncatedState,
    cfg: PhysicalConfig,
    ops: OperatorSet,
    times,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    validate: bool = True,
) -> list[TruncatedState]:
    """Integrate the master equation; returns lab-frame states on the grid.

    Internally the modes are rotated at their pump frequencies, which
    removes the largest oscillation scale without approximation; the
    inverse (diagonal) rotation is applied to every output.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a strictly increasing 1-D grid")
    spec = ops.spec
    dim = spec.dim
    if rho0.rho.shape != (dim, dim):
        raise ValueError("initial state does not match the truncation spec")
    if validate:
        rho0.validate()

    freqs = cfg.mode_frequencies()[: spec.mode_count]
    lams, amps = _drive_amplitudes(cfg, spec.mode_count)
    p = cfg.preset

    # static rotated-frame Hamiltonian: spin terms, detunings, static drive part
    h_static = (
        cfg.omega_e * ops.sz
        - p.d_axial * ops.sz @ ops.sz
        + p.e_transverse * (ops.sx @ ops.sx - ops.sy @ ops.sy)
    )
    number_ops = []
    for m, a in enumerate(ops.a):
        adag = a.conj().T
        n_op = adag @ a
        number_ops.append(n_op)
        h_static = h_static + (freqs[m] - lams[m]) * n_op
        h_static = h_static + 1j * amps[m] * (adag - a)
    l_static = _commutator_superop(h_static) + _lindblad_superop(ops.sz, cfg.kappa_s)
    for a in ops.a:
        l_static = l_static + _lindblad_superop(a, cfg.kappa)
    l_static = l_static.tocsr()

    # coupling pieces G a_m^dag Sx e^{+i Lam t} + h.c. pick up the frame phases
    pieces = []
    for m, a in enumerate(ops.a):
        up = _commutator_superop(cfg.coupling_g * (a.conj().T @ ops.sx))
        down = _commutator_superop(cfg.coupling_g * (a @ ops.sx))
        pieces.append((lams[m], up, down))

    def rhs(t, y):
        out = l_static @ y
        for lam, up, down in pieces:
            phase = np.exp(1j * lam * t)
            out = out + phase * (up @ y) + np.conj(phase) * (down @ y)
        return out

    # rotate the initial state into the frame
    def frame_phases(t: float) -> np.ndarray:
        total = np.zeros(dim)
        for m, n_op in enumerate(number_ops):
            total = total + lams[m] * np.real(np.diag(n_op))
        return np.exp(1j * total * t)

    t0 = float(times[0])
    u0 = frame_phases(t0)
    rho_rot0 = (u0[:, None] * rho0.rho) * u0.conj()[None, :]

    sol = solve_ivp(
        rhs,
        (t0, float(times[-1])),
        rho_rot0.ravel(),
        t_eval=times,
        method="DOP853",
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise DensityMatrixError(f"integrator failed: {sol.message}")

    out = []
    for i, t in enumerate(times):
        u = frame_phases(float(t))
        rho_rot = sol.y[:, i].reshape(dim, dim)
        rho_lab = (u.conj()[:, None] * rho_rot) * u[None, :]
        state = TruncatedState(rho=rho_lab, time=float(t))
        if validate:
            state.validate()  # hermiticity is checked on the raw output
        state.rho = 0.5 * (rho_lab + rho_lab.conj().T)
        out.append(state)
    return out


# -- readouts -----------------------------------------------------------------


def reduced_modes_state(state: TruncatedState | np.ndarray, spec: TruncationSpec) -> np.ndarray:
    """Partial trace over the spin factor."""
    rho = state.rho if isinstance(state, TruncatedState) else state
    n_mode_dim = spec.mode_levels**spec.mode_count
    r = rho.reshape(n_mode_dim, spec.spin_levels, n_mode_dim, spec.spin_levels)
    return np.einsum("iaja->ij", r)


def dm_log_negativity(rho_modes: np.ndarray, spec: TruncationSpec) -> float:
    """Logarithmic negativity ln ||rho^{T_B}||_1 across the two-mode split.

    The partial transpose acts on the second mode; PPT states score 0.
    """
    if spec.mode_count != 2:
        raise ValueError("mode-mode negativity is defined for two modes")
    n = spec.mode_levels
    r = rho_modes.reshape(n, n, n, n)
    r_pt = r.transpose(0, 3, 2, 1).reshape(n * n, n * n)
    r_pt = 0.5 * (r_pt + r_pt.conj().T)
    trace_norm = float(np.abs(np.linalg.eigvalsh(r_pt)).sum())
    return max(0.0, math.log(trace_norm))


def entanglement_trace_dm(
    cfg: PhysicalConfig,
    spec: TruncationSpec,
    times,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> dict:
    """Mode-mode negativity along a trajectory from the default initial state.

    Returns times, entanglement, purity and trace defect arrays.
    """
    ops = build_operators(spec)
    states = evolve_master_equation(initial_state(spec), cfg, ops, times, rtol, atol)
    e_raw = np.array(
        [dm_log_negativity(reduced_modes_state(s, spec), spec) for s in states]
    )
    return {
        "times": np.asarray(times, dtype=float),
        "e_raw": e_raw,
        "purity": np.array([s.purity() for s in states]),
        "trace_defect": np.array([s.trace_defect() for s in states]),
    }


def divergence_time(
    times: np.ndarray,
    trace_a: np.ndarray,
    trace_b: np.ndarray,
    rel_tol: float = 0.05,
) -> float:
    """Earliest time where two entanglement traces differ by more than
    rel_tol, measured relative to the peak of the finer trace; returns the
    final grid time when they never separate."""
    ref = max(float(np.max(trace_b)), 1e-300)
    mask = np.abs(trace_a - trace_b) > rel_tol * ref
    idx = np.nonzero(mask)[0]
    return float(times[idx[0]]) if idx.size else float(times[-1])


def truncation_study(
    cfg: PhysicalConfig,
    powers,
    specs,
    times,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> dict:
    """Entanglement traces over a (power x truncation) grid plus divergence
    times between consecutive mode_levels.

    Short-time agreement of adjacent truncations certifies the simulation
    window; the divergence time shrinking with power diagnoses levels
    getting populated past the cut.
    """
    specs = sorted(specs, key=lambda s: s.mode_levels)
    if len(specs) < 2:
        raise ValueError("need at least two truncation specs")
    times = np.asarray(times, dtype=float)
    traces: dict[tuple[float, int], np.ndarray] = {}
    for power in powers:
        cfg_p = _with_power(cfg, power)
        for spec in specs:
            traces[(power, spec.mode_levels)] = entanglement_trace_dm(
                cfg_p, spec, times, rtol, atol
            )["e_raw"]
    tstars = {}
    for power in powers:
        per_power = []
        for lo, hi in zip(specs[:-1], specs[1:]):
            per_power.append(
                divergence_time(
                    times,
                    traces[(power, lo.mode_levels)],
                    traces[(power, hi.mode_levels)],
                )
            )
        tstars[power] = min(per_power)
    return {"times": times, "traces": traces, "t_star": tstars}


def _with_power(cfg: PhysicalConfig, power: float) -> PhysicalConfig:
    return replace(cfg, drive=replace(cfg.drive, power=power))
