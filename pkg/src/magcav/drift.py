"""Drift/diffusion models and covariance propagation for the three model orders.

The quadrature vector is u = (x_1, y_1, ..., x_M, y_M, x_s, y_s) for the
zeroth order and gains a bath pair (x_n, y_n) at first and second order.
The covariance matrix obeys

    dV/dt = K V + V K^T + D,

with D = Diag[kappa, kappa, ..., Gamma_s, Gamma_s(, Gamma_b, Gamma_b)];
the pump enters only the first-moment dynamics, never V.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .config import PhysicalConfig, hp_frequencies
from .entanglement import symplectic_eigenvalues
from .meanfield import MeanAmplitudes, mean_residual

SYMMETRY_RTOL = 1e-12
PHYSICALITY_TOL = 1e-9
MEANS_RESIDUAL_TOL = 1e-8
STEP_FRACTION = 0.05


class PropagationError(RuntimeError):
    pass


class NoSteadyStateError(RuntimeError):
    pass


class StaleLinearizationError(ValueError):
    pass


@dataclass
class CovarianceState:
    """Symmetric covariance matrix at one instant."""

    v: np.ndarray
    time: float

    def check_symmetry(self) -> None:
        scale = max(np.abs(self.v).max(), 1e-300)
        defect = np.abs(self.v - self.v.T).max()
        if defect > SYMMETRY_RTOL * scale:
            raise PropagationError(
                f"covariance asymmetry {defect:.3e} at t = {self.time:.6e} s"
            )

    def check_physical(self, tol: float = PHYSICALITY_TOL) -> None:
        nu_min = symplectic_eigenvalues(self.v)[0]
        if 2.0 * nu_min < 1.0 - tol:
            raise PropagationError(
                f"unphysical covariance (2 nu_min = {2 * nu_min:.12f}) "
                f"at t = {self.time:.6e} s"
            )

    def validate(self) -> "CovarianceState":
        self.check_symmetry()
        self.check_physical()
        return self


@dataclass
class DriftModel:
    """Drift matrix, diffusion matrix and pump data for one model order."""

    order: str
    k: np.ndarray
    diffusion: np.ndarray
    mode_frequencies: tuple[float, ...]
    pump_frequencies: tuple[float, ...]
    pump_amplitudes: tuple[float, ...]
    quadrature_layout: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        dim = self.k.shape[0]
        if self.k.shape != (dim, dim) or self.diffusion.shape != (dim, dim):
            raise ValueError("drift and diffusion must be square and equal-sized")
        if not self.quadrature_layout:
            labels = []
            for m in range(1, len(self.mode_frequencies) + 1):
                labels += [f"x{m}", f"y{m}"]
            labels += ["xs", "ys"]
            if dim == 2 * len(self.mode_frequencies) + 4:
                labels += ["xn", "yn"]
            self.quadrature_layout = tuple(labels)
        if len(self.quadrature_layout) != dim:
            raise ValueError("layout length must match drift dimension")

    @property
    def dim(self) -> int:
        return self.k.shape[0]

    @property
    def n_modes(self) -> int:
        return len(self.mode_frequencies)

    def pump_vector(self, t: float) -> np.ndarray:
        """Coherent drive vector p(t); zero rows for spin and bath."""
        p = np.zeros(self.dim)
        for m, (amp, lam) in enumerate(zip(self.pump_amplitudes, self.pump_frequencies)):
            p[2 * m] = np.sqrt(2.0) * amp * np.cos(lam * t)
            p[2 * m + 1] = -np.sqrt(2.0) * amp * np.sin(lam * t)
        return p

    def vacuum_state(self) -> CovarianceState:
        return CovarianceState(v=0.5 * np.eye(self.dim), time=0.0)


# -- block assembly -----------------------------------------------------------


def mode_block(omega: float, kappa: float) -> np.ndarray:
    return np.array([[-kappa, omega], [-omega, -kappa]])


def drift_matrix_zeroth(
    mode_freqs, kappa: float, coupling: float, omega_s: float, es: float, gamma_s: float
) -> np.ndarray:
    """Zeroth-order drift; coupling is the quadrature value sqrt(2 S) G."""
    n = len(mode_freqs)
    dim = 2 * n + 2
    k = np.zeros((dim, dim))
    si = 2 * n
    for m, omega in enumerate(mode_freqs):
        k[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] = mode_block(omega, kappa)
        k[2 * m + 1, si] = -coupling
        k[si + 1, 2 * m] = -coupling
    k[si : si + 2, si : si + 2] = [
        [-gamma_s, omega_s - 2.0 * es],
        [-(omega_s + 2.0 * es), -gamma_s],
    ]
    return k


def drift_matrix_first(
    mode_freqs,
    kappa: float,
    coupling: float,
    omega_s: float,
    es: float,
    gamma_s: float,
    omega_n: float,
    spin_bath: float,
    gamma_b: float,
) -> np.ndarray:
    """First-order drift; spin_bath is alpha sqrt(J S)."""
    n = len(mode_freqs)
    k0 = drift_matrix_zeroth(mode_freqs, kappa, coupling, omega_s, es, gamma_s)
    dim = 2 * n + 4
    k = np.zeros((dim, dim))
    k[: 2 * n + 2, : 2 * n + 2] = k0
    si, bi = 2 * n, 2 * n + 2
    k[bi : bi + 2, bi : bi + 2] = [[-gamma_b, omega_n], [-omega_n, -gamma_b]]
    k[si, bi + 1] = spin_bath
    k[si + 1, bi] = -spin_bath
    k[bi, si + 1] = spin_bath
    k[bi + 1, si] = -spin_bath
    return k


def drift_matrix_second(
    mode_freqs,
    kappa: float,
    coupling: float,
    omega_nl: float,
    spin_diag: float,
    gamma_s: float,
    omega_n_shifted: float,
    spin_bath_upper: float,
    spin_bath_lower: float,
    gamma_b: float,
) -> np.ndarray:
    """Linearized second-order drift.

    omega_nl is the Kerr-shifted spin frequency, spin_diag the common
    off-diagonal shift 2 K1 <s>^2 - 2 E S of the spin block, and the
    spin-bath block is asymmetric: the upper entry carries the cross-Kerr
    correction 2 K2 <s><n> on top of alpha sqrt(J S), the lower entry is
    minus the bare alpha sqrt(J S).
    """
    n = len(mode_freqs)
    dim = 2 * n + 4
    k = np.zeros((dim, dim))
    si, bi = 2 * n, 2 * n + 2
    for m, omega in enumerate(mode_freqs):
        k[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] = mode_block(omega, kappa)
        k[2 * m + 1, si] = -coupling
        k[si + 1, 2 * m] = -coupling
    k[si : si + 2, si : si + 2] = [
        [-gamma_s, omega_nl + spin_diag],
        [-omega_nl + spin_diag, -gamma_s],
    ]
    k[bi : bi + 2, bi : bi + 2] = [
        [-gamma_b, omega_n_shifted],
        [-omega_n_shifted, -gamma_b],
    ]
    k[si, bi + 1] = spin_bath_upper
    k[si + 1, bi] = -spin_bath_lower
    k[bi, si + 1] = spin_bath_upper
    k[bi + 1, si] = -spin_bath_lower
    return k


def _diffusion(n_modes: int, kappa: float, gamma_s: float, gamma_b: float | None):
    diag = [kappa] * (2 * n_modes) + [gamma_s, gamma_s]
    if gamma_b is not None:
        diag += [gamma_b, gamma_b]
    return np.diag(diag)


# -- config-level builders ----------------------------------------------------


def build_drift_zeroth(cfg: PhysicalConfig) -> DriftModel:
    omega_s, _ = hp_frequencies(cfg, "zeroth")
    p = cfg.preset
    coupling = np.sqrt(2.0 * p.spin) * cfg.coupling_g
    freqs = cfg.mode_frequencies()
    k = drift_matrix_zeroth(
        freqs, cfg.kappa, coupling, omega_s, p.e_transverse * p.spin, cfg.gamma_s
    )
    return DriftModel(
        order="zeroth",
        k=k,
        diffusion=_diffusion(len(freqs), cfg.kappa, cfg.gamma_s, None),
        mode_frequencies=freqs,
        pump_frequencies=cfg.pump_frequencies(),
        pump_amplitudes=cfg.pump_amplitudes(),
    )


def build_drift_first(cfg: PhysicalConfig) -> DriftModel:
    omega_s, omega_n = hp_frequencies(cfg, "first")
    p = cfg.preset
    coupling = np.sqrt(2.0 * p.spin) * cfg.coupling_g
    freqs = cfg.mode_frequencies()
    k = drift_matrix_first(
        freqs,
        cfg.kappa,
        coupling,
        omega_s,
        p.e_transverse * p.spin,
        cfg.gamma_s,
        omega_n,
        p.alpha * np.sqrt(p.j_bath * p.spin),
        cfg.gamma_b,
    )
    return DriftModel(
        order="first",
        k=k,
        diffusion=_diffusion(len(freqs), cfg.kappa, cfg.gamma_s, cfg.gamma_b),
        mode_frequencies=freqs,
        pump_frequencies=cfg.pump_frequencies(),
        pump_amplitudes=cfg.pump_amplitudes(),
    )


def build_drift_second(cfg: PhysicalConfig, means: MeanAmplitudes) -> DriftModel:
    """Second-order drift around the stationary mean amplitudes.

    The drive is absorbed into the means, so the pump amplitudes of the
    returned model are zero.
    """
    residual = mean_residual(means, cfg)
    if residual > MEANS_RESIDUAL_TOL:
        raise StaleLinearizationError(
            f"mean amplitudes do not solve the fixed point for this config "
            f"(residual {residual:.3e})"
        )
    omega_s, omega_n = hp_frequencies(cfg, "first")
    p = cfg.preset
    k1, k2 = cfg.self_kerr, cfg.cross_kerr
    s_abs2 = abs(means.s_mean) ** 2
    n_abs2 = abs(means.n_mean) ** 2
    s_sq = (means.s_mean**2).real  # purely imaginary mean: real and <= 0
    sn = (means.s_mean * means.n_mean).real
    omega_nl = omega_s - k1 - 4.0 * k1 * s_abs2 - k2 * n_abs2
    coupling = np.sqrt(2.0 * p.spin) * cfg.coupling_g
    sb = p.alpha * np.sqrt(p.j_bath * p.spin)
    freqs = cfg.mode_frequencies()
    k = drift_matrix_second(
        freqs,
        cfg.kappa,
        coupling,
        omega_nl,
        2.0 * k1 * s_sq - 2.0 * p.e_transverse * p.spin,
        cfg.gamma_s,
        omega_n - k2 * s_abs2,
        sb + 2.0 * k2 * sn,
        sb,
        cfg.gamma_b,
    )
    return DriftModel(
        order="second",
        k=k,
        diffusion=_diffusion(len(freqs), cfg.kappa, cfg.gamma_s, cfg.gamma_b),
        mode_frequencies=freqs,
        pump_frequencies=cfg.pump_frequencies(),
        pump_amplitudes=tuple(0.0 for _ in freqs),
    )


def build_drift(cfg: PhysicalConfig, order: str, means: MeanAmplitudes | None = None):
    if order == "zeroth":
        return build_drift_zeroth(cfg)
    if order == "first":
        return build_drift_first(cfg)
    if order == "second":
        if means is None:
            raise ValueError("second order needs converged mean amplitudes")
        return build_drift_second(cfg, means)
    raise ValueError(f"unknown order {order!r}")


# -- propagation and steady state ----------------------------------------------


def _check_times(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("need a 1-D grid with at least two times")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must increase strictly from 0")
    return times


def propagate_covariance(
    model: DriftModel,
    v0: CovarianceState | None,
    times,
    rtol: float = 1e-10,
    atol: float = 1e-13,
    validate: bool = True,
) -> list[CovarianceState]:
    """Integrate dV/dt = K V + V K^T + D with an adaptive RK45 scheme.

    The step size is capped at 0.05 / omega_max so the fastest mode
    oscillation stays resolved.  The right-hand side is evaluated as
    (K V) + (K V)^T + D, which keeps V exactly symmetric in floating
    point; symmetry and physicality are checked at every output time.
    """
    times = _check_times(times)
    if v0 is None:
        v0 = model.vacuum_state()
    if validate:
        v0.validate()
    dim = model.dim
    if v0.v.shape != (dim, dim):
        raise ValueError("initial covariance does not match the model layout")
    k = model.k
    dmat = model.diffusion
    max_step = STEP_FRACTION / max(model.mode_frequencies)

    def rhs(_t, y):
        v = y.reshape(dim, dim)
        kv = k @ v
        return (kv + kv.T + dmat).ravel()

    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        v0.v.ravel(),
        t_eval=times,
        method="RK45",
        rtol=rtol,
        atol=atol,
        max_step=max_step,
    )
    if not sol.success:
        raise PropagationError(f"integrator failed: {sol.message}")
    out = []
    for i, t in enumerate(times):
        state = CovarianceState(v=sol.y[:, i].reshape(dim, dim), time=float(t))
        if validate:
            state.validate()
        out.append(state)
    return out


def covariance_closed_form(
    model: DriftModel, v0: CovarianceState | None, times
) -> list[CovarianceState]:
    """Exact V(t) from the matrix-exponential solution.

    Evaluates W(t) V0 W(t)^T + integral_0^t W(s) D W(s)^T ds with
    W(t) = exp(K t) through the eigendecomposition of K, in which the
    noise integral has the closed form (exp((li + lj) t) - 1)/(li + lj).
    Assumes diagonalizable K (generic here); used as the independent
    reference for the RK integrator.
    """
    times = _check_times(times)
    if v0 is None:
        v0 = model.vacuum_state()
    lam, p = np.linalg.eig(model.k)
    pinv = np.linalg.inv(p)
    v0e = pinv @ v0.v @ pinv.T
    de = pinv @ model.diffusion @ pinv.T
    lsum = lam[:, None] + lam[None, :]
    out = []
    for t in times:
        el = np.exp(lam * t)
        hom = (el[:, None] * el[None, :]) * v0e
        small = np.abs(lsum) * t <= 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(small, t * (1.0 + lsum * t / 2.0),
                              (np.exp(lsum * t) - 1.0) / np.where(small, 1.0, lsum))
        v = (p @ (hom + de * factor) @ p.T).real
        out.append(CovarianceState(v=0.5 * (v + v.T), time=float(t)))
    return out


def stability_check(model: DriftModel) -> tuple[bool, float]:
    """(stable, spectral abscissa): stable iff every eigenvalue of K has
    a strictly negative real part."""
    abscissa = float(np.linalg.eigvals(model.k).real.max())
    return abscissa < 0.0, abscissa


def steady_state_covariance(model: DriftModel) -> CovarianceState:
    """Stationary covariance solving K V + V K^T + D = 0.

    Solved as a dense linear system over the vectorized matrix; refuses
    to run for an unstable drift, where no steady state exists.
    """
    stable, abscissa = stability_check(model)
    if not stable:
        raise NoSteadyStateError(
            "no steady state: all eigenvalues of the drift matrix must have "
            f"negative real parts (spectral abscissa {abscissa:.3e})"
        )
    dim = model.dim
    eye = np.eye(dim)
    a = np.kron(model.k, eye) + np.kron(eye, model.k)
    v = np.linalg.solve(a, -model.diffusion.ravel()).reshape(dim, dim)
    v = 0.5 * (v + v.T)
    residual = np.linalg.norm(model.k @ v + v @ model.k.T + model.diffusion)
    bound = 1e-10 * np.linalg.norm(model.diffusion)
    if residual > bound:
        raise NoSteadyStateError(
            f"steady-state residual {residual:.3e} exceeds {bound:.3e}"
        )
    return CovarianceState(v=v, time=np.inf)


def propagate_mean(
    model: DriftModel, u0, times, rtol: float = 1e-10, atol: float = 1e-12
) -> np.ndarray:
    """First-moment trajectory du/dt = K u + p(t); returns (len(times), dim)."""
    times = _check_times(times)
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (model.dim,):
        raise ValueError("initial mean vector does not match the model layout")
    max_step = STEP_FRACTION / max(model.mode_frequencies)

    def rhs(t, u):
        return model.k @ u + model.pump_vector(t)

    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        u0,
        t_eval=times,
        method="RK45",
        rtol=rtol,
        atol=atol,
        max_step=max_step,
    )
    if not sol.success:
        raise PropagationError(f"integrator failed: {sol.message}")
    return sol.y.T
