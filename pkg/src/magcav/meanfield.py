"""Stationary mean amplitudes of the driven system in the rotating frame.

With resonant pumping the undriven modes settle at E_m / kappa, while the
giant-spin amplitude solves a scalar self-consistency in Y = |<s>|^2:

    Y * |den(Y)|^2 = |G sqrt(S/2) E_1 / kappa_1|^2,

where den collects the Kerr-shifted detuning and the bath back-action.
The converged amplitudes obey the reduced phase structure used by the
second-order linearization: <s> and <n> purely imaginary, <a_m> real.
The solver imposes that structure exactly; the modulus equation itself is
solved without approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .config import PhysicalConfig, hp_frequencies

RESIDUAL_TOL = 1e-10
_TINY = 1e-300


class MeanFieldError(RuntimeError):
    pass


@dataclass(frozen=True)
class MeanAmplitudes:
    """Converged rotating-frame expectation values."""

    a_means: tuple[complex, ...]
    s_mean: complex
    n_mean: complex
    residual: float
    delta_modes: tuple[float, ...]
    delta_s: float
    delta_n: float
    root_count: int = 1


def rotating_detunings(cfg: PhysicalConfig) -> tuple[tuple[float, ...], float, float]:
    """Detunings in the frame rotating with the pumps.

    Modes rotate at their own pump frequency (zero detuning for resonant
    drive); spin and bath both rotate at the first pump frequency.
    """
    omega_s, omega_n = hp_frequencies(cfg, "first")
    lam = cfg.pump_frequencies()
    delta_modes = tuple(w - l for w, l in zip(cfg.mode_frequencies(), lam))
    return delta_modes, omega_s - lam[0], omega_n - lam[0]


def _denominator_parts(cfg: PhysicalConfig, y_abs2: float, delta_s: float, delta_n: float):
    """Real and imaginary parts of the <s> fixed-point denominator at |<s>|^2."""
    p = cfg.preset
    k1, k2 = cfg.self_kerr, cfg.cross_kerr
    ajs = p.alpha**2 * p.j_bath * p.spin
    dn_shift = delta_n - k2 * y_abs2
    d2 = cfg.gamma_b**2 + dn_shift**2
    reactive = (
        delta_s
        - k1
        - 2.0 * k1 * y_abs2
        - k2 * ajs * y_abs2 / d2
        - ajs * dn_shift / d2
    )
    damping = cfg.gamma_s + cfg.coupling_g**2 * p.spin / (2.0 * cfg.kappa) + ajs * cfg.gamma_b / d2
    return reactive, damping


def _drive_numerator(cfg: PhysicalConfig) -> float:
    e1 = cfg.pump_amplitudes()[0]
    return cfg.coupling_g * math.sqrt(cfg.preset.spin / 2.0) * e1 / cfg.kappa


def _modulus_defect(cfg, y_abs2, delta_s, delta_n, numerator):
    reactive, damping = _denominator_parts(cfg, y_abs2, delta_s, delta_n)
    return y_abs2 * (reactive**2 + damping**2) - numerator**2


def solve_mean_amplitudes(cfg: PhysicalConfig) -> MeanAmplitudes:
    """Solve the stationary amplitudes on the weak-drive branch.

    The scalar modulus equation is solved by bracketed root finding on
    [0, (10 E_1 G sqrt(S/2) / (kappa |den(0)|))^2]; the returned root is
    the one continuously connected to <s> = 0 as the power is ramped up,
    and root_count reports how many roots the bracket contains.
    """
    if cfg.kappa <= 0:
        raise MeanFieldError("kappa must be positive")
    if cfg.gamma_b <= 0:
        raise MeanFieldError("gamma_b must be positive for a finite bath response")
    delta_modes, delta_s, delta_n = rotating_detunings(cfg)
    amps = cfg.pump_amplitudes()
    a_free = tuple(complex(e / cfg.kappa) for e in amps)
    numerator = _drive_numerator(cfg)

    if numerator == 0.0:
        means = MeanAmplitudes(
            a_means=a_free,
            s_mean=0j,
            n_mean=0j,
            residual=0.0,
            delta_modes=delta_modes,
            delta_s=delta_s,
            delta_n=delta_n,
            root_count=1,
        )
        return means

    def f(y):
        return _modulus_defect(cfg, y, delta_s, delta_n, numerator)

    r0, d0 = _denominator_parts(cfg, 0.0, delta_s, delta_n)
    y_bracket = (10.0 * numerator / math.hypot(r0, d0)) ** 2
    grid = np.concatenate(([0.0], np.geomspace(y_bracket * 1e-14, y_bracket, 512)))
    values = np.array([f(y) for y in grid])
    roots = []
    for i in range(grid.size - 1):
        if values[i] == 0.0:
            roots.append(grid[i])
        elif values[i] * values[i + 1] < 0.0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=_TINY, rtol=1e-15))
    if values[-1] == 0.0:
        roots.append(grid[-1])
    if not roots:
        raise MeanFieldError(
            "fixed point not converged: no root of the modulus equation in "
            f"[0, {y_bracket:.3e}] (f(0) = {values[0]:.3e}, "
            f"f(max) = {values[-1]:.3e})"
        )
    y_abs2 = roots[0]

    p = cfg.preset
    s_mean = -1j * math.sqrt(y_abs2)
    dn_shift = delta_n - cfg.cross_kerr * y_abs2
    n_full = (
        -1j * p.alpha * math.sqrt(p.j_bath * p.spin) * s_mean
        / (1j * dn_shift + cfg.gamma_b)
    )
    n_mean = 1j * n_full.imag  # impose the purely imaginary structure
    e1 = amps[0]
    a1 = (e1 - 1j * cfg.coupling_g * math.sqrt(p.spin / 2.0) * s_mean) / cfg.kappa
    a_means = (complex(a1),) + a_free[1:]

    means = MeanAmplitudes(
        a_means=a_means,
        s_mean=complex(s_mean),
        n_mean=complex(n_mean),
        residual=0.0,
        delta_modes=delta_modes,
        delta_s=delta_s,
        delta_n=delta_n,
        root_count=len(roots),
    )
    residual = mean_residual(means, cfg)
    if residual > RESIDUAL_TOL:
        raise MeanFieldError(
            f"fixed point not converged: residual {residual:.3e} > {RESIDUAL_TOL}"
        )
    return replace(means, residual=residual)


def fixed_point_mean_modulus(
    cfg: PhysicalConfig, damping: float = 0.5, max_iter: int = 200_000, tol: float = 1e-15
) -> float:
    """|<s>| from a damped fixed-point iteration of the modulus equation.

    Independent of the bracketed solver; used to cross-check it.
    """
    _, delta_s, delta_n = rotating_detunings(cfg)
    numerator = _drive_numerator(cfg)
    if numerator == 0.0:
        return 0.0
    y = 0.0
    for _ in range(max_iter):
        reactive, damp = _denominator_parts(cfg, y, delta_s, delta_n)
        y_new = (1.0 - damping) * y + damping * numerator**2 / (reactive**2 + damp**2)
        if abs(y_new - y) <= tol * max(y_new, _TINY):
            return math.sqrt(y_new)
        y = y_new
    raise MeanFieldError(f"fixed-point iteration did not converge in {max_iter} steps")


def mean_residual(means: MeanAmplitudes, cfg: PhysicalConfig) -> float:
    """Maximum relative defect of the stationary relations.

    Evaluates the mode equations, the reactive spin-bath balance and the
    scalar modulus equation at the given amplitudes; a converged solution
    scores <= 1e-10, an O(1) perturbation scores O(1).
    """
    p = cfg.preset
    amps = cfg.pump_amplitudes()
    _, delta_s, delta_n = rotating_detunings(cfg)
    defects = []

    e1 = amps[0]
    coupling = cfg.coupling_g * math.sqrt(p.spin / 2.0)
    lhs = means.a_means[0] * cfg.kappa
    rhs = e1 - 1j * coupling * means.s_mean
    scale = max(abs(lhs), abs(rhs), abs(e1), _TINY)
    defects.append(abs(lhs - rhs) / scale)

    for a_m, e_m in zip(means.a_means[1:], amps[1:]):
        scale = max(abs(a_m) * cfg.kappa, e_m, _TINY)
        defects.append(abs(a_m * cfg.kappa - e_m) / scale)

    y_abs2 = abs(means.s_mean) ** 2
    sb = p.alpha * math.sqrt(p.j_bath * p.spin)
    dn_shift = delta_n - cfg.cross_kerr * y_abs2
    lhs_n = -dn_shift * means.n_mean.imag
    rhs_n = sb * means.s_mean.imag
    scale = max(abs(lhs_n), abs(rhs_n), _TINY)
    defects.append(abs(lhs_n - rhs_n) / scale)

    numerator = _drive_numerator(cfg)
    defect = _modulus_defect(cfg, y_abs2, delta_s, delta_n, numerator)
    defects.append(abs(defect) / max(numerator**2, _TINY))

    return float(max(defects))
