"""Symplectic analysis of covariance matrices.

Quadrature ordering is (x_1, y_1, x_2, y_2, ...); a covariance matrix V
collects the symmetrized second moments of those quadratures with the
vacuum normalized to V = I/2.  Entanglement between two mode groups is
quantified by the logarithmic negativity max[0, -ln(2 nu_min)] of the
partially transposed matrix, where the partial transposition flips the
sign of the y quadratures of one group only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

PAIRING_RTOL = 1e-10


@dataclass(frozen=True)
class ModePartition:
    """Bipartition of the cavity modes; mode labels are 1-based."""

    group_a: tuple[int, ...]
    group_b: tuple[int, ...]

    def __post_init__(self):
        a, b = set(self.group_a), set(self.group_b)
        if not a or not b:
            raise ValueError("both groups must be non-empty")
        if a & b:
            raise ValueError(f"groups overlap: {sorted(a & b)}")
        if min(a | b) < 1:
            raise ValueError("mode labels are 1-based")

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(sorted(self.group_a + self.group_b))


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal direct sum of [[0, 1], [-1, 0]]."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def _check_covariance(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("covariance matrix must be square")
    if v.shape[0] % 2:
        raise ValueError("covariance matrix must have even dimension")
    scale = max(np.abs(v).max(), 1e-300)
    if np.abs(v - v.T).max() > 1e-8 * scale:
        raise ValueError("covariance matrix is not symmetric")
    return v


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Ascending symplectic spectrum, one value per +/- pair.

    Computed as the moduli of the eigenvalues of i Omega V, which come in
    opposite-sign pairs; a pairing mismatch beyond 1e-10 relative signals
    a non-physical input and raises.
    """
    v = _check_covariance(v)
    n = v.shape[0] // 2
    eigs = np.linalg.eigvals(1j * symplectic_form(n) @ v)
    moduli = np.sort(np.abs(eigs))
    pairs = moduli.reshape(n, 2)
    spread = np.abs(pairs[:, 1] - pairs[:, 0])
    scale = np.maximum(pairs[:, 1], 1e-300)
    if np.any(spread / scale > PAIRING_RTOL):
        raise ValueError("eigenvalues of i Omega V do not form +/- pairs")
    return pairs.mean(axis=1)


def physicality_check(v: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff the smallest symplectic eigenvalue is >= 1/2 - tol."""
    return bool(symplectic_eigenvalues(v)[0] >= 0.5 - tol)


def partial_transpose(v: np.ndarray, partition: ModePartition) -> np.ndarray:
    """Flip the sign of the y quadratures of group B (mirror reflection)."""
    v = _check_covariance(v)
    n = v.shape[0] // 2
    signs = np.ones(2 * n)
    for mode in partition.group_b:
        if not 1 <= mode <= n:
            raise IndexError(f"mode {mode} outside layout with {n} modes")
        signs[2 * (mode - 1) + 1] = -1.0
    return v * np.outer(signs, signs)


def restrict_to_modes(v: np.ndarray, modes: tuple[int, ...]) -> np.ndarray:
    """Keep only the rows/columns of the given (1-based) modes."""
    v = _check_covariance(v)
    n = v.shape[0] // 2
    idx = []
    for mode in modes:
        if not 1 <= mode <= n:
            raise IndexError(f"mode {mode} outside layout with {n} modes")
        idx.extend((2 * (mode - 1), 2 * (mode - 1) + 1))
    return v[np.ix_(idx, idx)]


def log_negativity(v: np.ndarray, partition: ModePartition) -> float:
    """Logarithmic negativity between the two groups of a partition.

    The matrix is first restricted to the modes of A and B (dropping any
    other rows, e.g. spin and bath), then partially transposed on B.
    """
    modes = partition.modes
    reduced = restrict_to_modes(v, modes)
    relabel = {mode: i + 1 for i, mode in enumerate(modes)}
    local = ModePartition(
        tuple(relabel[m] for m in partition.group_a),
        tuple(relabel[m] for m in partition.group_b),
    )
    nu_min = symplectic_eigenvalues(partial_transpose(reduced, local))[0]
    return max(0.0, -float(np.log(2.0 * nu_min)))


def balanced_partitions(n_modes: int) -> list[ModePartition]:
    """All unordered balanced bipartitions of modes 1..n, deterministic order.

    Group A always contains mode 1, which picks one representative per
    unordered pair; the list is lexicographic in group A.
    """
    if n_modes % 2:
        raise ValueError(f"balanced bipartition needs an even mode count, got {n_modes}")
    if n_modes < 2:
        raise ValueError("need at least two modes")
    parts = []
    for combo in itertools.combinations(range(1, n_modes + 1), n_modes // 2):
        if combo[0] != 1:
            continue
        rest = tuple(m for m in range(1, n_modes + 1) if m not in combo)
        parts.append(ModePartition(combo, rest))
    return parts


def best_balanced_partition(v: np.ndarray, n_modes: int) -> tuple[ModePartition, float]:
    """Balanced bipartition maximizing the log-negativity.

    Ties resolve to the lexicographically smallest group A containing
    mode 1 (the enumeration order), so the result is deterministic.
    """
    best_part, best_e = None, -1.0
    for part in balanced_partitions(n_modes):
        e = log_negativity(v, part)
        if e > best_e:
            best_part, best_e = part, e
    return best_part, best_e
