import numpy as np
import pytest

from magcav.entanglement import (
    ModePartition,
    balanced_partitions,
    best_balanced_partition,
    log_negativity,
    partial_transpose,
    physicality_check,
    restrict_to_modes,
    symplectic_eigenvalues,
    symplectic_form,
)


def two_mode_squeezed(r: float) -> np.ndarray:
    """Covariance of the two-mode squeezed vacuum at squeezing r."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    sz = np.diag([1.0, -1.0])
    v = np.zeros((4, 4))
    v[:2, :2] = c * np.eye(2)
    v[2:, 2:] = c * np.eye(2)
    v[:2, 2:] = s * sz
    v[2:, :2] = s * sz
    return 0.5 * v


def random_physical(n_modes: int, rng, scale: float = 0.3) -> np.ndarray:
    """Vacuum plus random positive noise: always a physical covariance."""
    d = 2 * n_modes
    b = scale * rng.standard_normal((d, d))
    return 0.5 * np.eye(d) + b @ b.T


SPLIT_12 = ModePartition((1,), (2,))


class TestSymplecticForm:
    def test_antisymmetric_and_squares_to_minus_identity(self):
        om = symplectic_form(3)
        assert np.array_equal(om, -om.T)
        assert np.allclose(om @ om, -np.eye(6))


class TestSymplecticEigenvalues:
    def test_vacuum(self):
        nu = symplectic_eigenvalues(0.5 * np.eye(4))
        assert np.allclose(nu, [0.5, 0.5], atol=1e-14)

    def test_diagonal_case(self):
        nu = symplectic_eigenvalues(np.diag([0.7, 0.7, 1.3, 1.3]))
        assert np.allclose(nu, [0.7, 1.3], rtol=1e-12)

    def test_squeezing_invariance(self):
        # pure-state spectrum is unchanged by the two-mode squeezing
        nu = symplectic_eigenvalues(two_mode_squeezed(0.7))
        assert np.allclose(nu, [0.5, 0.5], rtol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_plus_minus_pairing(self, seed):
        rng = np.random.default_rng(seed)
        v = random_physical(4, rng)
        om = symplectic_form(4)
        eigs = np.sort(np.abs(np.linalg.eigvals(1j * om @ v)))
        pairs = eigs.reshape(4, 2)
        assert np.all(np.abs(pairs[:, 1] - pairs[:, 0]) / pairs[:, 1] <= 1e-10)

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValueError):
            symplectic_eigenvalues(np.eye(3))

    def test_asymmetric_rejected(self):
        v = np.eye(4)
        v[0, 1] = 0.5
        with pytest.raises(ValueError):
            symplectic_eigenvalues(v)


class TestPartialTranspose:
    def test_involution(self):
        rng = np.random.default_rng(1)
        v = random_physical(2, rng)
        part = SPLIT_12
        assert np.array_equal(partial_transpose(partial_transpose(v, part), part), v)

    def test_vacuum_invariant(self):
        v = 0.5 * np.eye(4)
        assert np.array_equal(partial_transpose(v, SPLIT_12), v)

    def test_squeezed_minimum_eigenvalue(self):
        r = 0.5
        vt = partial_transpose(two_mode_squeezed(r), SPLIT_12)
        nu = symplectic_eigenvalues(vt)
        assert nu[0] == pytest.approx(np.exp(-2 * r) / 2, rel=1e-10)

    def test_out_of_range_mode(self):
        with pytest.raises(IndexError):
            partial_transpose(0.5 * np.eye(4), ModePartition((1,), (5,)))


class TestLogNegativity:
    def test_vacuum_is_separable(self):
        assert log_negativity(0.5 * np.eye(4), SPLIT_12) == 0.0

    def test_two_mode_squeezed_equals_2r(self):
        for r in (0.2, 0.5, 1.0):
            e = log_negativity(two_mode_squeezed(r), SPLIT_12)
            assert e == pytest.approx(2 * r, rel=1e-8)

    def test_clamped_at_zero(self):
        # thermal-ish state: nu_min above 1/2 clamps exactly to zero
        v = np.diag([0.8, 0.8, 0.9, 0.9])
        assert log_negativity(v, SPLIT_12) == 0.0

    def test_monotone_in_squeezing(self):
        rs = np.linspace(0.05, 1.5, 12)
        es = [log_negativity(two_mode_squeezed(r), SPLIT_12) for r in rs]
        assert np.all(np.diff(es) > 0)

    def test_spin_rows_dropped_before_transposition(self):
        # embed a two-mode squeezed state in a larger layout with junk
        # correlations in the extra (spin) rows; restriction must kill them
        rng = np.random.default_rng(7)
        v = random_physical(3, rng, scale=0.0)
        v[:4, :4] = two_mode_squeezed(0.5)
        v[4:, :4] = 0.01 * rng.standard_normal((2, 4))
        v[:4, 4:] = v[4:, :4].T
        v[4:, 4:] += 0.3
        e = log_negativity(v, SPLIT_12)
        assert e == pytest.approx(1.0, rel=1e-8)

    def test_flip_a_equals_flip_b(self):
        rng = np.random.default_rng(3)
        v = random_physical(4, rng)
        part = ModePartition((1, 2), (3, 4))
        flipped = ModePartition((3, 4), (1, 2))
        assert log_negativity(v, part) == pytest.approx(
            log_negativity(v, flipped), rel=1e-12
        )


class TestPhysicality:
    def test_vacuum_physical(self):
        assert physicality_check(0.5 * np.eye(6))

    def test_sub_vacuum_unphysical(self):
        assert not physicality_check(0.4 * np.eye(6))

    @pytest.mark.parametrize("seed", range(4))
    def test_ppt_witness_consistency(self, seed):
        rng = np.random.default_rng(seed)
        base = random_physical(2, rng, scale=0.1)
        for r in (0.0, 0.3, 0.9):
            v = base if r == 0 else two_mode_squeezed(r)
            e = log_negativity(v, SPLIT_12)
            transposed_physical = physicality_check(partial_transpose(v, SPLIT_12))
            if e > 0:
                assert not transposed_physical
            else:
                assert transposed_physical

    @pytest.mark.parametrize("seed", range(4))
    def test_local_rotation_invariance(self, seed):
        rng = np.random.default_rng(seed + 10)
        v = random_physical(2, rng)
        theta = rng.uniform(0, 2 * np.pi)
        rot = np.eye(4)
        rot[:2, :2] = [[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]]
        v_rot = rot @ v @ rot.T
        nu_a = symplectic_eigenvalues(v)
        nu_b = symplectic_eigenvalues(v_rot)
        assert np.allclose(nu_a, nu_b, rtol=1e-10)
        assert log_negativity(v, SPLIT_12) == pytest.approx(
            log_negativity(v_rot, SPLIT_12), abs=1e-10
        )


class TestPartitions:
    def test_single_choice_for_two_modes(self):
        parts = balanced_partitions(2)
        assert parts == [ModePartition((1,), (2,))]

    def test_ten_partitions_for_six_modes(self):
        assert len(balanced_partitions(6)) == 10

    def test_odd_mode_count_rejected(self):
        with pytest.raises(ValueError):
            balanced_partitions(5)

    def test_vacuum_tie_break(self):
        part, e = best_balanced_partition(0.5 * np.eye(12), 6)
        assert e == 0.0
        assert part.group_a == (1, 2, 3)
        assert part.group_b == (4, 5, 6)

    def test_restrict_to_modes_shape(self):
        v = 0.5 * np.eye(10)
        sub = restrict_to_modes(v, (2, 4))
        assert sub.shape == (4, 4)

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            ModePartition((1, 2), (2, 3))
        with pytest.raises(ValueError):
            ModePartition((), (1,))
