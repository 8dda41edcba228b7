import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from weakmeas.errors import (
    DimensionError,
    InvalidStateError,
    NonConvergenceError,
    NonHermitianError,
)
from weakmeas.operators import (
    IDENTITY2,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    BlochVector,
    adjoint_action,
    anticommutator,
    check_density,
    check_effect,
    commutator,
    ensemble,
    matrix_exponential,
    partial_trace,
    pure_state,
    tensor_product,
    unitary_flow,
)
from weakmeas.sampling import random_density, random_hermitian

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestTensorProduct:
    def test_identity(self):
        np.testing.assert_array_equal(tensor_product(IDENTITY2, IDENTITY2), np.eye(4))

    def test_sigma1_sigma1_is_antidiagonal(self):
        np.testing.assert_array_equal(tensor_product(SIGMA1, SIGMA1), np.fliplr(np.eye(4)))

    def test_system_index_is_slow(self):
        np.testing.assert_array_equal(tensor_product(SIGMA3, IDENTITY2), np.diag([1, 1, -1, -1]))


class TestPartialTrace:
    def test_product_state(self):
        rng = np.random.default_rng(0)
        rho, tau = random_density(rng, 2), random_density(rng, 3)
        np.testing.assert_allclose(partial_trace(np.kron(rho, tau), (2, 3)), rho, atol=1e-14)
        np.testing.assert_allclose(
            partial_trace(np.kron(rho, tau), (2, 3), keep="detector"), tau, atol=1e-14
        )

    def test_bell_state_is_maximally_mixed(self):
        bell = pure_state([1, 0, 0, 1])
        np.testing.assert_allclose(partial_trace(bell, (2, 2)), IDENTITY2 / 2, atol=1e-15)

    def test_maximally_mixed(self):
        np.testing.assert_allclose(
            partial_trace(np.eye(4) / 4, (2, 2), keep="detector"), IDENTITY2 / 2
        )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(6), (2, 2))

    def test_bad_keep(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), (2, 2), keep="both")

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, ds=st.integers(1, 4), dd=st.integers(1, 4))
    def test_inverts_tensor_product(self, seed, ds, dd):
        rng = np.random.default_rng(seed)
        rho, tau = random_density(rng, ds), random_density(rng, dd)
        np.testing.assert_allclose(partial_trace(tensor_product(rho, tau), (ds, dd)), rho, atol=1e-12)


class TestCommutators:
    def test_pauli_commutator(self):
        np.testing.assert_allclose(commutator(SIGMA1, SIGMA2), 2j * SIGMA3)

    def test_pauli_anticommutator(self):
        np.testing.assert_allclose(anticommutator(SIGMA1, SIGMA2), np.zeros((2, 2)))

    def test_self_commutes(self):
        A = random_hermitian(np.random.default_rng(1), 3)
        np.testing.assert_allclose(commutator(A, A), 0, atol=1e-15)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            commutator(np.eye(2), np.eye(3))


class TestAdjointAction:
    def test_first_order(self):
        np.testing.assert_allclose(adjoint_action(SIGMA3, SIGMA1, 1), 2j * SIGMA2)

    def test_second_order(self):
        np.testing.assert_allclose(adjoint_action(SIGMA3, SIGMA1, 2), 4 * SIGMA1)

    def test_zero_order_is_identity_map(self):
        np.testing.assert_array_equal(adjoint_action(SIGMA3, SIGMA1, 0), SIGMA1)

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_identity_is_annihilated(self, n):
        A = random_hermitian(np.random.default_rng(n), 3)
        np.testing.assert_allclose(adjoint_action(A, np.eye(3), n), 0, atol=1e-12)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            adjoint_action(SIGMA3, SIGMA1, -1)


class TestMatrixExponential:
    def test_zero(self):
        np.testing.assert_allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_pauli_rotation(self):
        np.testing.assert_allclose(
            matrix_exponential(-0.5j * np.pi * SIGMA3), np.diag([-1j, 1j]), atol=1e-15
        )

    def test_nilpotent(self):
        np.testing.assert_allclose(
            matrix_exponential(np.array([[0, 1], [0, 0]])), [[1, 1], [0, 1]], atol=1e-15
        )

    @pytest.mark.parametrize("seed", range(4))
    def test_general_matrix_matches_scipy(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(4, 4)) * 2 + 1j * rng.normal(size=(4, 4))
        expected = scipy.linalg.expm(a)
        np.testing.assert_allclose(matrix_exponential(a), expected, rtol=1e-10, atol=1e-12)

    def test_iteration_cap(self):
        a = np.array([[1.0, 5.0], [0.0, 2.0]])
        with pytest.raises(NonConvergenceError):
            matrix_exponential(a, max_terms=2)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, theta=st.floats(-10, 10))
    def test_unitary_for_hermitian_generator(self, seed, theta):
        H = random_hermitian(np.random.default_rng(seed), 3)
        U = matrix_exponential(-1j * theta * H)
        np.testing.assert_allclose(U @ U.conj().T, np.eye(3), atol=1e-10)


class TestUnitaryFlow:
    def test_zero_flow(self):
        rho = random_density(np.random.default_rng(2), 3)
        np.testing.assert_allclose(unitary_flow(random_hermitian(np.random.default_rng(3), 3), rho, 0.0), rho)

    def test_quarter_turn_about_z(self):
        rho = BlochVector(1, 0, 0).density()
        out = BlochVector.from_density(unitary_flow(SIGMA3, rho, np.pi / 4))
        np.testing.assert_allclose(out.vector, [0, 1, 0], atol=1e-14)

    @pytest.mark.parametrize("eps", [0.3, 2.0, -7.0])
    def test_eigenstate_is_stationary(self, eps):
        rho = BlochVector(0, 0, 1).density()
        np.testing.assert_allclose(unitary_flow(SIGMA3, rho, eps), rho, atol=1e-15)

    def test_rejects_non_hermitian_generator(self):
        with pytest.raises(NonHermitianError):
            unitary_flow(np.array([[0, 1], [0, 0]]), IDENTITY2 / 2, 0.1)

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, e1=st.floats(-3, 3), e2=st.floats(-3, 3))
    def test_composition(self, seed, e1, e2):
        rng = np.random.default_rng(seed)
        A, rho = random_hermitian(rng, 3), random_density(rng, 3)
        np.testing.assert_allclose(
            unitary_flow(A, unitary_flow(A, rho, e1), e2), unitary_flow(A, rho, e1 + e2), atol=1e-10
        )

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds)
    def test_preserves_trace_and_spectrum(self, seed):
        rng = np.random.default_rng(seed)
        A, rho = random_hermitian(rng, 4), random_density(rng, 4)
        out = unitary_flow(A, rho, rng.uniform(-5, 5))
        np.testing.assert_allclose(np.trace(out), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_derivative_is_commutator(self, seed):
        rng = np.random.default_rng(seed)
        A, rho = random_hermitian(rng, 3), random_density(rng, 3)
        h = 1e-5
        fd = (unitary_flow(A, rho, h) - unitary_flow(A, rho, -h)) / (2 * h)
        np.testing.assert_allclose(fd, -1j * commutator(A, rho), atol=1e-7)


class TestStateValidation:
    def test_trace(self):
        with pytest.raises(InvalidStateError):
            check_density(np.eye(2))

    def test_hermiticity(self):
        with pytest.raises(InvalidStateError):
            check_density(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_positivity(self):
        with pytest.raises(InvalidStateError):
            check_density(np.array([[1.2, 0], [0, -0.2]]))

    def test_roundoff_negativity_accepted(self):
        check_density(np.diag([1.0 + 5e-11, -5e-11]), atol=1e-10)

    def test_effect_spectrum(self):
        check_effect(np.eye(2))
        with pytest.raises(InvalidStateError):
            check_effect(2 * np.eye(2))

    def test_non_square(self):
        with pytest.raises(DimensionError):
            check_density(np.ones((2, 3)) / 2)

    def test_ensemble_reconstructs_state(self):
        rho = random_density(np.random.default_rng(4), 3)
        w, kets = ensemble(rho)
        np.testing.assert_allclose(np.einsum("m,mi,mj->ij", w, kets, kets.conj()), rho, atol=1e-14)


class TestBlochVector:
    def test_too_long(self):
        with pytest.raises(InvalidStateError):
            BlochVector(1, 1, 0)

    def test_round_trip(self):
        b = BlochVector(0.1, -0.5, 0.3)
        np.testing.assert_allclose(BlochVector.from_density(b.density()).vector, b.vector, atol=1e-15)

    def test_pure_state_norm(self):
        b = BlochVector.from_density(pure_state([1, 1j]))
        assert b.norm == pytest.approx(1.0)
        np.testing.assert_allclose(b.vector, [0, 1, 0], atol=1e-15)
