import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakmeas.errors import DegeneratePostSelectionError
from weakmeas.grid import default_grid, gaussian_moments, gaussian_state, moments
from weakmeas.operators import SIGMA3, anticommutator, commutator, pure_state
from weakmeas.sampling import (
    random_density,
    random_effect,
    random_hermitian,
    random_ket,
    random_projector,
)
from weakmeas.vonneumann import CouplingConfig, conditioned_response
from weakmeas.weakvalues import (
    WeakValue,
    flowed_probability,
    linear_response,
    log_directional_derivative,
    pure_weak_value,
    retrodictive_weak_value,
    reversed_flow_derivative,
    weak_value,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
PLUS_X = pure_state([1, 1])
PLUS_Y = pure_state([1, 1j])
MINUS_X = pure_state([1, -1])


def random_instance(rng, d):
    P = random_projector(rng, d) if rng.uniform() < 0.5 else random_effect(rng, d)
    return random_hermitian(rng, d), random_density(rng, d), P


class TestWeakValue:
    def test_x_to_y(self):
        wv = weak_value(SIGMA3, PLUS_X, PLUS_Y)
        assert wv.value == pytest.approx(1j, abs=1e-15)
        assert wv.re == pytest.approx(0.0, abs=1e-15)
        assert wv.two_im == pytest.approx(2.0)
        assert wv.post_prob == pytest.approx(0.5)

    def test_no_post_selection(self):
        rng = np.random.default_rng(0)
        A, rho = random_hermitian(rng, 3), random_density(rng, 3)
        wv = weak_value(A, rho, np.eye(3))
        assert wv.value == pytest.approx(np.trace(A @ rho).real, abs=1e-14)

    def test_orthogonal(self):
        with pytest.raises(DegeneratePostSelectionError):
            weak_value(SIGMA3, PLUS_X, MINUS_X)

    def test_invalid_record(self):
        with pytest.raises(ValueError):
            WeakValue(1.0 + 0j, 0.0)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, d=st.integers(2, 4))
    def test_commutator_split(self, seed, d):
        A, rho, P = random_instance(np.random.default_rng(seed), d)
        wv = weak_value(A, rho, P)
        prob = np.trace(P @ rho).real
        re = np.trace(P @ anticommutator(A, rho)).real / (2 * prob)
        im = np.trace(-1j * P @ commutator(A, rho)).real / (2 * prob)
        assert wv.re == pytest.approx(re, abs=1e-12 * max(1, abs(re)))
        assert wv.im == pytest.approx(im, abs=1e-12 * max(1, abs(im)))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, d=st.integers(2, 4))
    def test_pure_state_form(self, seed, d):
        rng = np.random.default_rng(seed)
        A, ki, kf = random_hermitian(rng, d), random_ket(rng, d), random_ket(rng, d)
        expected = pure_weak_value(A, ki, kf)
        value = weak_value(A, pure_state(ki), pure_state(kf)).value
        assert abs(value - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_unbounded_real_part(self):
        theta = 1e-3
        psi_i = [np.cos(np.pi / 4 + theta), np.sin(np.pi / 4 + theta)]
        psi_f = [np.cos(np.pi / 4), -np.sin(np.pi / 4)]
        wv = weak_value(SIGMA3, pure_state(psi_i), pure_state(psi_f))
        assert abs(wv.re) > 1.0
        assert wv.re == pytest.approx(-1 / np.tan(theta), rel=1e-9)


class TestLogDerivative:
    def test_x_to_y(self):
        fd = log_directional_derivative(SIGMA3, PLUS_X, PLUS_Y, mode="finite_difference")
        assert fd == pytest.approx(2.0, abs=1e-8)
        eps = 0.3
        assert flowed_probability(SIGMA3, PLUS_X, PLUS_Y, eps) == pytest.approx(
            (np.cos(eps) + np.sin(eps)) ** 2 / 2
        )

    def test_stationary_flow(self):
        rho = np.diag([0.3, 0.7]).astype(complex)
        P = random_projector(np.random.default_rng(1), 2)
        assert log_directional_derivative(SIGMA3, rho, P) == pytest.approx(0.0, abs=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, d=st.integers(2, 3))
    def test_finite_difference_matches_analytic(self, seed, d):
        A, rho, P = random_instance(np.random.default_rng(seed), d)
        if np.trace(P @ rho).real < 1e-3:
            return
        analytic = log_directional_derivative(A, rho, P)
        fd = log_directional_derivative(A, rho, P, mode="finite_difference")
        assert fd == pytest.approx(analytic, abs=1e-7)

    @pytest.mark.parametrize("seed", range(5))
    def test_first_order_probability_model(self, seed):
        A, rho, P = random_instance(np.random.default_rng(seed), 2)
        eps = np.linspace(-1e-3, 1e-3, 21)
        probs = np.array([flowed_probability(A, rho, P, e) for e in eps])
        c2, c1, c0 = np.polyfit(eps, probs, 2)
        wv = weak_value(A, rho, P)
        assert c0 == pytest.approx(wv.post_prob, abs=1e-12)
        assert c1 / c0 == pytest.approx(wv.two_im, abs=1e-6 * max(1, abs(wv.two_im)))
        residual = probs - c0 * (1 + wv.two_im * eps)
        assert np.abs(residual).max() < 5 * abs(c2) * 1e-6 + 1e-12

    def test_bad_mode_and_step(self):
        with pytest.raises(ValueError):
            log_directional_derivative(SIGMA3, PLUS_X, PLUS_Y, mode="spline")
        with pytest.raises(ValueError):
            log_directional_derivative(SIGMA3, PLUS_X, PLUS_Y, mode="finite_difference", step=0.0)

    def test_stencil_hits_zero(self):
        with pytest.raises(DegeneratePostSelectionError):
            log_directional_derivative(SIGMA3, PLUS_X, MINUS_X, mode="finite_difference")


class TestLinearResponse:
    def test_no_coupling(self):
        m = gaussian_moments(1.0, 2, x0=0.4, p0=0.1)
        lr = linear_response(SIGMA3, PLUS_X, PLUS_Y, m, CouplingConfig(0.0))
        assert (lr.mean_x_f, lr.mean_p_f) == (pytest.approx(0.4), pytest.approx(0.1))

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_real_gaussian(self, sigma):
        rng = np.random.default_rng(3)
        A, rho, P = random_instance(rng, 2)
        wv = weak_value(A, rho, P)
        g = 0.01
        lr = linear_response(A, rho, P, gaussian_moments(sigma, 2), CouplingConfig(g))
        assert lr.mean_x_f == pytest.approx(g * wv.re, rel=1e-14)
        assert lr.mean_p_f == pytest.approx(g / (4 * sigma**2) * wv.two_im, rel=1e-14)
        assert lr.coefficients[-2:] == (g, 1.0)

    @pytest.mark.parametrize("seed", range(6))
    def test_small_coupling_slopes(self, seed):
        rng = np.random.default_rng(seed)
        A, rho, P = random_hermitian(rng, 2), random_density(rng, 2), random_projector(rng, 2)
        psi = gaussian_state(default_grid(1.0, origin=0.2), 1.0, x0=0.2, p0=0.3)
        m = moments(psi, 2)
        g = 1e-3
        plus = conditioned_response(rho, psi, A, P, CouplingConfig(g))
        minus = conditioned_response(rho, psi, A, P, CouplingConfig(-g))
        lr = linear_response(A, rho, P, m, CouplingConfig(g))
        slope_x = (plus.mean_x_f - minus.mean_x_f) / (2 * g)
        slope_p = (plus.mean_p_f - minus.mean_p_f) / (2 * g)
        assert slope_x == pytest.approx((lr.mean_x_f - m.mean_x) / g, rel=1e-3, abs=1e-6)
        assert slope_p == pytest.approx((lr.mean_p_f - m.mean_p) / g, rel=1e-3, abs=1e-6)

    def test_boosted_pointer_needs_covariance(self):
        # with a momentum boost the bare second moment would overstate the response
        m = gaussian_moments(1.0, 2, p0=2.0)
        lr = linear_response(SIGMA3, PLUS_X, PLUS_Y, m, CouplingConfig(0.01))
        assert lr.mean_p_f - 2.0 == pytest.approx(0.01 * 0.25 * 2.0, rel=1e-12)


class TestRetrodictive:
    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, d=st.integers(2, 4))
    def test_equals_predictive(self, seed, d):
        A, rho, P = random_instance(np.random.default_rng(seed), d)
        a, b = weak_value(A, rho, P), retrodictive_weak_value(A, rho, P)
        assert abs(a.value - b.value) <= 1e-12 * max(1.0, abs(a.value))
        assert b.post_prob == pytest.approx(a.post_prob, abs=1e-14)

    @pytest.mark.parametrize("seed", range(6))
    def test_reversed_flow(self, seed):
        A, rho, P = random_instance(np.random.default_rng(seed), 2)
        wv = retrodictive_weak_value(A, rho, P)
        assert reversed_flow_derivative(A, rho, P) == pytest.approx(wv.two_im, abs=1e-7)

    def test_no_post_selection(self):
        rng = np.random.default_rng(4)
        A, rho = random_hermitian(rng, 2), random_density(rng, 2)
        wv = retrodictive_weak_value(A, rho, np.eye(2))
        assert wv.value == pytest.approx(np.trace(A @ rho).real, abs=1e-14)

    def test_zero_effect(self):
        with pytest.raises(DegeneratePostSelectionError):
            retrodictive_weak_value(SIGMA3, PLUS_X, np.zeros((2, 2)))
