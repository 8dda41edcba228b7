import numpy as np
import pytest

from weakmeas.bohmian import (
    cell_projector_weak_value,
    central_mass_mask,
    density_log_derivative,
    momentum_weak_value_at,
    momentum_weak_value_field,
    osmotic_velocity_field,
)
from weakmeas.errors import DegeneratePostSelectionError
from weakmeas.grid import PositionGrid, SystemWavefunction1D, default_grid, gaussian_state


def modulated_gaussian(sigma=1.0, k0=0.8, hbar=1.0, n_points=1024):
    return gaussian_state(default_grid(sigma, n_points=n_points), sigma, p0=hbar * k0, hbar=hbar)


def relative_inf_error(got, expected):
    return np.abs(got - expected).max() / np.abs(expected).max()


class TestMomentumWeakValue:
    @pytest.mark.parametrize("hbar", [1.0, 0.5])
    def test_phase_gradient(self, hbar):
        phi = modulated_gaussian(k0=0.8, hbar=hbar)
        mask = central_mass_mask(phi)
        pw = momentum_weak_value_field(phi)
        np.testing.assert_allclose(pw.real[mask], hbar * 0.8, rtol=1e-6)

    @pytest.mark.parametrize("sigma", [0.7, 1.0, 1.6])
    def test_imaginary_part(self, sigma):
        phi = modulated_gaussian(sigma=sigma)
        mask = central_mass_mask(phi)
        two_im = 2 * momentum_weak_value_field(phi).imag
        x = phi.grid.x
        assert relative_inf_error(two_im[mask], x[mask] / sigma**2) < 1e-5

    def test_real_wavefunction(self):
        phi = modulated_gaussian(k0=0.0)
        pw = momentum_weak_value_field(phi)
        np.testing.assert_allclose(pw.real[central_mass_mask(phi)], 0, atol=1e-12)

    def test_pointwise_matches_field(self):
        phi = modulated_gaussian()
        x = phi.grid.x[530]
        wv = momentum_weak_value_at(phi, x)
        assert wv.value == momentum_weak_value_field(phi)[530]
        assert wv.post_prob == pytest.approx(phi.density()[530] * phi.grid.dx)

    def test_node(self):
        grid = PositionGrid(256, 0.05)
        xs = grid.x
        phi = SystemWavefunction1D.from_samples(grid, xs * np.exp(-(xs**2)))
        with pytest.raises(DegeneratePostSelectionError):
            momentum_weak_value_at(phi, 0.0)
        assert np.isnan(momentum_weak_value_field(phi)[grid.index_of(0.0)])


class TestOsmoticVelocity:
    def test_unit_gaussian(self):
        phi = modulated_gaussian(k0=0.0)
        mask = central_mass_mask(phi)
        v = osmotic_velocity_field(phi, mass=1.0)
        assert relative_inf_error(v[mask], phi.grid.x[mask] / 2) < 1e-5

    def test_mass_scaling(self):
        phi = modulated_gaussian()
        mask = central_mass_mask(phi)
        np.testing.assert_allclose(
            osmotic_velocity_field(phi, 2.0)[mask], osmotic_velocity_field(phi, 1.0)[mask] / 2
        )

    def test_uniform_magnitude(self):
        grid = PositionGrid(128, 0.1)
        phi = SystemWavefunction1D.from_samples(grid, np.exp(1j * grid.wavenumbers()[3] * grid.x))
        np.testing.assert_allclose(osmotic_velocity_field(phi, 1.0), 0, atol=1e-10)

    def test_symmetric_density_integrates_to_zero(self):
        grid = default_grid(1.0)
        x = grid.x
        phi = SystemWavefunction1D.from_samples(grid, np.exp(-(x**2) / 4) * (1 + 0.5 * x**2) * np.exp(0.3j * x))
        v = osmotic_velocity_field(phi, 1.0)
        ok = np.isfinite(v)
        assert abs(np.sum(v[ok] * phi.density()[ok]) * grid.dx) < 1e-10

    def test_bad_mass(self):
        with pytest.raises(ValueError):
            osmotic_velocity_field(modulated_gaussian(), 0.0)


class TestGeneralMachinery:
    @pytest.mark.parametrize("j", [100, 128, 150])
    def test_cell_projector(self, j):
        grid = PositionGrid(256, 0.08)
        x = grid.x
        phi = SystemWavefunction1D.from_samples(
            grid, np.exp(-(x**2) / 4 + 0.6j * x + 0.1j * x**2) * (1 + 0.2 * x)
        )
        via_projector = cell_projector_weak_value(phi, x[j])
        direct = momentum_weak_value_at(phi, x[j])
        assert abs(via_projector.value - direct.value) < 1e-6 * max(1, abs(direct.value))
        assert via_projector.post_prob == pytest.approx(direct.post_prob, rel=1e-12)

    def test_log_derivative_of_density(self):
        grid = default_grid(1.0)
        x = grid.x
        phi = SystemWavefunction1D.from_samples(grid, np.exp(-(x**2) / 4 + 0.4j * x) * (1.2 + np.cos(x)))
        mask = central_mass_mask(phi)
        two_im = 2 * momentum_weak_value_field(phi).imag
        np.testing.assert_allclose(two_im[mask], -density_log_derivative(phi)[mask], atol=1e-8)


class TestGridRefinement:
    def test_converges_under_doubling(self):
        # the spectral derivative converges exponentially once sigma is resolved
        errors = []
        for n in (16, 32, 64, 128):
            grid = PositionGrid(n, 24.0 / n)
            x = grid.x
            phi = SystemWavefunction1D.from_samples(grid, np.exp(-(x**2) / 4 + 0.8j * x))
            mask = central_mass_mask(phi)
            pw = momentum_weak_value_field(phi)
            errors.append(
                max(relative_inf_error(2 * pw.imag[mask], x[mask]), np.abs(pw.real[mask] - 0.8).max() / 0.8)
            )
        assert errors[0] > 1e-2
        assert errors[1] < 1e-3 * errors[0]
        assert errors[2] < 1e-10 and errors[3] < 1e-10

    def test_mask_keeps_central_mass(self):
        phi = modulated_gaussian()
        mask = central_mass_mask(phi, 0.2)
        inside = np.sum(phi.density()[mask]) * phi.grid.dx
        assert inside == pytest.approx(0.8, abs=0.01)
