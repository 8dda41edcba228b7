"""Momentum weak values of a 1-D wavefunction post-selected on position.

Writing ``phi = r exp(iS)``, the momentum weak value at ``x`` is
``hbar S'(x) - i hbar (ln r)'(x)``: its real part is the Bohmian momentum and its
imaginary part, divided by the mass, the osmotic velocity.
"""
from __future__ import annotations

import numpy as np

from .errors import DegeneratePostSelectionError
from .grid import SystemWavefunction1D, apply_momentum_power
from .weakvalues import WeakValue, weak_value

MAG_FLOOR = 1e-8
TAIL_MASS = 0.1


def _momentum_applied(phi: SystemWavefunction1D) -> np.ndarray:
    return apply_momentum_power(phi.amplitudes, phi.grid, 1, phi.hbar)


def momentum_weak_value_at(phi: SystemWavefunction1D, x, mag_floor=MAG_FLOOR) -> WeakValue:
    """``p_w(x) = -i hbar phi'(x) / phi(x)`` with a spectral derivative."""
    j = phi.grid.index_of(x)
    amp = phi.amplitudes[j]
    if abs(amp) <= mag_floor:
        raise DegeneratePostSelectionError(abs(amp) ** 2 * phi.grid.dx, mag_floor**2 * phi.grid.dx)
    value = complex(_momentum_applied(phi)[j] / amp)
    return WeakValue(value, float(abs(amp) ** 2 * phi.grid.dx))


def momentum_weak_value_field(phi: SystemWavefunction1D, mag_floor=MAG_FLOOR) -> np.ndarray:
    """``p_w`` at every grid point; NaN where ``|phi|`` is below ``mag_floor``."""
    amps = phi.amplitudes
    ok = np.abs(amps) > mag_floor
    out = np.full(amps.shape, np.nan + 1j * np.nan)
    out[ok] = _momentum_applied(phi)[ok] / amps[ok]
    return out


def osmotic_velocity_field(phi: SystemWavefunction1D, mass, mag_floor=MAG_FLOOR) -> np.ndarray:
    """``Im p_w / m = -(hbar / 2m) (ln |phi|^2)'``; NaN gaps below ``mag_floor``."""
    if not mass > 0:
        raise ValueError("mass must be positive")
    return momentum_weak_value_field(phi, mag_floor).imag / mass


def density_log_derivative(phi: SystemWavefunction1D, mag_floor=MAG_FLOOR) -> np.ndarray:
    """``(ln rho)'`` from the spectral derivative of ``rho = |phi|^2`` itself."""
    rho = phi.density()
    k = phi.grid.wavenumbers()
    drho = np.real(np.fft.ifft(1j * k * np.fft.fft(rho)))
    out = np.full(rho.shape, np.nan)
    ok = np.abs(phi.amplitudes) > mag_floor
    out[ok] = drho[ok] / rho[ok]
    return out


def central_mass_mask(phi: SystemWavefunction1D, tail_mass=TAIL_MASS) -> np.ndarray:
    """Grid points inside the central ``1 - tail_mass`` of the probability (half cut per side)."""
    cdf = np.cumsum(phi.density()) * phi.grid.dx
    return (cdf >= tail_mass / 2) & (cdf <= 1 - tail_mass / 2)


def momentum_operator_matrix(grid, hbar=1.0) -> np.ndarray:
    """Dense spectral momentum operator on the grid (N x N, Hermitian)."""
    eye = np.eye(grid.n_points)
    p = grid.momenta(hbar)
    mat = np.fft.ifft(p[:, None] * np.fft.fft(eye, axis=0), axis=0)
    return 0.5 * (mat + mat.conj().T)


def cell_projector_weak_value(phi: SystemWavefunction1D, x) -> WeakValue:
    """Momentum weak value from the general weak-value formula with a one-cell projector.

    The state is ``|phi><phi|`` on the grid (unit-trace in the discrete inner
    product) and the post-selection projects onto the grid cell containing ``x``.
    """
    grid = phi.grid
    j = grid.index_of(x)
    ket = phi.amplitudes * np.sqrt(grid.dx)
    ket = ket / np.linalg.norm(ket)
    rho = np.outer(ket, ket.conj())
    proj = np.zeros((grid.n_points, grid.n_points))
    proj[j, j] = 1.0
    return weak_value(momentum_operator_matrix(grid, phi.hbar), rho, proj)
