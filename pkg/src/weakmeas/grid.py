"""Uniform 1-D position grids, wavefunctions on them, and detector moments.

Momentum-space amplitudes use the unitary convention

    phi(p) = (2 pi hbar)^{-1/2} ∫ dx exp(-i p x / hbar) psi(x)

discretised with the FFT, so ``sum |phi|^2 dp == sum |psi|^2 dx`` exactly.
Internally momenta are kept in FFT order; public helpers return them sorted.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, InvalidStateError, OffGridError, WrapAroundError

NORM_ATOL = 1e-10
WRAP_FRACTION = 0.05
WRAP_ATOL = 1e-12
MOMENT_DRIFT_WARN = 1e-4


class MomentAccuracyWarning(UserWarning):
    """Detector moments drift under grid coarsening beyond the warning threshold."""


@dataclass(frozen=True)
class PositionGrid:
    """Centered uniform grid ``x_j = origin + (j - n_points // 2) * dx``."""

    n_points: int
    dx: float
    origin: float = 0.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise GridError("a grid needs at least 16 points")
        if not self.dx > 0:
            raise GridError("grid spacing must be positive")

    @property
    def x(self) -> np.ndarray:
        return self.origin + (np.arange(self.n_points) - self.n_points // 2) * self.dx

    @property
    def extent(self) -> float:
        return self.n_points * self.dx

    @property
    def x_first(self) -> float:
        return self.origin - (self.n_points // 2) * self.dx

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, self.dx)

    def momenta(self, hbar=1.0) -> np.ndarray:
        """Conjugate momentum grid in FFT order."""
        return hbar * self.wavenumbers()

    def dp(self, hbar=1.0) -> float:
        return 2 * np.pi * hbar / self.extent

    def index_of(self, x, rtol=1e-9) -> int:
        j = (x - self.x_first) / self.dx
        k = int(round(j))
        if abs(j - k) > rtol * max(1.0, abs(j)) or not 0 <= k < self.n_points:
            raise OffGridError(f"x = {x!r} is not a grid point")
        return k

    def momentum_index_of(self, p, hbar=1.0, rtol=1e-9) -> int:
        j = p / self.dp(hbar)
        k = int(round(j))
        half = self.n_points // 2
        if abs(j - k) > rtol * max(1.0, abs(j)) or not -half <= k < self.n_points - half:
            raise OffGridError(f"p = {p!r} is not on the conjugate grid")
        return k % self.n_points

    def refined(self, factor=2) -> "PositionGrid":
        """Same extent and origin with ``factor`` times as many points."""
        return PositionGrid(self.n_points * factor, self.dx / factor, self.origin)


def default_grid(sigma, g=0.0, a_max=0.0, n_points=1024, origin=0.0) -> PositionGrid:
    """Grid wide enough for a width-``sigma`` packet translated by up to ``|g| a_max``.

    Shifted packets keep ``11 sigma`` of clearance before the outer 5% band that
    the wrap guard inspects.
    """
    reach = 11.0 * sigma + abs(g) * abs(a_max)
    extent = max(20.0 * sigma, 2.0 * reach / (1.0 - 2 * WRAP_FRACTION))
    grid = PositionGrid(int(n_points), extent / n_points, origin)
    if sigma < 3 * grid.dx:
        raise GridError(
            f"sigma = {sigma} is under-resolved with {n_points} points over {extent:.3g};"
            " increase n_points"
        )
    return grid


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Normalised complex amplitudes on a position grid (units length^-1/2)."""

    grid: PositionGrid
    amplitudes: np.ndarray = field(repr=False)
    hbar: float = 1.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_points,):
            raise InvalidStateError(
                f"expected {self.grid.n_points} amplitudes, got shape {amps.shape}"
            )
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        norm = float(np.sum(np.abs(amps) ** 2) * self.grid.dx)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidStateError(f"wavefunction norm {norm:.12g} differs from 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_samples(cls, grid, samples, hbar=1.0):
        """Normalise arbitrary samples onto ``grid``."""
        samples = np.asarray(samples, dtype=complex)
        norm = math.sqrt(float(np.sum(np.abs(samples) ** 2) * grid.dx))
        if norm == 0:
            raise InvalidStateError("all-zero wavefunction")
        return cls(grid, samples / norm, hbar)

    @property
    def x(self):
        return self.grid.x

    def density(self):
        return np.abs(self.amplitudes) ** 2


# Both the detector pointer and the Bohmian system particle live on grids.
DetectorWavefunction = Wavefunction
SystemWavefunction1D = Wavefunction


def gaussian_state(grid, sigma, x0=0.0, p0=0.0, hbar=1.0) -> Wavefunction:
    """``(2 pi sigma^2)^{-1/4} exp(i p0 (x - x0)/hbar - (x - x0)^2 / 4 sigma^2)``."""
    if sigma < 3 * grid.dx:
        raise GridError(f"sigma = {sigma} is below 3 dx = {3 * grid.dx:.3g}")
    if grid.extent < 10 * sigma:
        raise GridError(f"grid extent {grid.extent:.3g} is below 10 sigma")
    u = grid.x - x0
    amps = (2 * np.pi * sigma**2) ** -0.25 * np.exp(1j * p0 * u / hbar - u**2 / (4 * sigma**2))
    return Wavefunction.from_samples(grid, amps, hbar)


def to_momentum(amplitudes, grid, hbar=1.0) -> np.ndarray:
    """Momentum amplitudes in FFT order (last axis is position)."""
    p = grid.momenta(hbar)
    phase = np.exp(-1j * p * grid.x_first / hbar)
    return grid.dx / math.sqrt(2 * np.pi * hbar) * phase * np.fft.fft(amplitudes, axis=-1)


def from_momentum(phi, grid, hbar=1.0) -> np.ndarray:
    p = grid.momenta(hbar)
    phase = np.exp(1j * p * grid.x_first / hbar)
    return math.sqrt(2 * np.pi * hbar) / grid.dx * np.fft.ifft(phase * phi, axis=-1)


def momentum_representation(psi: Wavefunction):
    """Return ``(p, phi)`` on the conjugate grid sorted by momentum."""
    p = psi.grid.momenta(psi.hbar)
    phi = to_momentum(psi.amplitudes, psi.grid, psi.hbar)
    order = np.argsort(p)
    return p[order], phi[order]


def translate(amplitudes, grid, shift) -> np.ndarray:
    """Spectral translation ``psi(x) -> psi(x - shift)`` along the last axis."""
    if shift == 0:
        return np.array(amplitudes, dtype=complex)
    k = grid.wavenumbers()
    return np.fft.ifft(np.fft.fft(amplitudes, axis=-1) * np.exp(-1j * k * shift), axis=-1)


def apply_momentum_power(amplitudes, grid, n, hbar=1.0) -> np.ndarray:
    """``p^n psi`` by spectral differentiation."""
    if n == 0:
        return np.array(amplitudes, dtype=complex)
    p = grid.momenta(hbar)
    return np.fft.ifft(p**n * np.fft.fft(amplitudes, axis=-1), axis=-1)


def check_wrap(amplitudes, grid, atol=WRAP_ATOL):
    """Raise if any amplitude in the outer 5% band on either side exceeds ``atol``."""
    amps = np.atleast_2d(amplitudes)
    band = max(1, int(math.ceil(WRAP_FRACTION * grid.n_points)))
    edge = max(np.abs(amps[..., :band]).max(), np.abs(amps[..., -band:]).max())
    if edge >= atol:
        raise WrapAroundError(
            f"amplitude {edge:.2e} in the outer 5% of the grid; widen the grid"
        )


@dataclass(frozen=True, eq=False)
class DetectorMoments:
    """Detector moments ``<p^n>_0`` and ``<{p^n, x}>_0 / 2`` for n = 0..max_n."""

    p_moments: np.ndarray
    sym_moments: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_moments, dtype=float)
        s = np.asarray(self.sym_moments, dtype=float)
        if p.shape != s.shape or p.ndim != 1 or p.size < 1:
            raise ValueError("moment arrays must be 1-D with equal length")
        if abs(p[0] - 1.0) > 1e-8:
            raise ValueError("<p^0> must equal 1")
        object.__setattr__(self, "p_moments", p)
        object.__setattr__(self, "sym_moments", s)

    @property
    def max_order(self) -> int:
        return self.p_moments.size - 1

    @property
    def mean_x(self) -> float:
        return float(self.sym_moments[0])

    @property
    def mean_p(self) -> float:
        return float(self.p_moments[1]) if self.max_order >= 1 else 0.0

    def p(self, n) -> float:
        return float(self.p_moments[n])

    def sym(self, n) -> float:
        return float(self.sym_moments[n])


def _raw_moments(amps, grid, hbar, max_n):
    phi = to_momentum(amps, grid, hbar)
    p = grid.momenta(hbar)
    dens = np.abs(phi) ** 2 * grid.dp(hbar)
    psi_hat = np.fft.fft(amps)
    x = grid.x
    pm = np.empty(max_n + 1)
    sm = np.empty(max_n + 1)
    for n in range(max_n + 1):
        pm[n] = float(np.sum(p**n * dens))
        pn_psi = np.fft.ifft(p**n * psi_hat) if n else amps
        sm[n] = float(np.real(np.sum(np.conj(amps) * x * pn_psi)) * grid.dx)
    return pm, sm


def moments(psi: Wavefunction, max_n=8, check_resolution=True) -> DetectorMoments:
    """Detector moments up to order ``max_n``.

    With ``check_resolution`` the moments are recomputed on the grid with every
    other point dropped; a relative drift above 1e-4 (in units of the momentum
    spread) emits :class:`MomentAccuracyWarning`.
    """
    if max_n < 0:
        raise ValueError("max_n must be non-negative")
    pm, sm = _raw_moments(psi.amplitudes, psi.grid, psi.hbar, max_n)
    grid = psi.grid
    if check_resolution and grid.n_points >= 32 and grid.n_points % 4 == 0:
        # even fine points are exactly the points of the doubled-spacing grid
        coarse = PositionGrid(grid.n_points // 2, 2 * grid.dx, grid.origin)
        sub = psi.amplitudes[::2]
        sub = sub / math.sqrt(np.sum(np.abs(sub) ** 2) * coarse.dx)
        pc, sc = _raw_moments(sub, coarse, psi.hbar, max_n)
        n = np.arange(max_n + 1)
        p_rms = math.sqrt(max(pm[2], 0.0)) if max_n >= 2 else psi.hbar / grid.extent
        x_rms = math.sqrt(float(np.sum(grid.x**2 * psi.density()) * grid.dx)) or 1.0
        pscale = np.maximum(np.abs(pm), p_rms**n)
        sscale = np.maximum(np.abs(sm), x_rms * p_rms**n)
        drift = max(np.max(np.abs(pm - pc) / pscale), np.max(np.abs(sm - sc) / sscale))
        if drift > MOMENT_DRIFT_WARN:
            warnings.warn(
                f"detector moments up to order {max_n} drift by {drift:.1e} when the grid"
                " spacing is doubled; the grid cannot resolve them",
                MomentAccuracyWarning,
                stacklevel=2,
            )
    return DetectorMoments(pm, sm)


def gaussian_moments(sigma, max_n, hbar=1.0, x0=0.0, p0=0.0) -> DetectorMoments:
    """Closed-form moments of a Gaussian pointer centred at ``x0`` with mean momentum ``p0``.

    For ``p0 = 0`` the even moments are ``<p^2n> = (hbar/2 sigma)^{2n} (2n-1)!!``
    and odd moments vanish; a boost mixes them binomially.  In both cases
    ``<{p^n, x}>/2 = x0 <p^n>``.
    """
    central = np.zeros(max_n + 1)
    central[0] = 1.0
    width = hbar / (2.0 * sigma)
    for n in range(2, max_n + 1, 2):
        central[n] = central[n - 2] * width**2 * (n - 1)
    pm = np.array(
        [sum(math.comb(n, k) * p0 ** (n - k) * central[k] for k in range(n + 1)) for n in range(max_n + 1)]
    )
    return DetectorMoments(pm, x0 * pm)
