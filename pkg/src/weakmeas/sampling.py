"""Random test instances: states, observables, selections and pointers."""
from __future__ import annotations

import numpy as np

from .grid import Wavefunction, default_grid
from .operators import BlochVector, pure_state


def random_ket(rng, d) -> np.ndarray:
    ket = rng.normal(size=d) + 1j * rng.normal(size=d)
    return ket / np.linalg.norm(ket)


def random_density(rng, d, rank=None) -> np.ndarray:
    rank = d if rank is None else rank
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, d, scale=1.0) -> np.ndarray:
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (X + X.conj().T)


def random_projector(rng, d) -> np.ndarray:
    return pure_state(random_ket(rng, d))


def random_effect(rng, d) -> np.ndarray:
    """A POVM element with spectrum strictly inside (0, 1)."""
    w = rng.uniform(0.05, 0.95, size=d)
    q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return (q * w) @ q.conj().T


def random_bloch(rng, max_norm=1.0) -> BlochVector:
    v = rng.normal(size=3)
    v *= max_norm * rng.uniform() ** (1 / 3) / np.linalg.norm(v)
    return BlochVector(*v)


def random_pointer(rng, g_max=1.0, a_max=1.0, n_points=1024, hbar=1.0) -> Wavefunction:
    """Non-Gaussian pointer: two or three displaced, boosted Gaussians with random phases."""
    grid = default_grid(1.8, g_max, a_max, n_points)
    x = grid.x
    amps = np.zeros(n_points, dtype=complex)
    for _ in range(rng.integers(2, 4)):
        c = rng.uniform(-1.5, 1.5)
        w = rng.uniform(0.6, 1.2)
        k = rng.uniform(-1.0, 1.0)
        amps += rng.uniform(0.3, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.exp(
            -((x - c) ** 2) / (4 * w**2) + 1j * k * x
        )
    return Wavefunction.from_samples(grid, amps, hbar)
