"""Dense linear algebra on finite-dimensional system spaces.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)``.  Tensor
products follow the Kronecker convention with the system index slow and the
detector index fast, ``(s, d) -> s * d_d + d``; every module relies on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InvalidStateError,
    NonConvergenceError,
    NonHermitianError,
)

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA1, SIGMA2, SIGMA3)

HERMITIAN_ATOL = 1e-10
DENSITY_ATOL = 1e-12
POSITIVITY_FLOOR = -1e-10


def as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return a


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, atol=HERMITIAN_ATOL) -> bool:
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    return bool(np.allclose(a, dagger(a), rtol=0.0, atol=atol * scale))


def require_hermitian(a, name="operator", atol=HERMITIAN_ATOL) -> np.ndarray:
    a = as_operator(a)
    if not is_hermitian(a, atol):
        raise NonHermitianError(f"{name} must be Hermitian")
    return a


def _same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` (index of ``a`` slow)."""
    return np.kron(as_operator(a), as_operator(b))


def partial_trace(joint, dims, keep="system") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    joint : array (d_s*d_d, d_s*d_d)
    dims : (d_s, d_d)
    keep : {"system", "detector"}
    """
    joint = as_operator(joint)
    d_s, d_d = (int(n) for n in dims)
    if joint.shape[0] != d_s * d_d:
        raise DimensionError(f"operator of dim {joint.shape[0]} does not split as {d_s}x{d_d}")
    t = joint.reshape(d_s, d_d, d_s, d_d)
    if keep == "system":
        return np.einsum("ijkj->ik", t)
    if keep == "detector":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'system' or 'detector', not {keep!r}")


def commutator(a, b) -> np.ndarray:
    a, b = as_operator(a), as_operator(b)
    _same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = as_operator(a), as_operator(b)
    _same_dim(a, b)
    return a @ b + b @ a


def adjoint_action(a, x, n=1) -> np.ndarray:
    """Iterated commutator ``(ad a)^n (x) = [a, [a, ... [a, x]]]``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a, x = as_operator(a), as_operator(x)
    _same_dim(a, x)
    for _ in range(n):
        x = a @ x - x @ a
    return x


def matrix_exponential(a, max_terms=10_000, cutoff=1e-16) -> np.ndarray:
    """``exp(a)`` for a square matrix.

    Hermitian and anti-Hermitian inputs go through ``eigh``; anything else uses
    scaling and squaring around a truncated Taylor series.
    """
    a = as_operator(a)
    if is_hermitian(a, 1e-14):
        w, v = np.linalg.eigh(0.5 * (a + dagger(a)))
        return (v * np.exp(w)) @ dagger(v)
    h = 1j * a
    if is_hermitian(h, 1e-14):
        w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
        return (v * np.exp(-1j * w)) @ dagger(v)

    norm = np.linalg.norm(a, 1)
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    b = a / 2.0**squarings
    term = np.eye(a.shape[0], dtype=complex)
    result = term.copy()
    for k in range(1, max_terms + 1):
        term = term @ b / k
        result += term
        if np.linalg.norm(term, 1) <= cutoff * np.linalg.norm(result, 1):
            break
    else:
        raise NonConvergenceError(f"exponential series not converged after {max_terms} terms")
    for _ in range(squarings):
        result = result @ result
    return result


def unitary_flow(a, rho, eps) -> np.ndarray:
    """State after flowing a distance ``eps`` along the unitary flow of ``a``.

    Returns ``exp(-i eps a) rho exp(i eps a)``.
    """
    a = require_hermitian(a, "flow generator")
    rho = as_operator(rho)
    _same_dim(a, rho)
    u = matrix_exponential(-1j * eps * a)
    return u @ rho @ dagger(u)


def check_density(rho, atol=DENSITY_ATOL) -> np.ndarray:
    """Validate and return ``rho`` as a density operator."""
    rho = as_operator(rho)
    if abs(np.trace(rho) - 1.0) > atol:
        raise InvalidStateError(f"trace {np.trace(rho):.6g} differs from 1")
    if not is_hermitian(rho, atol):
        raise InvalidStateError("density operator is not Hermitian")
    if np.linalg.eigvalsh(rho).min() < POSITIVITY_FLOOR:
        raise InvalidStateError("density operator has a negative eigenvalue")
    return rho


def check_effect(p, atol=HERMITIAN_ATOL) -> np.ndarray:
    """Validate a POVM element: Hermitian with spectrum inside [0, 1]."""
    p = as_operator(p)
    if not is_hermitian(p, atol):
        raise InvalidStateError("POVM element is not Hermitian")
    w = np.linalg.eigvalsh(p)
    if w.min() < POSITIVITY_FLOOR or w.max() > 1.0 - POSITIVITY_FLOOR:
        raise InvalidStateError("POVM element spectrum must lie in [0, 1]")
    return p


def pure_state(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex).ravel()
    norm = np.linalg.norm(ket)
    if norm == 0:
        raise InvalidStateError("zero vector")
    ket = ket / norm
    return np.outer(ket, ket.conj())


def ensemble(rho, weight_floor=1e-14):
    """Spectral decomposition of ``rho`` into (weights, kets) with kets as rows."""
    w, v = np.linalg.eigh(check_density(rho))
    keep = w > weight_floor
    return w[keep], v[:, keep].T


@dataclass(frozen=True)
class BlochVector:
    """Qubit state ``(1 + r·σ)/2``."""

    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        if self.r1**2 + self.r2**2 + self.r3**2 > 1.0 + 1e-12:
            raise InvalidStateError("Bloch vector is longer than 1")

    @property
    def vector(self):
        return np.array([self.r1, self.r2, self.r3])

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))

    def density(self) -> np.ndarray:
        return 0.5 * (IDENTITY2 + self.r1 * SIGMA1 + self.r2 * SIGMA2 + self.r3 * SIGMA3)

    @classmethod
    def from_density(cls, rho):
        rho = check_density(rho)
        if rho.shape != (2, 2):
            raise DimensionError("Bloch vectors describe qubits only")
        r = [float(np.real(np.trace(rho @ s))) for s in PAULIS]
        return cls(*r)


def bloch_components(op) -> np.ndarray:
    """``(Tr(op σ1), Tr(op σ2), Tr(op σ3))`` for a 2x2 operator."""
    op = as_operator(op)
    return np.array([np.real(np.trace(op @ s)) for s in PAULIS])
