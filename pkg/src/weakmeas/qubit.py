"""Closed-form qubit solution for an arbitrary detector state.

With ``A = A σ3`` (traceless, eigenvalues ``±A``) the non-selective map and the
detector averaging maps only rotate and damp the transverse Bloch components.
The six real series ``c, s, c_x, s_x, c_p, s_p`` in ``k = 2Ag/hbar`` collect all
orders of the detector moments.  A general Hermitian qubit observable is
brought to this form by :func:`qubit_frame`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePostSelectionError, NonConvergenceError
from .grid import DetectorMoments
from .operators import (
    IDENTITY2,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    BlochVector,
    bloch_components,
    check_density,
    check_effect,
    dagger,
    require_hermitian,
)
from .vonneumann import PROB_FLOOR, ConditionedResponse

SERIES_TOL = 1e-12
SERIES_CAP = 40


@dataclass(frozen=True)
class QubitSeriesCoefficients:
    c: float
    s: float
    c_x: float
    s_x: float
    c_p: float
    s_p: float
    truncation_order: int
    A_scale: float

    def __post_init__(self):
        if self.A_scale == 0:
            raise ValueError("A_scale must be non-zero")

    def nonselective_bloch(self, r) -> np.ndarray:
        """Bloch vector of the non-selectively measured state."""
        r1, r2, r3 = r
        return np.array([r1 + self.c * r1 - self.s * r2, r2 + self.c * r2 + self.s * r1, r3])


def series_coefficients(
    moments: DetectorMoments, A_scale, cfg, tol=SERIES_TOL, max_terms=SERIES_CAP
) -> QubitSeriesCoefficients:
    """Sum the six qubit series.

    Summation stops once every term has stayed below ``tol`` (relative to
    ``max(1, |partial sum|)``) for two consecutive orders.

    Raises
    ------
    NonConvergenceError
        If that does not happen within ``max_terms`` orders, or the supplied
        moments do not reach a high enough order.
    """
    if A_scale == 0:
        raise ValueError("A_scale must be non-zero; A proportional to identity is not measured")
    k = 2.0 * A_scale * cfg.g / cfg.hbar
    sums = np.zeros(6)
    if k == 0:
        return QubitSeriesCoefficients(*sums, 0, A_scale)
    quiet = 0
    for n in range(1, max_terms + 1):
        if moments.max_order < 2 * n + 1:
            raise NonConvergenceError(
                f"qubit series needs detector moments beyond order {moments.max_order}"
            )
        even = (-1) ** n * k ** (2 * n) / math.factorial(2 * n)
        odd = (-1) ** (n + 1) * k ** (2 * n - 1) / math.factorial(2 * n - 1)
        terms = np.array(
            [
                even * moments.p(2 * n),
                odd * moments.p(2 * n - 1),
                even * moments.sym(2 * n),
                odd * moments.sym(2 * n - 1),
                even * moments.p(2 * n + 1),
                odd * moments.p(2 * n),
            ]
        )
        if not np.all(np.isfinite(terms)):
            raise NonConvergenceError(f"qubit series overflowed at order {n}")
        sums += terms
        small = np.all(np.abs(terms) <= tol * np.maximum(1.0, np.abs(sums)))
        quiet = quiet + 1 if small else 0
        if quiet >= 2:
            return QubitSeriesCoefficients(*sums, n, A_scale)
    raise NonConvergenceError(f"qubit series not converged after {max_terms} terms (k = {k:.3g})")


@dataclass(frozen=True, eq=False)
class QubitFrame:
    """Rotation taking a qubit observable to ``offset * 1 + A_scale * σ3``."""

    offset: float
    A_scale: float
    basis: np.ndarray

    def rotate(self, op) -> np.ndarray:
        return dagger(self.basis) @ np.asarray(op, dtype=complex) @ self.basis


def qubit_frame(A) -> QubitFrame:
    A = require_hermitian(A, "observable")
    if A.shape != (2, 2):
        raise ValueError("qubit observables are 2x2")
    w, v = np.linalg.eigh(A)
    a_plus, a_minus = float(w[1]), float(w[0])
    scale = 0.5 * (a_plus - a_minus)
    if scale <= 1e-14 * max(1.0, abs(a_plus)):
        raise ValueError("observable is proportional to the identity")
    return QubitFrame(0.5 * (a_plus + a_minus), scale, v[:, ::-1].copy())


def _bloch(rho) -> np.ndarray:
    if isinstance(rho, BlochVector):
        return rho.vector
    return BlochVector.from_density(rho).vector


def _density(rho) -> np.ndarray:
    return rho.density() if isinstance(rho, BlochVector) else check_density(rho)


def _retro_bloch(P_f):
    P_f = check_effect(P_f)
    if P_f.shape != (2, 2):
        raise ValueError("qubit post-selection is 2x2")
    trace = float(np.real(np.trace(P_f)))
    if trace <= 0:
        raise DegeneratePostSelectionError(0.0, PROB_FLOOR)
    return bloch_components(P_f / trace), trace


def exact_conditioned_means(
    rho_i, P_f, coeffs: QubitSeriesCoefficients, moments: DetectorMoments, cfg, prob_floor=PROB_FLOOR
) -> ConditionedResponse:
    """Exact conditioned detector means for ``A = A_scale σ3``.

    ``rho_i`` is a :class:`BlochVector` or a density matrix and ``P_f`` a POVM
    element, both written in the eigenbasis of the observable.
    """
    r1, r2, r3 = _bloch(rho_i)
    (f1, f2, f3), trace_f = _retro_bloch(P_f)
    overlap = 1.0 + r1 * f1 + r2 * f2 + r3 * f3  # 2 Tr[rho_f rho_i]
    t1, t2 = coeffs.c * r1 - coeffs.s * r2, coeffs.c * r2 + coeffs.s * r1
    p_tilde = overlap + t1 * f1 + t2 * f2
    prob = 0.5 * p_tilde * trace_f
    if prob <= prob_floor:
        raise DegeneratePostSelectionError(prob, prob_floor)

    def transverse(cc, ss):
        return (cc * r1 - ss * r2) * f1 + (cc * r2 + ss * r1) * f2

    mean_x = (moments.mean_x * overlap + transverse(coeffs.c_x, coeffs.s_x)) / p_tilde
    mean_x += cfg.g * coeffs.A_scale * (r3 + f3) / p_tilde
    mean_p = (moments.mean_p * overlap + transverse(coeffs.c_p, coeffs.s_p)) / p_tilde
    return ConditionedResponse(float(mean_x), float(mean_p), float(prob))


def qubit_conditioned_means(A, rho_i, P_f, moments: DetectorMoments, cfg, tol=SERIES_TOL):
    """Exact conditioned means for any Hermitian qubit observable."""
    frame = qubit_frame(A)
    rho = frame.rotate(_density(rho_i))
    pf = frame.rotate(P_f)
    coeffs = series_coefficients(moments, frame.A_scale, cfg, tol)
    r = exact_conditioned_means(rho, pf, coeffs, moments, cfg)
    return ConditionedResponse(r.mean_x_f + cfg.g * frame.offset, r.mean_p_f, r.post_prob)


def qubit_nonselective_map(A, rho_i, moments: DetectorMoments, cfg, tol=SERIES_TOL) -> np.ndarray:
    """Non-selective measurement of a qubit from the ``c`` and ``s`` series."""
    frame = qubit_frame(A)
    coeffs = series_coefficients(moments, frame.A_scale, cfg, tol)
    r = coeffs.nonselective_bloch(_bloch(frame.rotate(_density(rho_i))))
    rho = 0.5 * (IDENTITY2 + r[0] * SIGMA1 + r[1] * SIGMA2 + r[2] * SIGMA3)
    return frame.basis @ rho @ dagger(frame.basis)


def qubit_weak_value(A_scale, r, f) -> complex:
    """Weak value of ``A_scale σ3`` between Bloch vectors ``r`` (prepared) and ``f`` (retrodicted)."""
    r1, r2, r3 = r
    f1, f2, f3 = f
    denom = 1.0 + r1 * f1 + r2 * f2 + r3 * f3
    if denom <= PROB_FLOOR:
        raise DegeneratePostSelectionError(denom / 2, PROB_FLOOR)
    return A_scale * complex(r3 + f3, r1 * f2 - r2 * f1) / denom


def bloch_vector_field(A_scale, rho) -> np.ndarray:
    """Tangent ``dr/d eps`` of the flow ``exp(-i eps A σ3)`` at the Bloch vector of ``rho``."""
    r1, r2, _ = _bloch(rho)
    return np.array([-2.0 * A_scale * r2, 2.0 * A_scale * r1, 0.0])
