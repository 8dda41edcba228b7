"""Complex weak values and the detector response they predict."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePostSelectionError
from .grid import DetectorMoments
from .operators import (
    anticommutator,
    check_density,
    check_effect,
    commutator,
    require_hermitian,
    unitary_flow,
)

PROB_FLOOR = 1e-12
FD_STEP = 1e-5
CONSISTENCY_ATOL = 1e-9


@dataclass(frozen=True)
class WeakValue:
    """Complex weak value together with the post-selection probability it came from."""

    value: complex
    post_prob: float

    def __post_init__(self):
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise ValueError("weak value must be finite")
        if not self.post_prob > 0:
            raise ValueError("post-selection probability must be positive")

    @property
    def re(self) -> float:
        return float(self.value.real)

    @property
    def im(self) -> float:
        return float(self.value.imag)

    @property
    def two_im(self) -> float:
        return 2.0 * float(self.value.imag)


def _inputs(A, rho_i, P_f):
    A = require_hermitian(A, "observable")
    rho_i = check_density(rho_i)
    P_f = check_effect(P_f)
    if not A.shape == rho_i.shape == P_f.shape:
        raise ValueError("observable, state and post-selection dimensions differ")
    return A, rho_i, P_f


def post_selection_probability(rho, P_f) -> float:
    return float(np.real(np.trace(P_f @ rho)))


def weak_value(A, rho_i, P_f, prob_floor=PROB_FLOOR) -> WeakValue:
    """``A_w = Tr[P_f A rho_i] / Tr[P_f rho_i]``.

    The real part is cross-checked against the anticommutator form and the
    imaginary part against the commutator form.
    """
    A, rho_i, P_f = _inputs(A, rho_i, P_f)
    prob = post_selection_probability(rho_i, P_f)
    if prob <= prob_floor:
        raise DegeneratePostSelectionError(prob, prob_floor)
    value = complex(np.trace(P_f @ A @ rho_i)) / prob
    re = float(np.real(np.trace(P_f @ anticommutator(A, rho_i)))) / (2 * prob)
    im = float(np.real(np.trace(-1j * (P_f @ commutator(A, rho_i))))) / (2 * prob)
    scale = max(1.0, abs(value))
    if abs(value.real - re) > CONSISTENCY_ATOL * scale or abs(value.imag - im) > CONSISTENCY_ATOL * scale:
        raise ArithmeticError("weak value parts disagree with commutator forms")
    return WeakValue(complex(re, im), prob)


def pure_weak_value(A, psi_i, psi_f) -> complex:
    """``<psi_f|A|psi_i> / <psi_f|psi_i>`` for state vectors."""
    psi_i = np.asarray(psi_i, dtype=complex).ravel()
    psi_f = np.asarray(psi_f, dtype=complex).ravel()
    overlap = np.vdot(psi_f, psi_i)
    if abs(overlap) ** 2 <= PROB_FLOOR * np.vdot(psi_i, psi_i).real * np.vdot(psi_f, psi_f).real:
        raise DegeneratePostSelectionError(abs(overlap) ** 2, PROB_FLOOR)
    return complex(np.vdot(psi_f, np.asarray(A) @ psi_i) / overlap)


def flowed_probability(A, rho_i, P_f, eps) -> float:
    """``p_f(eps) = Tr[P_f exp(-i eps A) rho_i exp(i eps A)]``."""
    return post_selection_probability(unitary_flow(A, rho_i, eps), P_f)


def log_directional_derivative(
    A, rho_i, P_f, mode="analytic", step=FD_STEP, prob_floor=PROB_FLOOR
) -> float:
    """Derivative of ``ln p_f(eps)`` along the unitary flow generated by ``A`` at ``eps = 0``.

    ``mode="analytic"`` returns ``2 Im A_w``; ``mode="finite_difference"`` uses a
    central difference with the given step.
    """
    if mode == "analytic":
        return weak_value(A, rho_i, P_f, prob_floor).two_im
    if mode != "finite_difference":
        raise ValueError(f"unknown mode {mode!r}")
    if not step > 0:
        raise ValueError("step must be positive")
    A, rho_i, P_f = _inputs(A, rho_i, P_f)
    probs = [flowed_probability(A, rho_i, P_f, e) for e in (-step, 0.0, step)]
    if min(probs) <= prob_floor:
        raise DegeneratePostSelectionError(min(probs), prob_floor)
    return (math.log(probs[2]) - math.log(probs[0])) / (2 * step)


@dataclass(frozen=True)
class LinearResponsePrediction:
    """First-order-in-g conditioned detector means with the coefficients used."""

    mean_x_f: float
    mean_p_f: float
    mean_x0: float
    mean_p0: float
    sym_px0: float
    p2_0: float
    g: float
    hbar: float

    @property
    def coefficients(self):
        return (self.mean_x0, self.mean_p0, self.sym_px0, self.p2_0, self.g, self.hbar)


def linear_response(A, rho_i, P_f, moments: DetectorMoments, cfg) -> LinearResponsePrediction:
    """Conditioned detector means to first order in ``g``.

    The imaginary-part coefficients are the detector covariances
    ``<{p,x}>/2 - <x><p>`` and ``<p^2> - <p>^2``; they reduce to
    ``<{p,x}>/2`` and ``<p^2>`` when the pointer has zero mean momentum.
    """
    if moments.max_order < 2:
        raise ValueError("moments up to order 2 are required")
    wv = weak_value(A, rho_i, P_f)
    x0, p0 = moments.mean_x, moments.mean_p
    sym1, p2 = moments.sym(1), moments.p(2)
    k = cfg.g / cfg.hbar
    mean_x = x0 + k * (sym1 - x0 * p0) * wv.two_im + cfg.g * wv.re
    mean_p = p0 + k * (p2 - p0**2) * wv.two_im
    return LinearResponsePrediction(mean_x, mean_p, x0, p0, sym1, p2, cfg.g, cfg.hbar)


def retrodictive_state(P_f) -> np.ndarray:
    P_f = check_effect(P_f)
    trace = float(np.real(np.trace(P_f)))
    if trace <= 0:
        raise DegeneratePostSelectionError(trace, 0.0)
    return P_f / trace


def retrodictive_weak_value(A, rho_i, P_f, prob_floor=PROB_FLOOR) -> WeakValue:
    """Weak value written with the retrodictive state ``rho_f = P_f / Tr P_f``.

    ``A_w = Tr[rho_f A rho_i] / Tr[rho_f rho_i]``; the reported probability is
    still ``Tr[P_f rho_i]``.
    """
    A, rho_i, P_f = _inputs(A, rho_i, P_f)
    rho_f = retrodictive_state(P_f)
    trace = float(np.real(np.trace(P_f)))
    overlap = post_selection_probability(rho_i, rho_f)
    if overlap * trace <= prob_floor:
        raise DegeneratePostSelectionError(overlap * trace, prob_floor)
    value = complex(np.trace(rho_f @ A @ rho_i)) / overlap
    return WeakValue(value, overlap * trace)


def reversed_flow_derivative(A, rho_i, P_f, step=FD_STEP, prob_floor=PROB_FLOOR) -> float:
    """Central difference of ``ln Tr[flow(A, rho_f, -eps) rho_i]`` at ``eps = 0``.

    Flowing the retrodictive state backwards gives the same derivative as
    flowing the prepared state forwards, so this equals ``2 Im A_w``.
    """
    A, rho_i, P_f = _inputs(A, rho_i, P_f)
    rho_f = retrodictive_state(P_f)
    vals = [
        post_selection_probability(rho_i, unitary_flow(A, rho_f, -e)) for e in (-step, step)
    ]
    if min(vals) * float(np.real(np.trace(P_f))) <= prob_floor:
        raise DegeneratePostSelectionError(min(vals), prob_floor)
    return (math.log(vals[1]) - math.log(vals[0])) / (2 * step)
