"""Closed forms for a real Gaussian pointer of width ``sigma``.

For such a pointer the non-selective measurement is pure dephasing in the
eigenbasis of ``A`` with strength ``eps = (g / 2 sigma)^2``, and the conditioned
detector means to all orders in ``g`` are set by a single complex weak value
taken on the dephased state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePostSelectionError, NonConvergenceError
from .operators import (
    adjoint_action,
    anticommutator,
    as_operator,
    bloch_components,
    check_density,
    check_effect,
    dagger,
    require_hermitian,
)
from .vonneumann import PROB_FLOOR, ConditionedResponse
from .weakvalues import WeakValue


@dataclass(frozen=True)
class DecoherenceParams:
    """Coupling ``g``, pointer width ``sigma`` and ``hbar``; ``epsilon`` is derived."""

    g: float
    sigma: float
    hbar: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.g):
            raise ValueError("g must be finite")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @property
    def epsilon(self) -> float:
        return (self.g / (2.0 * self.sigma)) ** 2

    @property
    def momentum_variance(self) -> float:
        return self.hbar**2 / (4.0 * self.sigma**2)


def lindblad_map(A, rho) -> np.ndarray:
    """``L[A](rho) = A rho A^† - {rho, A^† A}/2``."""
    A, rho = as_operator(A), as_operator(rho)
    return A @ rho @ dagger(A) - 0.5 * anticommutator(rho, dagger(A) @ A)


def _damping(A, eps):
    a, v = np.linalg.eigh(require_hermitian(A, "observable"))
    gap = (a[:, None] - a[None, :]) ** 2
    with np.errstate(invalid="ignore"):
        factor = np.where(gap == 0, 1.0, np.exp(-eps * gap / 2))
    return v, factor


def decohered_state(A, rho_i, eps) -> np.ndarray:
    """``exp(eps L[A])(rho_i)``: eigenbasis element ``(a, b)`` times ``exp(-eps (a-b)^2 / 2)``.

    ``eps = inf`` gives the fully dephased state.
    """
    if not eps >= 0:
        raise ValueError("eps must be non-negative")
    rho_i = as_operator(rho_i)
    v, factor = _damping(A, eps)
    return v @ ((dagger(v) @ rho_i @ v) * factor) @ dagger(v)


def _series_step(A, rho, eps, tol, max_terms):
    total = rho.copy()
    term = rho
    for k in range(1, max_terms + 1):
        term = adjoint_action(A, term, 2) * (-eps / 2) / k
        total = total + term
        if np.abs(term).max() <= tol * max(1.0, np.abs(total).max()):
            return total
    raise NonConvergenceError(f"dephasing series not converged after {max_terms} terms")


def dephasing_series(A, rho_i, eps, tol=1e-16, max_terms=200) -> np.ndarray:
    """``sum_k (-eps/2)^k / k! (ad A)^{2k} (rho_i)`` summed until terms fall below ``tol``.

    The alternating series cancels catastrophically once ``eps ||ad A||^2`` is
    large, so ``eps`` is split into equal steps with ``(eps_step / 2) ||ad A||^2 <= 1``
    and the series is applied once per step.
    """
    if not math.isfinite(eps) or eps < 0:
        raise ValueError("eps must be finite and non-negative")
    A = require_hermitian(A, "observable")
    rho = as_operator(rho_i)
    ad_norm = 2.0 * np.linalg.norm(A, 2)
    steps = max(1, math.ceil(eps * ad_norm**2 / 2))
    for _ in range(steps):
        rho = _series_step(A, rho, eps / steps, tol, max_terms)
    return rho


def gaussian_averaging_ops(A, rho_i, params: DecoherenceParams, x0=0.0):
    """``(E(rho), X(rho), P(rho))`` for the Gaussian pointer.

    ``X`` is ``x0 E(rho)`` (zero for a centred pointer) and
    ``P = (g / i hbar)(hbar^2 / 4 sigma^2) (ad A)(E(rho))``.
    """
    E = decohered_state(A, rho_i, params.epsilon)
    k = params.g / (1j * params.hbar) * params.momentum_variance
    return E, x0 * E, k * adjoint_action(as_operator(A), E)


def decohered_weak_value(A, rho_i, P_f, params: DecoherenceParams, prob_floor=PROB_FLOOR) -> WeakValue:
    """Weak value of ``A`` on the dephased state ``exp(eps L[A])(rho_i)``."""
    A = require_hermitian(A, "observable")
    P_f = check_effect(P_f)
    rho = decohered_state(A, check_density(rho_i), params.epsilon)
    prob = float(np.real(np.trace(P_f @ rho)))
    if prob <= prob_floor:
        raise DegeneratePostSelectionError(prob, prob_floor)
    return WeakValue(complex(np.trace(P_f @ A @ rho)) / prob, prob)


def gaussian_conditioned_means(
    A, rho_i, P_f, params: DecoherenceParams, x0=0.0, prob_floor=PROB_FLOOR
) -> ConditionedResponse:
    """Exact conditioned means for a real Gaussian pointer centred at ``x0``.

    ``mean_x = x0 + g Re A_w(eps)`` and
    ``mean_p = (g / hbar)(hbar^2 / 4 sigma^2) 2 Im A_w(eps)``.
    """
    wv = decohered_weak_value(A, rho_i, P_f, params, prob_floor)
    mean_x = x0 + params.g * wv.re
    mean_p = params.g / params.hbar * params.momentum_variance * wv.two_im
    return ConditionedResponse(float(mean_x), float(mean_p), wv.post_prob)


def _qubit_bloch(rho_i, P_f):
    r = bloch_components(check_density(rho_i))
    P_f = check_effect(P_f)
    trace = float(np.real(np.trace(P_f)))
    if trace <= 0:
        raise DegeneratePostSelectionError(0.0, PROB_FLOOR)
    return r, bloch_components(P_f / trace), trace


def gaussian_qubit_means(A_scale, rho_i, P_f, params: DecoherenceParams, prob_floor=PROB_FLOOR):
    """Closed-form qubit means for ``A = A_scale σ3`` with damping ``exp(-(A g / sigma)^2 / 2)``."""
    (r1, r2, r3), (f1, f2, f3), trace = _qubit_bloch(rho_i, P_f)
    damp = math.exp(-((A_scale * params.g / params.sigma) ** 2) / 2)
    p_tilde = 1 + r3 * f3 + damp * (r1 * f1 + r2 * f2)
    prob = 0.5 * p_tilde * trace
    if prob <= prob_floor:
        raise DegeneratePostSelectionError(prob, prob_floor)
    mean_x = params.g * A_scale * (r3 + f3) / p_tilde
    mean_p = (
        params.g / params.hbar * params.momentum_variance
        * 2 * A_scale * damp * (r1 * f2 - r2 * f1) / p_tilde
    )
    return ConditionedResponse(float(mean_x), float(mean_p), float(prob))


def strong_limit_means(A_scale, rho_i, P_f, params: DecoherenceParams, prob_floor=PROB_FLOOR):
    """Limit of :func:`gaussian_qubit_means` once the transverse coherence is fully damped."""
    (_, _, r3), (_, _, f3), trace = _qubit_bloch(rho_i, P_f)
    p_tilde = 1 + r3 * f3
    prob = 0.5 * p_tilde * trace
    if prob <= prob_floor:
        raise DegeneratePostSelectionError(prob, prob_floor)
    return ConditionedResponse(float(params.g * A_scale * (r3 + f3) / p_tilde), 0.0, float(prob))
