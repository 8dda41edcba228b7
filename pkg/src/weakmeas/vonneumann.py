"""Exact simulation of the impulsive von Neumann coupling ``U = exp(g A⊗p / i hbar)``.

Two independent numerical routes are provided:

* :func:`evolve_joint` builds the entangled system-detector amplitudes on the
  grid; conditioned and unconditioned detector statistics then follow by plain
  Riemann-sum quadrature over position or momentum (the brute-force oracle).
* :class:`MeasurementMaps` evaluates the reduced system operations
  (non-selective map, detector averaging operations and their adjoints) from
  overlaps of translated pointer branches in the eigenbasis of ``A``.

In the eigenbasis of ``A`` the branch attached to eigenvalue ``a`` is the pointer
translated by ``g a``.  Translations are exact momentum-space phases, so no
time stepping is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePostSelectionError, GridError
from .grid import (
    DetectorMoments,
    Wavefunction,
    apply_momentum_power,
    check_wrap,
    moments as detector_moments,
    to_momentum,
    translate,
)
from .operators import (
    adjoint_action,
    anticommutator,
    as_operator,
    check_density,
    check_effect,
    dagger,
    ensemble,
    require_hermitian,
)

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class CouplingConfig:
    """Integrated coupling ``g`` (length per unit of A) and ``hbar``."""

    g: float
    hbar: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.g):
            raise ValueError("g must be finite")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")


@dataclass(frozen=True)
class ConditionedResponse:
    mean_x_f: float
    mean_p_f: float
    post_prob: float


def _check_inputs(psi: Wavefunction, A, cfg: CouplingConfig):
    A = require_hermitian(A, "observable")
    if not math.isclose(psi.hbar, cfg.hbar, rel_tol=1e-12):
        raise ValueError(f"pointer hbar {psi.hbar} and coupling hbar {cfg.hbar} differ")
    return A


def _eigensystem(A):
    a, v = np.linalg.eigh(0.5 * (A + dagger(A)))
    return a, v


def branch_amplitudes(psi: Wavefunction, eigenvalues, g, guard=True) -> np.ndarray:
    """Pointer translated by ``g a`` for each eigenvalue ``a``; shape (d, N)."""
    branches = np.stack([translate(psi.amplitudes, psi.grid, g * a) for a in eigenvalues])
    if guard:
        check_wrap(branches, psi.grid)
    return branches


@dataclass(frozen=True, eq=False)
class JointState:
    """Entangled system ⊗ pointer amplitudes for each member of the input ensemble.

    ``amplitudes[m, k, j]`` is the amplitude of system basis state ``k`` and grid
    point ``j`` for ensemble member ``m`` with probability ``weights[m]``.
    """

    grid: object
    hbar: float
    amplitudes: np.ndarray = field(repr=False)
    weights: np.ndarray

    @property
    def system_dim(self) -> int:
        return self.amplitudes.shape[1]

    def momentum_amplitudes(self) -> np.ndarray:
        return to_momentum(self.amplitudes, self.grid, self.hbar)

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=(1, 2)) * self.grid.dx


def evolve_joint(rho_i, psi: Wavefunction, A, cfg: CouplingConfig) -> JointState:
    """Apply the von Neumann unitary to ``rho_i ⊗ |psi><psi|``.

    Mixed ``rho_i`` is propagated as its spectral ensemble of pure states.
    Raises :class:`~weakmeas.errors.WrapAroundError` if a translated branch
    reaches the outer 5% of the grid.
    """
    A = _check_inputs(psi, A, cfg)
    rho_i = check_density(rho_i)
    if rho_i.shape != A.shape:
        raise ValueError("state and observable dimensions differ")
    a, v = _eigensystem(A)
    branches = branch_amplitudes(psi, a, cfg.g)
    weights, kets = ensemble(rho_i)
    coeffs = kets @ np.conj(v)  # (m, d) components along eigenvectors
    amps = np.einsum("ka,ma,aj->mkj", v, coeffs, branches)
    return JointState(psi.grid, psi.hbar, amps, weights / weights.sum())


def _post_selection(P_f, d):
    P_f = check_effect(P_f)
    if P_f.shape != (d, d):
        raise ValueError("post-selection and system dimensions differ")
    return P_f


def joint_probabilities(joint: JointState, P_f):
    """Joint densities ``p(x, f)`` and ``p(p, f)``.

    Returns ``(x, p_xf, p, p_pf)`` with momenta sorted ascending.
    """
    P_f = _post_selection(P_f, joint.system_dim)
    amps = joint.amplitudes
    p_xf = np.einsum("m,mkj,kl,mlj->j", joint.weights, np.conj(amps), P_f, amps).real
    mom = joint.momentum_amplitudes()
    p_pf = np.einsum("m,mkj,kl,mlj->j", joint.weights, np.conj(mom), P_f, mom).real
    p = joint.grid.momenta(joint.hbar)
    order = np.argsort(p)
    return joint.grid.x, p_xf, p[order], p_pf[order]


def conditioned_response(
    rho_i, psi: Wavefunction, A, P_f, cfg: CouplingConfig, prob_floor=PROB_FLOOR
) -> ConditionedResponse:
    """Post-selected detector means by direct quadrature of the joint densities."""
    joint = evolve_joint(rho_i, psi, A, cfg)
    return response_from_joint(joint, P_f, prob_floor)


def response_from_joint(joint: JointState, P_f, prob_floor=PROB_FLOOR) -> ConditionedResponse:
    x, p_xf, p, p_pf = joint_probabilities(joint, P_f)
    dx, dp = joint.grid.dx, joint.grid.dp(joint.hbar)
    prob = float(np.sum(p_xf) * dx)
    if prob <= prob_floor:
        raise DegeneratePostSelectionError(prob, prob_floor)
    mean_x = float(np.sum(x * p_xf) * dx / prob)
    mean_p = float(np.sum(p * p_pf) * dp / float(np.sum(p_pf) * dp))
    return ConditionedResponse(mean_x, mean_p, prob)


def nonselective_map(rho_i, psi: Wavefunction, A, cfg: CouplingConfig) -> np.ndarray:
    """Reduced system state after the interaction with the pointer discarded."""
    joint = evolve_joint(rho_i, psi, A, cfg)
    amps = joint.amplitudes
    return np.einsum("m,mkj,mlj->kl", joint.weights, amps, np.conj(amps)) * joint.grid.dx


def averaging_maps(rho_i, psi: Wavefunction, A, cfg: CouplingConfig):
    """``(X_T(rho_i), P_T(rho_i))``: partial traces of the evolved state against x and p."""
    joint = evolve_joint(rho_i, psi, A, cfg)
    amps = joint.amplitudes
    x = joint.grid.x
    X_T = np.einsum("m,mkj,j,mlj->kl", joint.weights, amps, x, np.conj(amps)) * joint.grid.dx
    mom = joint.momentum_amplitudes()
    p = joint.grid.momenta(joint.hbar)
    P_T = np.einsum("m,mkj,j,mlj->kl", joint.weights, mom, p, np.conj(mom)) * joint.grid.dp(
        joint.hbar
    )
    return X_T, P_T


class MeasurementMaps:
    """System-side operations of one von Neumann measurement, from branch overlaps.

    With ``psi_a`` the pointer translated by ``g a``, the eigenbasis matrix
    elements are

    * non-selective map ``E(O)_ab = O_ab <psi_b|psi_a>``
    * position averaging ``X(O)_ab = O_ab <psi_b|x - g(a+b)/2|psi_a>``
    * momentum averaging ``P(O)_ab = O_ab <psi_b|p|psi_a>``

    and the retrodictive adjoints use the conjugate overlaps.
    """

    def __init__(self, psi: Wavefunction, A, cfg: CouplingConfig, guard=True):
        self.A = _check_inputs(psi, A, cfg)
        self.psi = psi
        self.cfg = cfg
        self.eigenvalues, self.eigenvectors = _eigensystem(self.A)
        br = branch_amplitudes(psi, self.eigenvalues, cfg.g, guard)
        dx = psi.grid.dx
        x = psi.grid.x
        p_br = apply_momentum_power(br, psi.grid, 1, cfg.hbar)
        # G[a, b] = <psi_a| . |psi_b>
        self.overlap = np.conj(br) @ br.T * dx
        self.x_overlap = np.conj(br) @ (x * br).T * dx
        self.p_overlap = np.conj(br) @ p_br.T * dx
        a = self.eigenvalues
        self._mid = 0.5 * (a[:, None] + a[None, :])

    def _to_eigen(self, op):
        v = self.eigenvectors
        return dagger(v) @ as_operator(op) @ v

    def _from_eigen(self, op):
        v = self.eigenvectors
        return v @ op @ dagger(v)

    def nonselective(self, op) -> np.ndarray:
        return self._from_eigen(self._to_eigen(op) * self.overlap.T)

    def position_average(self, op) -> np.ndarray:
        g = self.cfg.g
        return self._from_eigen(self._to_eigen(op) * (self.x_overlap - g * self._mid * self.overlap).T)

    def momentum_average(self, op) -> np.ndarray:
        return self._from_eigen(self._to_eigen(op) * self.p_overlap.T)

    def nonselective_adjoint(self, op) -> np.ndarray:
        return self._from_eigen(self._to_eigen(op) * self.overlap)

    def position_average_adjoint(self, op) -> np.ndarray:
        g = self.cfg.g
        return self._from_eigen(self._to_eigen(op) * (self.x_overlap - g * self._mid * self.overlap))

    def momentum_average_adjoint(self, op) -> np.ndarray:
        return self._from_eigen(self._to_eigen(op) * self.p_overlap)

    def conditioned_means(self, rho_i, P_f, prob_floor=PROB_FLOOR) -> ConditionedResponse:
        """Exact post-selected means from the operational correction formulas."""
        rho_i = check_density(rho_i)
        P_f = _post_selection(P_f, rho_i.shape[0])
        prob = float(np.real(np.trace(P_f @ self.nonselective(rho_i))))
        if prob <= prob_floor:
            raise DegeneratePostSelectionError(prob, prob_floor)
        shift = np.real(np.trace(P_f @ self.nonselective(anticommutator(self.A, rho_i)))) / 2
        mean_x = (np.real(np.trace(P_f @ self.position_average(rho_i))) + self.cfg.g * shift) / prob
        mean_p = np.real(np.trace(P_f @ self.momentum_average(rho_i))) / prob
        return ConditionedResponse(float(mean_x), float(mean_p), prob)

    def retrodictive_means(self, rho_i, P_f, prob_floor=PROB_FLOOR) -> ConditionedResponse:
        """The same means evaluated in the retrodictive picture with ``rho_f = P_f / Tr P_f``."""
        rho_i = check_density(rho_i)
        P_f = _post_selection(P_f, rho_i.shape[0])
        trace_f = float(np.real(np.trace(P_f)))
        if trace_f <= 0:
            raise DegeneratePostSelectionError(0.0, prob_floor)
        rho_f = P_f / trace_f
        e_star = self.nonselective_adjoint(rho_f)
        overlap = float(np.real(np.trace(e_star @ rho_i)))
        prob = overlap * trace_f
        if prob <= prob_floor:
            raise DegeneratePostSelectionError(prob, prob_floor)
        shift = np.real(np.trace(anticommutator(e_star, self.A) @ rho_i)) / 2
        mean_x = (np.real(np.trace(self.position_average_adjoint(rho_f) @ rho_i)) + self.cfg.g * shift) / overlap
        mean_p = np.real(np.trace(self.momentum_average_adjoint(rho_f) @ rho_i)) / overlap
        return ConditionedResponse(float(mean_x), float(mean_p), prob)


def detector_averaging_ops(rho_i, psi: Wavefunction, A, cfg: CouplingConfig):
    """``(X(rho_i), P(rho_i))``, the detector-symmetrised parts of the averaging maps."""
    maps = MeasurementMaps(psi, A, cfg)
    rho_i = check_density(rho_i)
    return maps.position_average(rho_i), maps.momentum_average(rho_i)


def retrodictive_maps(rho_f, psi: Wavefunction, A, cfg: CouplingConfig):
    """``(E*(rho_f), X*(rho_f), P*(rho_f))`` for a retrodictive state."""
    maps = MeasurementMaps(psi, A, cfg)
    return (
        maps.nonselective_adjoint(rho_f),
        maps.position_average_adjoint(rho_f),
        maps.momentum_average_adjoint(rho_f),
    )


def retrodictive_conditioned_means(rho_i, psi, A, P_f, cfg, prob_floor=PROB_FLOOR):
    return MeasurementMaps(psi, A, cfg).retrodictive_means(rho_i, P_f, prob_floor)


# ---------------------------------------------------------------------------
# Kraus operators, POVMs and the Wigner operator


def _diag_in_basis(v, values):
    return (v * values) @ dagger(v)


def position_kraus_operators(psi: Wavefunction, A, cfg: CouplingConfig) -> np.ndarray:
    """All ``M_x = psi(x - g A)`` on the grid, shape (N, d, d)."""
    A = _check_inputs(psi, A, cfg)
    a, v = _eigensystem(A)
    br = branch_amplitudes(psi, a, cfg.g, guard=False)
    return np.einsum("ka,aj,la->jkl", v, br, np.conj(v))


def kraus_position(psi: Wavefunction, A, cfg: CouplingConfig, x) -> np.ndarray:
    j = psi.grid.index_of(x)
    A = _check_inputs(psi, A, cfg)
    a, v = _eigensystem(A)
    br = branch_amplitudes(psi, a, cfg.g, guard=False)
    return _diag_in_basis(v, br[:, j])


def position_povm(psi: Wavefunction, A, cfg: CouplingConfig) -> np.ndarray:
    """``E_x = M_x^† M_x`` for every grid point, shape (N, d, d)."""
    M = position_kraus_operators(psi, A, cfg)
    return dagger(M) @ M


def momentum_kraus_operators(psi: Wavefunction, A, cfg: CouplingConfig):
    """``(p, N_p)`` with ``N_p = exp(-i g p A / hbar) phi(p)``, momenta sorted."""
    A = _check_inputs(psi, A, cfg)
    a, v = _eigensystem(A)
    p = psi.grid.momenta(cfg.hbar)
    phi = to_momentum(psi.amplitudes, psi.grid, cfg.hbar)
    phases = np.exp(-1j * cfg.g * p[:, None] * a[None, :] / cfg.hbar)  # (N, d)
    N = np.einsum("ka,ja,la->jkl", v, phases * phi[:, None], np.conj(v))
    order = np.argsort(p)
    return p[order], N[order]


def kraus_momentum(psi: Wavefunction, A, cfg: CouplingConfig, p) -> np.ndarray:
    A = _check_inputs(psi, A, cfg)
    k = psi.grid.momentum_index_of(p, cfg.hbar)
    a, v = _eigensystem(A)
    p_k = psi.grid.momenta(cfg.hbar)[k]
    phi = to_momentum(psi.amplitudes, psi.grid, cfg.hbar)[k]
    return _diag_in_basis(v, np.exp(-1j * cfg.g * p_k * a / cfg.hbar) * phi)


def momentum_povm(psi: Wavefunction, A, cfg: CouplingConfig):
    p, N = momentum_kraus_operators(psi, A, cfg)
    return p, dagger(N) @ N


def kraus_from_position_transform(psi: Wavefunction, A, cfg: CouplingConfig):
    """``N_p`` obtained by Fourier transforming the stack of ``M_x``; momenta sorted."""
    M = position_kraus_operators(psi, A, cfg)
    N = to_momentum(np.moveaxis(M, 0, -1), psi.grid, cfg.hbar)
    N = np.moveaxis(N, -1, 0)
    p = psi.grid.momenta(cfg.hbar)
    order = np.argsort(p)
    return p[order], N[order]


WIGNER_EDGE_ATOL = 1e-10


def _wigner_branch_values(branches, grid, hbar, j, p_values):
    """Discrete Wigner transform of each branch at grid index ``j`` for momenta ``p_values``."""
    n = grid.n_points
    half = min(j, n - 1 - j)
    m = np.arange(-half, half + 1)
    prod = np.conj(branches[:, j + m]) * branches[:, j - m]  # (d, 2*half+1)
    phase = np.exp(2j * np.outer(p_values, m) * grid.dx / hbar)  # (P, M)
    return (prod @ phase.T) * grid.dx / (np.pi * hbar)  # (d, P)


def wigner_period(grid, hbar=1.0):
    """The discrete Wigner operator is periodic in p with this period."""
    return np.pi * hbar / grid.dx


def wigner_operator(psi: Wavefunction, A, cfg: CouplingConfig, x, p) -> np.ndarray:
    """``W_{x,p} = (1/pi hbar) ∫ dy exp(2ipy/hbar) M_{x+y}^† M_{x-y}`` by grid quadrature.

    ``y`` runs over grid multiples of ``dx`` as far as both ``x ± y`` stay on the
    grid; a :class:`GridError` is raised when the pointer is not negligible at
    the window edge.
    """
    return wigner_operators(psi, A, cfg, x, np.atleast_1d(p))[0]


def wigner_operators(psi: Wavefunction, A, cfg: CouplingConfig, x, p_values) -> np.ndarray:
    """Wigner operators at one position for several momenta, shape (P, d, d)."""
    A = _check_inputs(psi, A, cfg)
    j = psi.grid.index_of(x)
    a, v = _eigensystem(A)
    br = branch_amplitudes(psi, a, cfg.g, guard=False)
    half = min(j, psi.grid.n_points - 1 - j)
    edge = np.abs(np.conj(br[:, j + half]) * br[:, j - half]).max()
    if edge > WIGNER_EDGE_ATOL * np.abs(br).max() ** 2:
        raise GridError("Wigner quadrature window does not cover the pointer support")
    w = _wigner_branch_values(br, psi.grid, cfg.hbar, j, np.asarray(p_values, dtype=float))
    return np.einsum("ka,ap,la->pkl", v, w, np.conj(v))


def wigner_position_marginal(psi: Wavefunction, A, cfg: CouplingConfig, x) -> np.ndarray:
    """``∫ dp W_{x,p}`` over one period of the discrete Wigner operator."""
    grid = psi.grid
    n = grid.n_points
    dp = grid.dp(cfg.hbar)
    p = dp * (np.arange(n // 2) - n // 4)
    return wigner_operators(psi, A, cfg, x, p).sum(axis=0) * dp


def wigner_momentum_marginal(psi: Wavefunction, A, cfg: CouplingConfig, p) -> np.ndarray:
    """``∫ dx W_{x,p}`` by summing the discrete Wigner operator over the grid."""
    A = _check_inputs(psi, A, cfg)
    a, v = _eigensystem(A)
    br = branch_amplitudes(psi, a, cfg.g, guard=False)
    total = np.zeros(len(a), dtype=complex)
    for j in range(psi.grid.n_points):
        total += _wigner_branch_values(br, psi.grid, cfg.hbar, j, np.array([p]))[:, 0]
    return _diag_in_basis(v, total * psi.grid.dx)


def contextual_values_reconstruction(psi: Wavefunction, A, cfg: CouplingConfig, values=None):
    """Average the position POVM against contextual values.

    By default the values are ``(x - <x>_0)/g``, which reconstructs ``A``.
    ``values="raw"`` averages the bare positions, giving ``<x>_0 1 + g A``.
    """
    E = position_povm(psi, A, cfg)
    x = psi.grid.x
    if values == "raw":
        weights = x
    elif values is None:
        if cfg.g == 0:
            raise ZeroDivisionError("contextual values (x - <x>_0)/g need g != 0")
        mean_x = float(np.sum(x * psi.density()) * psi.grid.dx)
        weights = (x - mean_x) / cfg.g
    else:
        raise ValueError("values must be None or 'raw'")
    return np.einsum("j,jkl->kl", weights, E) * psi.grid.dx


# ---------------------------------------------------------------------------
# Perturbative expansion in g


def expansion_terms(rho_i, pointer, A, n, cfg: CouplingConfig):
    """Order-``n`` terms of the expansions of ``E``, ``X`` and ``P`` in powers of g.

    ``pointer`` is a :class:`Wavefunction` or precomputed :class:`DetectorMoments`.
    Each term is ``(g / i hbar)^n / n!`` times a detector moment times
    ``(ad A)^n (rho_i)``.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    if isinstance(pointer, DetectorMoments):
        mom = pointer
        if mom.max_order < n + 1:
            raise ValueError(f"moments up to order {n + 1} are required")
    else:
        mom = detector_moments(pointer, max(n + 1, 2), check_resolution=False)
    A = require_hermitian(A, "observable")
    rho_i = as_operator(rho_i)
    coef = (cfg.g / (1j * cfg.hbar)) ** n / math.factorial(n)
    ad = adjoint_action(A, rho_i, n)
    return coef * mom.p(n) * ad, coef * mom.sym(n) * ad, coef * mom.p(n + 1) * ad


def expansion_partial_sums(rho_i, pointer, A, max_order, cfg: CouplingConfig):
    """Partial sums of the three expansions through ``max_order`` inclusive."""
    if not isinstance(pointer, DetectorMoments):
        pointer = detector_moments(pointer, max_order + 1, check_resolution=False)
    total = [np.zeros_like(as_operator(rho_i)) for _ in range(3)]
    for n in range(max_order + 1):
        for acc, term in zip(total, expansion_terms(rho_i, pointer, A, n, cfg)):
            acc += term
    return tuple(total)


def polar_split(psi: Wavefunction, A, cfg: CouplingConfig, x):
    """Split ``M_x = U_x |E_x|^{1/2}`` into its unitary phase and positive part.

    The phase is ``exp(i arg psi(x - g A))``, taken as 1 where the pointer vanishes.
    """
    A = _check_inputs(psi, A, cfg)
    j = psi.grid.index_of(x)
    a, v = _eigensystem(A)
    vals = branch_amplitudes(psi, a, cfg.g, guard=False)[:, j]
    mag = np.abs(vals)
    phase = np.where(mag > 0, vals / np.where(mag > 0, mag, 1.0), 1.0)
    return _diag_in_basis(v, phase), _diag_in_basis(v, mag.astype(complex))
