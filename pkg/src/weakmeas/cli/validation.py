"""Randomised property checks run by ``weakmeas validate``."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..bohmian import central_mass_mask, momentum_weak_value_field
from ..gaussian import (
    DecoherenceParams,
    decohered_state,
    dephasing_series,
    gaussian_conditioned_means,
)
from ..grid import default_grid, gaussian_moments, gaussian_state
from ..operators import SIGMA3, pure_state
from ..qubit import qubit_conditioned_means
from ..sampling import (
    random_bloch,
    random_density,
    random_hermitian,
    random_pointer,
    random_projector,
)
from ..vonneumann import (
    CouplingConfig,
    MeasurementMaps,
    conditioned_response,
    momentum_povm,
    position_povm,
)
from ..weakvalues import log_directional_derivative, weak_value

SUITES = ("povm", "weakvalue", "qubit", "gaussian", "bohmian", "retro")
REPORT_SCHEMA = "weakmeas.validation/1"


@dataclass
class Check:
    suite: str
    name: str
    tolerance: float
    observed: float
    seed: int
    passed: bool = False


def _povm(rng):
    out = []
    for case in range(20):
        d = int(rng.integers(2, 5))
        A = random_hermitian(rng, d)
        g = float(rng.uniform(-1.5, 1.5))
        a_max = float(np.abs(np.linalg.eigvalsh(A)).max())
        psi = random_pointer(rng, g, a_max)
        cfg = CouplingConfig(g)
        E = position_povm(psi, A, cfg).sum(axis=0) * psi.grid.dx
        _, F = momentum_povm(psi, A, cfg)
        F = F.sum(axis=0) * psi.grid.dp()
        dev = max(np.abs(E - np.eye(d)).max(), np.abs(F - np.eye(d)).max())
        out.append((f"completeness[{case}]", 1e-8, dev))
    return out


def _weakvalue(rng):
    out = []
    plus_x, plus_y = pure_state([1, 1]), pure_state([1, 1j])
    wv = weak_value(SIGMA3, plus_x, plus_y)
    out.append(("aav_two_im", 1e-12, abs(wv.two_im - 2.0)))
    out.append(("aav_re", 1e-12, abs(wv.re)))
    for case in range(20):
        d = 2 if case % 2 == 0 else 3
        A, rho, P = random_hermitian(rng, d), random_density(rng, d), random_projector(rng, d)
        an = log_directional_derivative(A, rho, P)
        fd = log_directional_derivative(A, rho, P, mode="finite_difference")
        out.append((f"log_derivative[{case}]", 1e-7, abs(an - fd)))
    return out


def _qubit(rng):
    out = []
    for ag in (0.1, 1.0, 3.0):
        grid = default_grid(1.0, ag, 1.0, 2048)
        psi = gaussian_state(grid, 1.0)
        mom = gaussian_moments(1.0, 81)
        cfg = CouplingConfig(ag)
        for case in range(3):
            rho = random_bloch(rng).density()
            P = random_projector(rng, 2)
            o = conditioned_response(rho, psi, SIGMA3, P, cfg)
            q = qubit_conditioned_means(SIGMA3, rho, P, mom, cfg)
            dev = max(abs(o.mean_x_f - q.mean_x_f), abs(o.mean_p_f - q.mean_p_f))
            out.append((f"exact_vs_oracle[Ag={ag:g},{case}]", 1e-6, dev))
    return out


def _gaussian(rng):
    out = []
    for gs in (0.01, 0.1, 1.0, 3.0):
        for d in (2, 3):
            A = random_hermitian(rng, d)
            a_max = float(np.abs(np.linalg.eigvalsh(A)).max())
            psi = gaussian_state(default_grid(1.0, gs, a_max, 2048), 1.0)
            rho, P = random_density(rng, d), random_projector(rng, d)
            o = conditioned_response(rho, psi, A, P, CouplingConfig(gs))
            q = gaussian_conditioned_means(A, rho, P, DecoherenceParams(gs, 1.0))
            dev = max(abs(o.mean_x_f - q.mean_x_f), abs(o.mean_p_f - q.mean_p_f))
            out.append((f"all_orders_vs_oracle[g={gs:g},d={d}]", 1e-6, dev))
    for case in range(5):
        A, rho = random_hermitian(rng, 3), random_density(rng, 3)
        eps = float(rng.uniform(0, 1))
        dev = np.abs(decohered_state(A, rho, eps) - dephasing_series(A, rho, eps)).max()
        out.append((f"lindblad_series[{case}]", 1e-10, dev))
        e1, e2 = rng.uniform(0, 1, size=2)
        comp = decohered_state(A, decohered_state(A, rho, e1), e2)
        out.append((f"semigroup[{case}]", 1e-12, np.abs(comp - decohered_state(A, rho, e1 + e2)).max()))
    return out


def _bohmian(rng):
    out = []
    for n in (1024, 2048):
        k0 = float(rng.uniform(0.5, 2.0))
        psi = gaussian_state(default_grid(1.0, n_points=n), 1.0, p0=k0)
        pw = momentum_weak_value_field(psi)
        mask = central_mass_mask(psi)
        x = psi.grid.x[mask]
        out.append((f"bohm_momentum[N={n}]", 1e-6, np.abs(pw.real[mask] - k0).max() / k0))
        out.append(
            (f"osmotic[N={n}]", 1e-5, np.abs(2 * pw.imag[mask] - x).max() / np.abs(x).max())
        )
    return out


def _retro(rng):
    out = []
    for case in range(10):
        d = int(rng.integers(2, 4))
        A = random_hermitian(rng, d)
        g = float(rng.uniform(0.1, 2.0))
        a_max = float(np.abs(np.linalg.eigvalsh(A)).max())
        psi = random_pointer(rng, g, a_max)
        maps = MeasurementMaps(psi, A, CouplingConfig(g))
        rho, P = random_density(rng, d), random_projector(rng, d)
        pre = maps.conditioned_means(rho, P)
        retro = maps.retrodictive_means(rho, P)
        dev = max(abs(pre.mean_x_f - retro.mean_x_f), abs(pre.mean_p_f - retro.mean_p_f))
        out.append((f"retrodictive_means[{case}]", 1e-8, dev))
    return out


_RUNNERS = {
    "povm": _povm,
    "weakvalue": _weakvalue,
    "qubit": _qubit,
    "gaussian": _gaussian,
    "bohmian": _bohmian,
    "retro": _retro,
}


def run_validation(suite="all", seed=0, tolerance_scale=1.0):
    """Run one or all suites and return a JSON-serialisable report."""
    names = SUITES if suite == "all" else (suite,)
    checks = []
    for name in names:
        suite_seed = seed * 1000 + SUITES.index(name)
        rng = np.random.default_rng(suite_seed)
        for label, tol, observed in _RUNNERS[name](rng):
            observed = float(observed)
            limit = tol * tolerance_scale
            ok = math.isfinite(observed) and observed <= limit
            checks.append(Check(name, label, limit, observed, suite_seed, ok))
    return {
        "schema": REPORT_SCHEMA,
        "suite": suite,
        "seed": seed,
        "tolerance_scale": tolerance_scale,
        "passed": all(c.passed for c in checks),
        "n_checks": len(checks),
        "n_failed": sum(not c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
