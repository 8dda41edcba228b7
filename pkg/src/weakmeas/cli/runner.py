"""Evaluate a scenario across its coupling sweep with every requested method."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DegeneratePostSelectionError, NonConvergenceError, WrapAroundError
from ..gaussian import DecoherenceParams, decohered_weak_value, gaussian_conditioned_means
from ..grid import (
    MomentAccuracyWarning,
    PositionGrid,
    Wavefunction,
    default_grid,
    gaussian_moments,
    gaussian_state,
    moments,
)
from ..qubit import SERIES_CAP, qubit_conditioned_means
from ..vonneumann import CouplingConfig, conditioned_response
from ..weakvalues import linear_response, weak_value
from .config import ScenarioConfig

NUMERIC_COLUMNS = (
    ("g", "length/A"),
    ("post_prob", "1"),
    ("mean_x_f", "length"),
    ("mean_p_f", "hbar/length"),
    ("re_Aw", "A"),
    ("two_im_Aw", "A"),
)
HEADER = ["g [length/A]", "method", "status"] + [
    f"{name} [{unit}]" for name, unit in NUMERIC_COLUMNS[1:]
]


@dataclass(frozen=True)
class ResultRow:
    g: float
    method: str
    status: str
    post_prob: float = math.nan
    mean_x_f: float = math.nan
    mean_p_f: float = math.nan
    re_Aw: float = math.nan
    two_im_Aw: float = math.nan

    def values(self):
        return [self.g, self.method, self.status, self.post_prob, self.mean_x_f,
                self.mean_p_f, self.re_Aw, self.two_im_Aw]


class Scenario:
    """Pointer, grid and moments shared by every sweep point."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        det = cfg.detector
        a_max = float(np.abs(np.linalg.eigvalsh(cfg.observable)).max())
        g_max = max(abs(g) for g in cfg.sweep.values)
        if det.kind == "gaussian":
            grid = default_grid(det.sigma, g_max, a_max, det.grid_points, origin=det.x0)
            self.psi = gaussian_state(grid, det.sigma, det.x0, det.p0, det.hbar)
            self.moments = gaussian_moments(det.sigma, 2 * SERIES_CAP + 1, det.hbar, det.x0, det.p0)
        else:
            grid = PositionGrid(det.grid_points, det.dx, det.origin)
            self.psi = Wavefunction.from_samples(grid, det.samples, det.hbar)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", MomentAccuracyWarning)
                self.moments = moments(self.psi, 2 * SERIES_CAP + 1)

    def evaluate(self, g, method) -> ResultRow:
        cfg = self.cfg
        det = cfg.detector
        coupling = CouplingConfig(g, det.hbar)
        try:
            if method == "gaussian-exact":
                params = DecoherenceParams(g, det.sigma, det.hbar)
                wv = decohered_weak_value(cfg.observable, cfg.rho_i, cfg.post_selection, params)
                res = gaussian_conditioned_means(
                    cfg.observable, cfg.rho_i, cfg.post_selection, params, det.x0
                )
                return ResultRow(g, method, "ok", res.post_prob, res.mean_x_f, res.mean_p_f, wv.re, wv.two_im)
            try:
                wv = weak_value(cfg.observable, cfg.rho_i, cfg.post_selection)
                re_w, two_im_w = wv.re, wv.two_im
            except DegeneratePostSelectionError:
                # the interaction can make an orthogonal selection possible; only
                # the weak-value columns are undefined then
                if method == "linear-response":
                    raise
                re_w, two_im_w = math.nan, math.nan
            if method == "oracle":
                res = conditioned_response(cfg.rho_i, self.psi, cfg.observable, cfg.post_selection, coupling)
                prob, mx, mp = res.post_prob, res.mean_x_f, res.mean_p_f
            elif method == "qubit-exact":
                res = qubit_conditioned_means(
                    cfg.observable, cfg.rho_i, cfg.post_selection, self.moments, coupling
                )
                prob, mx, mp = res.post_prob, res.mean_x_f, res.mean_p_f
            elif method == "linear-response":
                res = linear_response(cfg.observable, cfg.rho_i, cfg.post_selection, self.moments, coupling)
                prob, mx, mp = wv.post_prob, res.mean_x_f, res.mean_p_f
            else:
                raise ValueError(f"unknown method {method!r}")
            return ResultRow(g, method, "ok", prob, mx, mp, re_w, two_im_w)
        except DegeneratePostSelectionError:
            return ResultRow(g, method, "degenerate")
        except NonConvergenceError:
            return ResultRow(g, method, "non-convergent")
        except WrapAroundError:
            return ResultRow(g, method, "wrap-around")


def run_scenario(cfg: ScenarioConfig, threads=1):
    """All result rows, ordered by coupling value then by the configured method order."""
    scenario = Scenario(cfg)
    tasks = [(g, m) for g in cfg.sweep.values for m in cfg.methods]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda t: scenario.evaluate(*t), tasks))
    return [scenario.evaluate(g, m) for g, m in tasks]
