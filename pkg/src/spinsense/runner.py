"""Grid simulation driver shared by the CLI, the demos and the tests.

Produces per-time tables pairing the Monte Carlo columns with their closed
forms, and return-probability series ready for the field estimator.
"""

from __future__ import annotations

import numpy as np

from .estimator import EstimatorConfig
from .model import SystemParams, plus_minus_state
from .noise import NoiseEnsemble, mc_averaged_density_series
from .observables import (
    ObservableSeries,
    analytic_l1_coherence,
    analytic_return_probability,
    l1_coherence,
    return_probability,
)

TABLE_COLUMNS = ("t", "pr_mc", "pr_analytic", "c_raw_mc", "c_norm_mc", "c_norm_analytic")


def simulation_times(t_max: float, n_steps: int) -> np.ndarray:
    """Uniform grid of n_steps points from 0 to t_max (just [0] for one step)."""
    if not t_max > 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    return np.linspace(0.0, t_max, n_steps)


def estimation_times(cfg: EstimatorConfig) -> np.ndarray:
    """Uniform grid with spacing cfg.dt from 0 up to (at most) cfg.t_max."""
    n = int(np.floor(cfg.t_max / cfg.dt + 1e-9)) + 1
    return np.linspace(0.0, (n - 1) * cfg.dt, n)


def simulate_table(
    params: SystemParams,
    times: np.ndarray,
    ensemble: NoiseEnsemble,
    workers: int = 1,
) -> dict[str, np.ndarray]:
    """Per-time observables of the |+-> protocol, Monte Carlo next to closed form.

    Returns a column dict keyed by `TABLE_COLUMNS`: the MC return
    probability and raw/normalized coherence computed from the run-averaged
    state, plus the closed-form return probability and normalized coherence.
    """
    times = np.asarray(times, dtype=float)
    psi0 = plus_minus_state()
    rhos = mc_averaged_density_series(params, times, ensemble, psi0, workers=workers)
    pr_mc = np.empty(times.size)
    c_raw_mc = np.empty(times.size)
    for i in range(times.size):
        pr_mc[i] = return_probability(rhos[i], psi0)
        c_raw_mc[i] = l1_coherence(rhos[i])
    return {
        "t": times,
        "pr_mc": pr_mc,
        "pr_analytic": np.atleast_1d(analytic_return_probability(params, times)),
        "c_raw_mc": c_raw_mc,
        "c_norm_mc": c_raw_mc / 3.0,
        "c_norm_analytic": np.atleast_1d(analytic_l1_coherence(params, times)),
    }


def return_probability_series(
    params: SystemParams,
    times: np.ndarray,
    ensemble: NoiseEnsemble | None = None,
    source: str = "analytic",
    workers: int = 1,
) -> ObservableSeries:
    """Return-probability trace of the |+-> protocol, analytic or Monte Carlo."""
    times = np.asarray(times, dtype=float)
    if source == "analytic":
        values = np.atleast_1d(analytic_return_probability(params, times))
    elif source == "mc":
        if ensemble is None:
            raise ValueError("the mc source needs a NoiseEnsemble")
        psi0 = plus_minus_state()
        rhos = mc_averaged_density_series(params, times, ensemble, psi0, workers=workers)
        values = np.array([return_probability(rho, psi0) for rho in rhos])
    else:
        raise ValueError(f"source must be 'analytic' or 'mc', got {source!r}")
    return ObservableSeries(times, values, "return_prob", source)
