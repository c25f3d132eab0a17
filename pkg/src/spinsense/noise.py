"""Quasi-static coupling noise: sampling, Monte Carlo averages, closed forms.

Noise model
-----------
Each experimental run draws one exchange coupling J ~ Normal(j0, epsilon^2)
that stays constant for the whole evolution (quasi-static noise).  Averaging
the evolved state over runs dephases every matrix element that carries a
coupling-dependent phase through the Gaussian characteristic function

    E[exp(i * omega * J)] = exp(i * omega * j0 - omega^2 * epsilon^2 / 2),

which for the exchange phases (omega = 4t) produces the damping envelope
exp(-8 epsilon^2 t^2).

Reproducibility
---------------
Sampling is counter-based: sample k is the k-th output of a Philox stream
keyed by the master seed, turned into a normal deviate through the inverse
CDF.  One uniform is consumed per sample, so sample k is addressable in
O(1) without generating its predecessors, and bulk generation is a single
vectorized draw.  All sample reductions run in fixed-size chunks combined
in index order, so results are bitwise identical regardless of how callers
parallelize around this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .dynamics import (
    check_density_matrix,
    check_pure_state,
    density_from_pure,
    evolve_density,
    propagator_split,
)
from .model import SystemParams, plus_minus_state, total_hamiltonian

# Fixed reduction chunk for sample means; part of the determinism contract.
REDUCTION_CHUNK = 8192

# Uniform draws sit in [0, 1); the inverse normal CDF needs (0, 1).  Clipping
# the single representable zero to 2^-53 biases nothing measurable.
_U_FLOOR = 2.0**-53


@dataclass(frozen=True)
class NoiseEnsemble:
    """Monte Carlo ensemble configuration: sample count and master seed."""

    n_samples: int
    master_seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be a 64-bit unsigned int, got {self.master_seed}")


@lru_cache(maxsize=8)
def _standard_normals(master_seed: int, n_samples: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=master_seed))
    u = gen.random(n_samples)
    z = ndtri(np.maximum(u, _U_FLOOR))
    z.flags.writeable = False
    return z


def sample_couplings(params: SystemParams, ensemble: NoiseEnsemble) -> np.ndarray:
    """All coupling samples of the ensemble, in index order (read-only array)."""
    js = params.j0 + params.epsilon * _standard_normals(ensemble.master_seed, ensemble.n_samples)
    js.flags.writeable = False
    return js


def sample_coupling(params: SystemParams, ensemble: NoiseEnsemble, k: int) -> float:
    """Coupling sample k, computed in O(1) from (master_seed, k).

    Philox emits 4 outputs per counter increment, so advancing the counter
    by k // 4 and drawing k % 4 + 1 uniforms lands exactly on output k of
    the stream that `sample_couplings` consumes.
    """
    if not 0 <= k < ensemble.n_samples:
        raise ValueError(f"sample index {k} out of range [0, {ensemble.n_samples})")
    blocks, offset = divmod(k, 4)
    bitgen = np.random.Philox(key=ensemble.master_seed)
    bitgen.advance(blocks)
    u = np.random.Generator(bitgen).random(offset + 1)[-1]
    return params.j0 + params.epsilon * float(ndtri(max(u, _U_FLOOR)))


def _chunked_mean(values: np.ndarray) -> complex:
    """Mean with a fixed reduction order: per-chunk sums combined in chunk order."""
    n = values.shape[0]
    if n <= REDUCTION_CHUNK:
        return complex(values.sum() / n)
    partials = [values[s : s + REDUCTION_CHUNK].sum() for s in range(0, n, REDUCTION_CHUNK)]
    return complex(np.add.reduce(np.array(partials)) / n)


def phase_mean(js: np.ndarray, omega: float) -> complex:
    """Empirical characteristic function mean(exp(i * omega * J)) over samples."""
    return _chunked_mean(np.exp(1j * omega * js))


def _phase_block(js: np.ndarray, omega_start: float, omega_step: float, count: int) -> np.ndarray:
    """Phase means on `count` grid points starting at omega_start.

    The per-sample phases advance by one complex multiply per grid point
    instead of a fresh exp; the drift over a block stays near 1e-16.
    """
    out = np.empty(count, dtype=complex)
    phases = np.exp(1j * omega_start * js)
    step = np.exp(1j * omega_step * js) if count > 1 else None
    for i in range(count):
        out[i] = _chunked_mean(phases)
        if i + 1 < count:
            phases *= step
    return out


def phase_mean_series(
    js: np.ndarray, omegas: np.ndarray, block: int = 64, workers: int = 1
) -> np.ndarray:
    """`phase_mean` on a uniformly spaced omega grid.

    The grid is processed in independent blocks of `block` points, each
    anchored to a fresh exponential; every block sees the same global grid
    step, so the output is bitwise identical whether the blocks run
    serially or on ``workers`` threads.
    """
    omegas = np.asarray(omegas, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0:
        raise ValueError("omegas must be a non-empty 1-D array")
    if omegas.size > 1:
        steps = np.diff(omegas)
        if np.abs(steps - steps[0]).max() > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("omega grid must be uniformly spaced")
        omega_step = float(steps[0])
    else:
        omega_step = 0.0
    spans = [(s, min(block, omegas.size - s)) for s in range(0, omegas.size, block)]
    if workers > 1 and len(spans) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(lambda sc: _phase_block(js, float(omegas[sc[0]]), omega_step, sc[1]), spans)
            )
    else:
        parts = [_phase_block(js, float(omegas[s]), omega_step, c) for s, c in spans]
    return np.concatenate(parts)


def _assemble_averaged(rho0: np.ndarray, m: float, t: float, z: complex) -> np.ndarray:
    # U rho U^dag = P rho P^dag + Q rho Q^dag + e^{-4iJt} P rho Q^dag + h.c.
    # with U = e^{-iJt} P + e^{3iJt} Q, so the J average only touches z.
    p, q = propagator_split(m, t)
    base = p @ rho0 @ p.conj().T + q @ rho0 @ q.conj().T
    cross = p @ rho0 @ q.conj().T
    return base + z.conjugate() * cross + z * cross.conj().T


def mc_averaged_density(
    params: SystemParams,
    t: float,
    ensemble: NoiseEnsemble,
    psi0: np.ndarray | None = None,
) -> np.ndarray:
    """Monte Carlo run-averaged state (1/N) sum_k U(J_k) |psi0><psi0| U(J_k)^dag.

    The per-run propagator factors into coupling-independent matrices times
    the scalar phases exp(-i J t) and exp(3i J t) (see
    `dynamics.propagator_split`), so the sample average reduces exactly to
    the empirical mean of exp(4i J t); no per-sample matrix work is needed.
    Deterministic in (master_seed, n_samples) with a fixed reduction order.
    """
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    psi0 = plus_minus_state() if psi0 is None else check_pure_state(psi0)
    if params.epsilon == 0.0:
        # Degenerate ensemble: every sample is j0, the average is one evolution.
        return evolve_density(density_from_pure(psi0), total_hamiltonian(params.j0, params.m), t)
    js = sample_couplings(params, ensemble)
    z = phase_mean(js, 4.0 * t)
    rho = _assemble_averaged(density_from_pure(psi0), params.m, t, z)
    return check_density_matrix(rho)


def mc_averaged_density_series(
    params: SystemParams,
    times: np.ndarray,
    ensemble: NoiseEnsemble,
    psi0: np.ndarray | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Stack of `mc_averaged_density` results over a time grid, shape (T, 4, 4).

    The coupling samples are drawn once and shared by every grid point (the
    noise is quasi-static, so a run's coupling does not depend on when it is
    observed).  On a uniform grid the per-point characteristic function is
    evaluated with `phase_mean_series`; its independent blocks may be
    computed by ``workers`` threads, and because each block starts from a
    fresh exponential the output is bitwise identical for any worker count.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D array")
    if not np.all(np.isfinite(times)):
        raise ValueError("times must be finite")
    psi0 = plus_minus_state() if psi0 is None else check_pure_state(psi0)
    if params.epsilon == 0.0:
        return np.stack([mc_averaged_density(params, float(t), ensemble, psi0) for t in times])
    js = sample_couplings(params, ensemble)
    omegas = 4.0 * times
    uniform = times.size > 1 and np.abs(np.diff(omegas) - (omegas[1] - omegas[0])).max() <= 1e-9
    if uniform or times.size == 1:
        zs = phase_mean_series(js, omegas, workers=workers)
    else:
        zs = np.array([phase_mean(js, w) for w in omegas])
    rho0 = density_from_pure(psi0)
    out = np.empty((times.size, 4, 4), dtype=complex)
    for i, (t, z) in enumerate(zip(times, zs)):
        out[i] = check_density_matrix(_assemble_averaged(rho0, params.m, float(t), complex(z)))
    return out


def analytic_averaged_density(params: SystemParams, t: float) -> np.ndarray:
    """Closed form of the run-averaged state for the |+-> initial state.

    Every coupling-sensitive element damps as exp(-8 epsilon^2 t^2); the
    anti-diagonal corners keep the undamped field phases exp(-+ 4i m t) and
    the inner |01>/|10> block stays frozen at +-1/4.  Written for arbitrary
    mean coupling: the closed-form exchange phase is 4 * j0 * t.
    """
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    j0, eps, m = params.j0, params.epsilon, params.m
    envelope = np.exp(-8.0 * eps**2 * t**2)
    damped_hi = envelope * np.exp(-1j * (4.0 * j0 + 2.0 * m) * t)
    damped_lo = envelope * np.exp(1j * (4.0 * j0 - 2.0 * m) * t)
    corner = np.exp(-4j * m * t)
    rho = np.array(
        [
            [1.0, -damped_hi, damped_hi, -corner],
            [-damped_hi.conjugate(), 1.0, -1.0, damped_lo],
            [damped_hi.conjugate(), -1.0, 1.0, -damped_lo],
            [-corner.conjugate(), damped_lo.conjugate(), -damped_lo.conjugate(), 1.0],
        ]
    ) / 4.0
    return rho
