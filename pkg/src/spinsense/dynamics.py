"""State evolution under a fixed Hamiltonian.

Two independent propagator routes are kept side by side on purpose: the
eigendecomposition route (`linalg.propagator_from_eigs`) works for any
Hermitian generator, while `analytic_propagator` writes out the closed form
that the block structure of the exchange-plus-field Hamiltonian admits.
Each one cross-checks the other in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import eig_hermitian, hermiticity_defect, propagator_from_eigs

TRACE_TOL = 1e-12
HERM_TOL = 1e-12
PSD_TOL = 1e-10
PURITY_TOL = 1e-10


def check_pure_state(psi, tol: float = 1e-12) -> np.ndarray:
    """Validate a 4-component state vector; returns it as a complex array."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise ValueError(f"state vector must have 4 amplitudes, got shape {psi.shape}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state vector is not normalized: |psi|^2 = {norm2!r}")
    return psi


def check_density_matrix(rho) -> np.ndarray:
    """Validate the two-qubit density-matrix invariants.

    Hermitian within 1e-12, unit trace within 1e-12, eigenvalues >= -1e-10
    and purity in [1/4 - 1e-10, 1 + 1e-10].  Returns the validated array.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got shape {rho.shape}")
    defect = hermiticity_defect(rho)
    if defect > HERM_TOL:
        raise ValueError(f"density matrix not Hermitian: max asymmetry {defect:.3e}")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace must be 1, got {trace!r}")
    lo = float(np.linalg.eigvalsh(rho).min())
    if lo < -PSD_TOL:
        raise ValueError(f"density matrix not PSD: min eigenvalue {lo:.3e}")
    purity = float(np.trace(rho @ rho).real)
    if not (0.25 - PURITY_TOL <= purity <= 1.0 + PURITY_TOL):
        raise ValueError(f"purity {purity!r} outside [1/4, 1]")
    return rho


def density_from_pure(psi) -> np.ndarray:
    """Outer product |psi><psi| of a normalized state vector."""
    psi = check_pure_state(psi)
    return np.outer(psi, psi.conj())


def evolve_density(rho0, h, t: float) -> np.ndarray:
    """Conjugate rho0 by exp(-i h t) using the eigendecomposition route."""
    rho0 = check_density_matrix(rho0)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    u = propagator_from_eigs(eig_hermitian(h), t)
    return u @ rho0 @ u.conj().T


def analytic_propagator(j: float, m: float, t: float) -> np.ndarray:
    """Closed-form exp(-i H t) for exchange coupling j plus Z field m.

    Corner phases are exp(-i (j +/- 2m) t); the central block mixes |01> and
    |10> through (exp(-i j t) +/- exp(3i j t))/2.  Equals the
    eigendecomposition route to ~1e-15.
    """
    for name, value in (("j", j), ("m", m), ("t", t)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value}")
    singlet = np.exp(3j * j * t)
    triplet = np.exp(-1j * j * t)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = np.exp(-1j * (j + 2.0 * m) * t)
    u[3, 3] = np.exp(-1j * (j - 2.0 * m) * t)
    u[1, 1] = u[2, 2] = 0.5 * (triplet + singlet)
    u[1, 2] = u[2, 1] = 0.5 * (triplet - singlet)
    return u


def propagator_split(m: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Factor the propagator as exp(-i j t)*P + exp(3i j t)*Q.

    P and Q depend only on (m, t); the coupling enters purely through the
    two scalar phases.  This is what makes ensemble averages over a random
    coupling reduce to one scalar characteristic function.
    """
    p = np.zeros((4, 4), dtype=complex)
    p[0, 0] = np.exp(-2j * m * t)
    p[3, 3] = np.exp(2j * m * t)
    p[1, 1] = p[2, 2] = p[1, 2] = p[2, 1] = 0.5
    q = np.zeros((4, 4), dtype=complex)
    q[1, 1] = q[2, 2] = 0.5
    q[1, 2] = q[2, 1] = -0.5
    return p, q
