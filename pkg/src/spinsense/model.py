"""Hamiltonians and initial states of the two-qubit sensor model.

The model couples two qubits through an isotropic exchange interaction of
strength ``j`` and, optionally, a uniform magnetic field of strength ``m``
along Z acting on both qubits.  All energies are angular frequencies
(hbar = 1), so ``j``, ``m`` and ``1/t`` share one unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import kron

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SystemParams:
    """Model parameters: mean coupling ``j0``, coupling noise width ``epsilon``,
    field strength ``m``.

    ``epsilon`` is the standard deviation of the Gaussian spread of the
    exchange coupling across experimental runs; ``m`` may be negative even
    though downstream observables only depend on |m|.
    """

    j0: float
    epsilon: float = 0.0
    m: float = 0.0

    def __post_init__(self):
        for name in ("j0", "epsilon", "m"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


def pauli(axis: str) -> np.ndarray:
    """Pauli matrix for axis 'x', 'y' or 'z' (case-insensitive)."""
    try:
        return _PAULI[axis.lower()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None


def exchange_hamiltonian(j: float) -> np.ndarray:
    """Isotropic exchange j*(XX + YY + ZZ).

    Splits the two-qubit space into a triplet with eigenvalue j and a
    singlet with eigenvalue -3j.
    """
    if not math.isfinite(j):
        raise ValueError(f"coupling must be finite, got {j}")
    sx, sy, sz = _PAULI["x"], _PAULI["y"], _PAULI["z"]
    return j * (kron(sx, sx) + kron(sy, sy) + kron(sz, sz))


def field_hamiltonian(m: float) -> np.ndarray:
    """Uniform Z field m*(Z1 + Z2); diagonal (2m, 0, 0, -2m)."""
    if not math.isfinite(m):
        raise ValueError(f"field strength must be finite, got {m}")
    sz = _PAULI["z"]
    return m * (kron(sz, IDENTITY_2) + kron(IDENTITY_2, sz))


def total_hamiltonian(j: float, m: float) -> np.ndarray:
    """Exchange plus field; the two terms commute."""
    return exchange_hamiltonian(j) + field_hamiltonian(m)


def plus_minus_state() -> np.ndarray:
    """|+-> with |+> = (|0>+|1>)/sqrt2 and |-> = (|0>-|1>)/sqrt2.

    Amplitudes (1/2, -1/2, 1/2, -1/2): maximally coherent in the
    computational basis and sensitive to the coupling noise.
    """
    return np.array([0.5, -0.5, 0.5, -0.5], dtype=complex)


def plus_plus_state() -> np.ndarray:
    """|++>, an exchange eigenstate: its dynamics never dephase under
    coupling noise alone."""
    return np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
