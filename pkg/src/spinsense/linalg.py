"""Dense complex linear algebra for the 2x2 / 4x4 matrices used throughout.

Everything here is a pure function on small numpy arrays; the basis order of
all 4x4 operators is |00>, |01>, |10>, |11> with qubit 1 as the left
Kronecker factor.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-10


class EigenSystem(NamedTuple):
    """Spectrum of a Hermitian matrix: ascending eigenvalues, orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def hermiticity_defect(a: np.ndarray) -> float:
    """Max elementwise |A - A^dagger|."""
    return float(np.abs(a - a.conj().T).max())


def kron(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices, first factor on the left.

    Block ordering is a11*b ... a22*b, i.e. basis |00>, |01>, |10>, |11>.
    """
    a = _as_complex_matrix(a, "a")
    b = _as_complex_matrix(b, "b")
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"kron expects 2x2 operands, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def eig_hermitian(a, tol: float = HERMITIAN_TOL) -> EigenSystem:
    """Full eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending; each eigenvector's gauge is fixed by
    rotating its first nonzero component to be real and positive, so the
    output is deterministic for a given input.

    Raises:
        ValueError: if the input is not Hermitian within ``tol`` (the max
            asymmetry is reported in the message).
    """
    a = _as_complex_matrix(a)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian: max |A - A^dagger| = {defect:.3e}")
    w, v = np.linalg.eigh(a)
    v = v.astype(complex, copy=True)
    for k in range(v.shape[1]):
        col = v[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            lead = col[nz[0]]
            col *= lead.conjugate() / abs(lead)
    return EigenSystem(eigenvalues=w.astype(float), eigenvectors=v)


def propagator_from_eigs(es: EigenSystem, t: float) -> np.ndarray:
    """Unitary exp(-i H t) assembled from the eigendecomposition of H."""
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    phases = np.exp(-1j * es.eigenvalues * t)
    return (es.eigenvectors * phases) @ es.eigenvectors.conj().T
