"""
Exact diagonalization oracle for small PauliSums.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from models.pauli_core import to_dense
from utils.errors import NonHermitianError, PauliAlgebraError

logger = logging.getLogger(__name__)

MAX_EXACT_QUBITS = 12
RESIDUAL_TOL = 1e-8
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Sorted eigenvalues of a Hamiltonian and its lowest eigenvector"""

    eigenvalues: np.ndarray
    ground_energy: float
    ground_state: np.ndarray
    dimension: int

    def to_dict(self, include_spectrum=False):
        result = {'ground_energy': self.ground_energy, 'dimension': self.dimension}
        if include_spectrum:
            result['eigenvalues'] = [float(e) for e in self.eigenvalues]
        return result


def ground_energy(h, max_qubits=MAX_EXACT_QUBITS):
    """
    Full spectrum of ``h`` by dense Hermitian eigensolve

    Args:
        h: Hermitian PauliSum
        max_qubits: dense size guard

    Returns:
        SpectrumResult
    """
    m = h.num_qubits
    if m > max_qubits:
        raise PauliAlgebraError(f"exact solve limited to {max_qubits} qubits, got {m}")
    if not h.is_hermitian:
        raise NonHermitianError("exact solve needs a Hermitian PauliSum (real coefficients)")

    if m == 0:
        value = float(h.coefficient('').real)
        return SpectrumResult(np.array([value]), value, np.ones(1, dtype=complex), 1)

    matrix = to_dense(h)
    if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOL:
        raise NonHermitianError("dense Hamiltonian is not Hermitian")
    eigenvalues, eigenvectors = eigh(matrix)
    ground_state = eigenvectors[:, 0]
    residual = np.linalg.norm(matrix @ ground_state - eigenvalues[0] * ground_state)
    if residual > RESIDUAL_TOL:
        logger.warning("Ground-state residual %.3e exceeds %.0e", residual, RESIDUAL_TOL)
    logger.debug("Exact ground energy %.12f on %d qubits", eigenvalues[0], m)
    return SpectrumResult(eigenvalues, float(eigenvalues[0]), ground_state, 2 ** m)


def spectrum_gap(result):
    """Energy of the first level above the ground level, 0 when the ground is degenerate"""
    if result.dimension < 2:
        return 0.0
    gap = float(result.eigenvalues[1] - result.eigenvalues[0])
    return gap if gap > HERMITIAN_TOL else 0.0
