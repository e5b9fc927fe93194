"""
Statevector simulation of the hardware-efficient trial state.

Amplitudes are indexed big-endian: qubit q (1-based) is bit m - q of the
basis index. Gates act in place on the state's amplitude array.
"""

import logging
from enum import Enum
from functools import lru_cache

import numpy as np

from models.pauli_core import PHASES, PauliTerm, pauli_action, parity
from utils.errors import NonHermitianError, SimulationError

logger = logging.getLogger(__name__)

MAX_QUBITS = 24
NORM_TOL = 1e-10
IMAG_TOL = 1e-9

_AXIS_MATRICES = {
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}


class EntanglerKind(Enum):
    CNOT_CHAIN = 'cnot_chain'
    CNOT_PAIRS = 'cnot_pairs'
    CM_NOT = 'cm_not'
    PST_M = 'pst_m'
    ISWAP_2 = 'iswap_2'

    @classmethod
    def parse(cls, name):
        """Accept 'cnot_chain', 'CNOT_CHAIN' or the CamelCase 'CnotChain'"""
        if isinstance(name, cls):
            return name
        key = str(name).strip().replace('-', '_')
        for kind in cls:
            camel = ''.join(part.capitalize() for part in kind.value.split('_'))
            if key.lower() in (kind.value, kind.name.lower()) or key == camel:
                return kind
        raise SimulationError(f"unknown entangler {name!r}")

    @property
    def camel_name(self):
        return ''.join(part.capitalize() for part in self.value.split('_'))


class StateVector:
    """2^m complex amplitudes of an m-qubit pure state"""

    def __init__(self, amplitudes, num_qubits=None, check_norm=True):
        amplitudes = np.array(amplitudes, dtype=complex).ravel()
        dim = amplitudes.size
        m = dim.bit_length() - 1
        if dim < 2 or 2 ** m != dim:
            raise SimulationError(f"state length {dim} is not 2^m with m >= 1")
        if num_qubits is not None and num_qubits != m:
            raise SimulationError(f"state of length {dim} does not hold {num_qubits} qubits")
        if check_norm and abs(np.linalg.norm(amplitudes) - 1.0) > NORM_TOL:
            raise SimulationError(f"state norm {np.linalg.norm(amplitudes):.12f} is not 1")
        self.amplitudes = amplitudes
        self.num_qubits = m

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        return f"StateVector(m={self.num_qubits}, norm={self.norm():.12f})"


@lru_cache(maxsize=None)
def _basis_indices(m):
    indices = np.arange(2 ** m, dtype=np.int64)
    indices.setflags(write=False)
    return indices


def _check_qubit(s, q):
    if not 1 <= q <= s.num_qubits:
        raise SimulationError(f"qubit {q} outside 1..{s.num_qubits}")


def init_vacuum(m):
    if not 1 <= m <= MAX_QUBITS:
        raise SimulationError(f"qubit count {m} outside 1..{MAX_QUBITS}")
    amplitudes = np.zeros(2 ** m, dtype=complex)
    amplitudes[0] = 1.0
    return StateVector(amplitudes, m)


def rotation_matrix(axis, phi):
    """R(phi) = cos(phi/2) I - i sin(phi/2) sigma"""
    if axis not in _AXIS_MATRICES:
        raise SimulationError(f"rotation axis must be X, Y or Z, got {axis!r}")
    return np.cos(phi / 2) * np.eye(2) - 1j * np.sin(phi / 2) * _AXIS_MATRICES[axis]


def apply_single_qubit(s, q, matrix):
    _check_qubit(s, q)
    m = s.num_qubits
    view = s.amplitudes.reshape(2 ** (q - 1), 2, 2 ** (m - q))
    s.amplitudes = np.einsum('ab,ibj->iaj', matrix, view).reshape(-1)
    return s


def apply_rotation(s, q, axis, phi):
    return apply_single_qubit(s, q, rotation_matrix(axis, phi))


# Entanglers as basis permutations with phases

def _cnot(image, control, target, m):
    control_bit = 1 << (m - control)
    target_bit = 1 << (m - target)
    return np.where(image & control_bit, image ^ target_bit, image)


@lru_cache(maxsize=None)
def entangler_permutation(kind, m):
    """
    (image, phases) with U|b> = phases[b] |image[b]>

    Every entangler here is a monomial matrix, so this pair is the whole gate.
    """
    if m < 2:
        raise SimulationError(f"entanglers need at least 2 qubits, got {m}")
    indices = np.arange(2 ** m, dtype=np.int64)
    image = indices.copy()
    phases = np.ones(2 ** m, dtype=complex)

    if kind is EntanglerKind.CNOT_CHAIN:
        for q in range(1, m):
            image = _cnot(image, q, q + 1, m)
    elif kind is EntanglerKind.CNOT_PAIRS:
        for i in range(1, m + 1):
            for j in range(i + 1, m + 1):
                image = _cnot(image, i, j, m)
    elif kind is EntanglerKind.CM_NOT:
        control_bit = 1 << (m - 1)
        image = np.where(indices & control_bit, indices ^ (control_bit - 1), indices)
    elif kind is EntanglerKind.PST_M:
        image = np.zeros_like(indices)
        for q in range(1, m + 1):
            image |= ((indices >> (m - q)) & 1) << (q - 1)
        phases[:] = 1j
    elif kind is EntanglerKind.ISWAP_2:
        controls = ((1 << m) - 1) ^ 0b11
        active = (indices & controls) == controls
        low, high = indices & 1, (indices >> 1) & 1
        swapped = (indices & ~0b11) | (low << 1) | high
        image = np.where(active, swapped, indices)
        phases[active] = 1j
    else:
        raise SimulationError(f"unsupported entangler {kind!r}")

    image.setflags(write=False)
    phases.setflags(write=False)
    return image, phases


def apply_entangler(s, kind):
    kind = EntanglerKind.parse(kind)
    image, phases = entangler_permutation(kind, s.num_qubits)
    out = np.empty_like(s.amplitudes)
    out[image] = phases * s.amplitudes
    s.amplitudes = out
    return s


def entangler_matrix(kind, m):
    """Dense unitary of an entangler"""
    image, phases = entangler_permutation(EntanglerKind.parse(kind), m)
    matrix = np.zeros((2 ** m, 2 ** m), dtype=complex)
    matrix[image, np.arange(2 ** m)] = phases
    return matrix


# Trial state

def parameter_count(m, d):
    """D = (3d + 2) m"""
    if m < 1 or d < 0:
        raise SimulationError(f"invalid ansatz shape m={m}, d={d}")
    return (3 * d + 2) * m


def split_parameters(theta, m, d):
    """
    View theta as (layer 0, layers 1..d)

    Returns:
        (m x 2 array of X, Z angles; d x m x 3 array of Z, X, Z angles),
        each row in application order
    """
    theta = np.asarray(theta, dtype=float).ravel()
    expected = parameter_count(m, d)
    if theta.size != expected:
        raise SimulationError(
            f"parameter vector has length {theta.size}, expected (3d+2)m = {expected}"
        )
    return theta[:2 * m].reshape(m, 2), theta[2 * m:].reshape(d, m, 3)


def prepare_trial_state(theta, d, kind, m):
    """
    |psi(theta)> from the vacuum

    Layer 0 applies X then Z rotations to every qubit; each later layer
    applies the entangler, then Z, X, Z rotations per qubit. Qubits are
    visited in ascending order.
    """
    first, layers = split_parameters(theta, m, d)
    if d > 0:
        kind = EntanglerKind.parse(kind)
    s = init_vacuum(m)
    for q in range(1, m + 1):
        apply_rotation(s, q, 'X', first[q - 1, 0])
        apply_rotation(s, q, 'Z', first[q - 1, 1])
    for layer in layers:
        apply_entangler(s, kind)
        for q in range(1, m + 1):
            for axis, phi in zip('ZXZ', layer[q - 1]):
                apply_rotation(s, q, axis, phi)
    return s


# Observables

def pauli_apply(s, term):
    """Apply one Pauli string (PauliTerm or axes string) to the state in place"""
    if isinstance(term, str):
        term = PauliTerm(term)
    if term.num_qubits != s.num_qubits:
        raise SimulationError(f"term {term} does not act on {s.num_qubits} qubits")
    flip, phases = pauli_action(term.axes)
    out = np.empty_like(s.amplitudes)
    out[_basis_indices(s.num_qubits) ^ flip] = term.coefficient * phases * s.amplitudes
    s.amplitudes = out
    return s


def expectation(s, h):
    """
    <psi|H|psi> evaluated term by term without forming a dense matrix

    Raises:
        NonHermitianError: H has complex coefficients or the result has an
            imaginary part above 1e-9
    """
    if h.num_qubits != s.num_qubits:
        raise SimulationError(f"Hamiltonian on {h.num_qubits} qubits, state on {s.num_qubits}")
    if not h.is_hermitian:
        raise NonHermitianError("expectation needs a Hermitian PauliSum")
    indices = _basis_indices(s.num_qubits)
    amps = s.amplitudes
    x_masks, z_masks, n_ys, coeffs = h.compiled
    values = np.empty(coeffs.size, dtype=complex)
    for k in range(coeffs.size):
        signs = 1 - 2 * parity(indices & z_masks[k])
        values[k] = PHASES[n_ys[k] % 4] * np.vdot(amps[indices ^ x_masks[k]], signs * amps)
    total = np.sum(coeffs * values)
    if abs(total.imag) > IMAG_TOL:
        raise NonHermitianError(f"expectation has imaginary part {total.imag:.3e}")
    return float(total.real)
