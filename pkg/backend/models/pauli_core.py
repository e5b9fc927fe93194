"""
Pauli string algebra, the symplectic GF(2) encoding and dense conversion.

Qubit 1 is the leftmost tensor factor and the most significant bit of a
basis index (big-endian). Every module in the package follows this.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType

import numpy as np

from utils.errors import NonHermitianError, PauliAlgebraError

logger = logging.getLogger(__name__)

AXES = 'IXYZ'
PRUNE_TOL = 1e-12
MAX_DENSE_QUBITS = 14

# i**k for the stored phase exponent k
PHASES = (1 + 0j, 1j, -1 + 0j, -1j)

PAULI_MATRICES = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (exponent of i, axis) for the single-qubit product a.b
_PRODUCT_TABLE = {
    ('X', 'Y'): (1, 'Z'), ('Y', 'X'): (3, 'Z'),
    ('Y', 'Z'): (1, 'X'), ('Z', 'Y'): (3, 'X'),
    ('Z', 'X'): (1, 'Y'), ('X', 'Z'): (3, 'Y'),
}

_ENCODING = {'I': (0, 0), 'X': (1, 0), 'Y': (1, 1), 'Z': (0, 1)}
_DECODING = {bits: axis for axis, bits in _ENCODING.items()}


def _check_axes(axes):
    if any(axis not in AXES for axis in axes):
        raise PauliAlgebraError(f"invalid axes string {axes!r}")


def _check_same_length(m1, m2):
    if m1 != m2:
        raise PauliAlgebraError(f"qubit count mismatch: {m1} vs {m2}")


@dataclass(frozen=True)
class PauliTerm:
    """Phased Pauli string i**phase * axes[0] (x) ... (x) axes[m-1]"""

    axes: str
    phase: int = 0

    def __post_init__(self):
        if not self.axes:
            raise PauliAlgebraError("a Pauli term needs at least one qubit")
        _check_axes(self.axes)
        object.__setattr__(self, 'phase', int(self.phase) % 4)

    @classmethod
    def from_label(cls, label):
        """
        Parse labels such as 'XZ', '-IY', 'iZZ' or '-iXX'

        Args:
            label: optional phase prefix (+, -, i, +i, -i) followed by axes
        """
        for prefix, phase in (('-i', 3), ('+i', 1), ('i', 1), ('-', 2), ('+', 0)):
            if label.startswith(prefix):
                return cls(label[len(prefix):], phase)
        return cls(label)

    @property
    def num_qubits(self):
        return len(self.axes)

    @property
    def coefficient(self):
        return PHASES[self.phase]

    def is_identity(self):
        return set(self.axes) == {'I'}

    def __mul__(self, other):
        return multiply(self, other)

    def __str__(self):
        prefix = ('', 'i', '-', '-i')[self.phase]
        return f"{prefix}{self.axes}"


@dataclass(frozen=True)
class SymplecticVector:
    """Binary row vector (a_x|a_z) of a Pauli string, phase ignored"""

    x: tuple
    z: tuple

    def __post_init__(self):
        x = tuple(int(bit) & 1 for bit in self.x)
        z = tuple(int(bit) & 1 for bit in self.z)
        if len(x) != len(z):
            raise PauliAlgebraError(
                f"symplectic halves differ in length: {len(x)} vs {len(z)}"
            )
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'z', z)

    @classmethod
    def from_array(cls, bits):
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        if bits.size % 2:
            raise PauliAlgebraError("symplectic vector must have even length")
        m = bits.size // 2
        return cls(tuple(bits[:m]), tuple(bits[m:]))

    @classmethod
    def zeros(cls, num_qubits):
        return cls((0,) * num_qubits, (0,) * num_qubits)

    @property
    def num_qubits(self):
        return len(self.x)

    def to_array(self):
        return np.array(self.x + self.z, dtype=np.uint8)

    def __add__(self, other):
        _check_same_length(self.num_qubits, other.num_qubits)
        return SymplecticVector(
            tuple(a ^ b for a, b in zip(self.x, other.x)),
            tuple(a ^ b for a, b in zip(self.z, other.z)),
        )

    def __str__(self):
        return f"({''.join(map(str, self.x))}|{''.join(map(str, self.z))})"


def encode_symplectic(p):
    """Encode a PauliTerm as (a_x|a_z); the phase is dropped"""
    x, z = zip(*(_ENCODING[axis] for axis in p.axes))
    return SymplecticVector(x, z)


def decode_symplectic(v):
    """Inverse of encode_symplectic with phase +1 (Y where both bits are set)"""
    if v.num_qubits == 0:
        raise PauliAlgebraError("cannot decode an empty symplectic vector")
    return PauliTerm(''.join(_DECODING[bits] for bits in zip(v.x, v.z)))


def symplectic_product(a, b):
    """
    a x b = a_x.b_z + a_z.b_x over GF(2)

    Returns 0 when the two Pauli strings commute and 1 when they anti-commute.
    """
    _check_same_length(a.num_qubits, b.num_qubits)
    total = sum(p & q for p, q in zip(a.x, b.z)) + sum(p & q for p, q in zip(a.z, b.x))
    return total % 2


def _single_product(a, b):
    if a == b:
        return 0, 'I'
    if a == 'I':
        return 0, b
    if b == 'I':
        return 0, a
    return _PRODUCT_TABLE[(a, b)]


def multiply(p, q):
    """Exact product of two phased Pauli strings"""
    _check_same_length(p.num_qubits, q.num_qubits)
    phase = p.phase + q.phase
    axes = []
    for a, b in zip(p.axes, q.axes):
        power, axis = _single_product(a, b)
        phase += power
        axes.append(axis)
    return PauliTerm(''.join(axes), phase)


def pauli_masks(axes):
    """
    Bit masks of a Pauli string over big-endian basis indices

    Returns:
        (x_mask, z_mask, n_y): positions carrying X or Y, positions carrying
        Z or Y, and the number of Y factors
    """
    m = len(axes)
    x_mask = z_mask = 0
    for position, axis in enumerate(axes):
        bit = 1 << (m - 1 - position)
        if axis in 'XY':
            x_mask |= bit
        if axis in 'YZ':
            z_mask |= bit
    return x_mask, z_mask, axes.count('Y')


def parity(values):
    """Parity of the set bits of each non-negative integer (up to 64 bits)"""
    folded = np.array(values, dtype=np.int64, copy=True)
    for shift in (32, 16, 8, 4, 2, 1):
        folded ^= folded >> shift
    return folded & 1


def pauli_action(axes):
    """
    Monomial form of a Pauli string: P|b> = phases[b] |b ^ flip>

    Y = iXZ per qubit gives phases[b] = i**n_y * (-1)**popcount(b & z_mask).
    """
    x_mask, z_mask, n_y = pauli_masks(axes)
    indices = np.arange(2 ** len(axes), dtype=np.int64)
    phases = PHASES[n_y % 4] * (1 - 2 * parity(indices & z_mask))
    return x_mask, phases


class PauliSum:
    """
    Complex-weighted sum of Pauli strings on a fixed number of qubits

    Terms are keyed by axes string. Coefficients smaller than PRUNE_TOL are
    dropped on construction, so every arithmetic result stays sparse.
    Instances are immutable.
    """

    def __init__(self, terms=None, num_qubits=None, tol=PRUNE_TOL):
        terms = dict(terms or {})
        if num_qubits is None:
            if not terms:
                raise PauliAlgebraError("num_qubits is required for an empty PauliSum")
            num_qubits = len(next(iter(terms)))
        cleaned = {}
        for axes, coeff in terms.items():
            if len(axes) != num_qubits:
                raise PauliAlgebraError(
                    f"term {axes!r} does not act on {num_qubits} qubits"
                )
            _check_axes(axes)
            coeff = complex(coeff)
            if abs(coeff) >= tol:
                cleaned[axes] = coeff
        self._terms = MappingProxyType(dict(sorted(cleaned.items())))
        self._num_qubits = int(num_qubits)

    @classmethod
    def identity(cls, num_qubits, coefficient=1.0):
        return cls({'I' * num_qubits: coefficient}, num_qubits)

    @classmethod
    def from_terms(cls, items, num_qubits=None):
        """
        Accumulate (coefficient, term) pairs, merging duplicates

        Args:
            items: iterable of (coefficient, PauliTerm or axes string)
            num_qubits: qubit count, required when items is empty
        """
        accumulated = {}
        for coeff, term in items:
            if isinstance(term, PauliTerm):
                coeff = coeff * term.coefficient
                term = term.axes
            accumulated[term] = accumulated.get(term, 0j) + coeff
        return cls(accumulated, num_qubits)

    @property
    def terms(self):
        return self._terms

    @property
    def num_qubits(self):
        return self._num_qubits

    @property
    def is_hermitian(self):
        return all(abs(coeff.imag) < PRUNE_TOL for coeff in self._terms.values())

    def coefficient(self, axes):
        return self._terms.get(axes, 0j)

    def real_part(self, tol=1e-10):
        """Drop imaginary residues, refusing any larger than ``tol``"""
        residue = max((abs(c.imag) for c in self._terms.values()), default=0.0)
        if residue > tol:
            raise NonHermitianError(
                f"imaginary residue {residue:.3e} exceeds tolerance {tol:.1e}"
            )
        return PauliSum({a: c.real for a, c in self._terms.items()}, self._num_qubits)

    def allclose(self, other, atol=1e-10):
        if self._num_qubits != other.num_qubits:
            return False
        keys = set(self._terms) | set(other.terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= atol for k in keys)

    @cached_property
    def compiled(self):
        """Per-term masks and coefficients as arrays, for the simulator kernels"""
        masks = np.array(
            [pauli_masks(axes) for axes in self._terms], dtype=np.int64
        ).reshape(-1, 3)
        coeffs = np.array(list(self._terms.values()), dtype=complex)
        return masks[:, 0], masks[:, 1], masks[:, 2], coeffs

    def _coerce(self, other):
        if isinstance(other, PauliSum):
            _check_same_length(self._num_qubits, other.num_qubits)
            return other
        if isinstance(other, PauliTerm):
            _check_same_length(self._num_qubits, other.num_qubits)
            return PauliSum({other.axes: other.coefficient}, other.num_qubits)
        if np.isscalar(other):
            return PauliSum.identity(self._num_qubits, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        merged = dict(self._terms)
        for axes, coeff in other.terms.items():
            merged[axes] = merged.get(axes, 0j) + coeff
        return PauliSum(merged, self._num_qubits)

    __radd__ = __add__

    def __neg__(self):
        return PauliSum({a: -c for a, c in self._terms.items()}, self._num_qubits)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other):
        if np.isscalar(other):
            return PauliSum({a: c * other for a, c in self._terms.items()}, self._num_qubits)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        product = {}
        for axes_a, coeff_a in self._terms.items():
            left = PauliTerm(axes_a) if axes_a else None
            for axes_b, coeff_b in other.terms.items():
                if left is None:
                    axes, coeff = '', coeff_a * coeff_b
                else:
                    term = multiply(left, PauliTerm(axes_b))
                    axes, coeff = term.axes, coeff_a * coeff_b * term.coefficient
                product[axes] = product.get(axes, 0j) + coeff
        return PauliSum(product, self._num_qubits)

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __repr__(self):
        body = ', '.join(f"{a or '()'}: {c:.6g}" for a, c in self._terms.items())
        return f"PauliSum(m={self._num_qubits}, {{{body}}})"


def to_dense(op):
    """
    Dense 2^m x 2^m matrix of a PauliTerm or PauliSum

    Equivalent to the Kronecker product with qubit 1 as the leftmost factor.
    """
    if isinstance(op, PauliTerm):
        op = PauliSum({op.axes: op.coefficient}, op.num_qubits)
    m = op.num_qubits
    if m > MAX_DENSE_QUBITS:
        raise PauliAlgebraError(
            f"dense conversion limited to {MAX_DENSE_QUBITS} qubits, got {m}"
        )
    dim = 2 ** m
    matrix = np.zeros((dim, dim), dtype=complex)
    indices = np.arange(dim, dtype=np.int64)
    for axes, coeff in op.terms.items():
        flip, phases = pauli_action(axes)
        matrix[indices ^ flip, indices] += coeff * phases
    return matrix


def _walsh_hadamard(rows, m):
    """Transform along axis 1: out[:, z] = sum_b (-1)**popcount(b & z) rows[:, b]"""
    out = rows.reshape((rows.shape[0],) + (2,) * m)
    for axis in range(1, m + 1):
        even = out.take(0, axis=axis)
        odd = out.take(1, axis=axis)
        out = np.stack((even + odd, even - odd), axis=axis)
    return out.reshape(rows.shape[0], -1)


def _axes_from_masks(x_mask, z_mask, m):
    return ''.join(
        _DECODING[((x_mask >> (m - 1 - p)) & 1, (z_mask >> (m - 1 - p)) & 1)]
        for p in range(m)
    )


def decompose_dense(matrix, num_qubits=None):
    """
    Pauli decomposition h_k = 2^-m tr(sigma_k H) of a 2^m x 2^m matrix

    For Hermitian H this equals 2^-m tr(H^dagger sigma_k). The sum over
    sigma_k is evaluated for all z-masks at once with a Walsh-Hadamard
    transform per x-mask.
    """
    H = np.asarray(matrix, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise PauliAlgebraError(f"expected a square matrix, got shape {H.shape}")
    dim = H.shape[0]
    m = dim.bit_length() - 1
    if dim < 1 or 2 ** m != dim:
        raise PauliAlgebraError(f"dimension {dim} is not a power of two")
    if num_qubits is not None and num_qubits != m:
        raise PauliAlgebraError(f"matrix acts on {m} qubits, not {num_qubits}")

    indices = np.arange(dim, dtype=np.int64)
    # shifted[x, b] = H[b, b ^ x]
    shifted = H[indices[None, :], indices[None, :] ^ indices[:, None]]
    transformed = _walsh_hadamard(shifted, m)

    x_masks, z_masks = np.nonzero(np.abs(transformed) >= PRUNE_TOL * dim)
    n_y = parity_count(x_masks & z_masks)
    phases = np.array(PHASES)[n_y % 4]
    coeffs = phases * transformed[x_masks, z_masks] / dim

    terms = {
        _axes_from_masks(int(x), int(z), m): c
        for x, z, c in zip(x_masks, z_masks, coeffs)
    }
    return PauliSum(terms, m)


def parity_count(values):
    """Number of set bits of each non-negative integer"""
    values = np.array(values, dtype=np.int64, copy=True)
    count = np.zeros_like(values)
    while np.any(values):
        count += values & 1
        values >>= 1
    return count
