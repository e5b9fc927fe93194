"""
Z2-symmetry qubit tapering.

Pipeline: parity-check matrix of the Hamiltonian terms -> GF(2) kernel ->
maximal abelian subgroup of the kernel -> (q, rho, tau) triple -> Clifford
unitary U with U X_(m-r+i) U+ = tau_i -> H' = U+ H U, whose last r qubits
carry only I or X and are replaced by the sector signs.

All qubit positions and generator indices in this module's API are 1-based.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np

from models.exact_solver import ground_energy
from models.fermion import spin_parity_generators
from models.pauli_core import (
    PauliSum, PauliTerm, SymplecticVector, decode_symplectic, decompose_dense,
    encode_symplectic, multiply, symplectic_product, to_dense,
)
from utils.errors import PauliAlgebraError, SymmetryError

logger = logging.getLogger(__name__)

MAX_TAPER_QUBITS = 12
SECTOR_TIE_TOL = 1e-12
TAPER_METHODS = ('dense', 'clifford')
SYMMETRY_SOURCES = ('spin_parity', 'maximal')

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_HADAMARD_RULES = {'I': ('I', 1), 'X': ('Z', 1), 'Y': ('Y', -1), 'Z': ('X', 1)}


# GF(2) linear algebra

def _reduced_row_echelon(matrix):
    """
    Reduced row echelon form over GF(2), pivoting on the leftmost column first

    Returns:
        (nonzero rows of the reduced matrix, pivot column indices)
    """
    a = np.array(matrix, dtype=np.uint8) % 2
    n_rows, n_cols = a.shape
    pivots = []
    row = 0
    for col in range(n_cols):
        if row == n_rows:
            break
        candidates = np.nonzero(a[row:, col])[0]
        if candidates.size == 0:
            continue
        pivot = row + candidates[0]
        if pivot != row:
            a[[row, pivot]] = a[[pivot, row]]
        others = np.nonzero(a[:, col])[0]
        others = others[others != row]
        a[others] ^= a[row]
        pivots.append(col)
        row += 1
    return a[:row], pivots


def _rank(matrix):
    return len(_reduced_row_echelon(matrix)[1])


def _nullspace(matrix, n_cols):
    """Basis of {v : matrix v = 0 mod 2}, one vector per free column in ascending order"""
    matrix = np.asarray(matrix, dtype=np.uint8).reshape(-1, n_cols)
    reduced, pivots = _reduced_row_echelon(matrix)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = np.zeros((len(free), n_cols), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, p in enumerate(pivots):
            basis[k, p] = reduced[r, f]
    return basis


def _swap_halves(rows, m):
    rows = np.asarray(rows, dtype=np.uint8).reshape(-1, 2 * m)
    return np.hstack((rows[:, m:], rows[:, :m]))


def _row_value(row):
    return int(''.join(map(str, row)) or '0', 2)


# Parity check and symmetry search

@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Rows are (a_z|a_x) for each non-identity term, in sorted axes order"""

    matrix: np.ndarray
    num_qubits: int
    terms: tuple

    @property
    def generator_matrix(self):
        """
        The unswapped encodings (a_x|a_z) of the terms

        E G^T over GF(2) is the commutation matrix of the terms; E g^T vanishes
        only for a symmetry generator g.
        """
        return _swap_halves(self.matrix, self.num_qubits)


def build_parity_check(h):
    m = h.num_qubits
    if m < 1:
        raise SymmetryError("parity check needs at least one qubit")
    terms = tuple(axes for axes in h.terms if set(axes) != {'I'})
    rows = [encode_symplectic(PauliTerm(axes)).to_array() for axes in terms]
    matrix = _swap_halves(np.array(rows, dtype=np.uint8).reshape(-1, 2 * m), m)
    return ParityCheckMatrix(matrix, m, terms)


def kernel_basis(parity):
    """
    Basis of ker(E) over GF(2)

    A kernel vector v = (v_x|v_z) satisfies a x v = 0 for every term a, so
    its Pauli string commutes with every term of the Hamiltonian.
    """
    m = parity.num_qubits
    basis = _nullspace(parity.matrix, 2 * m)
    return [SymplecticVector.from_array(v) for v in basis]


@dataclass(frozen=True)
class SymmetryGroup:
    """Independent, pairwise commuting Pauli generators with phase +1"""

    generators: tuple
    num_qubits: int

    def __post_init__(self):
        generators = tuple(
            g if isinstance(g, PauliTerm) else PauliTerm.from_label(g) for g in self.generators
        )
        m = self.num_qubits
        for g in generators:
            if g.num_qubits != m:
                raise SymmetryError(f"generator {g} does not act on {m} qubits")
            if g.phase != 0:
                raise SymmetryError(f"generator {g} must carry phase +1")
        if len(generators) > m:
            raise SymmetryError(f"{len(generators)} generators exceed the bound r <= {m}")
        vectors = [encode_symplectic(g) for g in generators]
        for (i, a), (j, b) in itertools.combinations(enumerate(vectors, start=1), 2):
            if symplectic_product(a, b):
                raise SymmetryError(f"generators {i} and {j} do not commute")
        if vectors and _rank([v.to_array() for v in vectors]) != len(vectors):
            raise SymmetryError("generators are not independent over GF(2)")
        object.__setattr__(self, 'generators', generators)

    @property
    def rank(self):
        return len(self.generators)

    @property
    def vectors(self):
        return [encode_symplectic(g) for g in self.generators]

    def labels(self):
        return [g.axes for g in self.generators]

    def __len__(self):
        return len(self.generators)


def _centralizer(group_basis, subgroup, m):
    """Rows spanning {g in span(group_basis) : g x a = 0 for all a in subgroup}"""
    if len(subgroup) == 0:
        return group_basis
    constraints = (_swap_halves(subgroup, m) @ group_basis.T) % 2
    coefficients = _nullspace(constraints, group_basis.shape[0])
    return (coefficients @ group_basis) % 2


def maximal_abelian_generators(basis):
    """
    Generators of a maximal abelian subgroup of the group spanned by ``basis``

    Starts from the center of G and grows A with elements of C_G(A) outside A
    until C_G(A) = A. The element added is the first row, by integer value of
    its x|z bits, of the reduced basis of C_G(A) that is not already in A.
    """
    if not basis:
        raise SymmetryError("symmetry search needs at least one basis vector")
    m = basis[0].num_qubits
    group = np.array([v.to_array() for v in basis], dtype=np.uint8)
    if _rank(group) != len(basis):
        raise SymmetryError("basis vectors are not linearly independent")

    gram = (_swap_halves(group, m) @ group.T) % 2
    abelian, _ = _reduced_row_echelon((_nullspace(gram, len(basis)) @ group) % 2)
    logger.debug("Center of the kernel group has rank %d", len(abelian))

    while True:
        centralizer = _centralizer(group, abelian, m)
        if _rank(centralizer) == len(abelian):
            break
        candidates, _ = _reduced_row_echelon(centralizer)
        for row in sorted(candidates, key=_row_value):
            extended = np.vstack((abelian, row)) if len(abelian) else row[None, :]
            if _rank(extended) > len(abelian):
                abelian, _ = _reduced_row_echelon(extended)
                break

    generators = tuple(decode_symplectic(SymplecticVector.from_array(row)) for row in abelian)
    return SymmetryGroup(generators, m)


def find_symmetries(h):
    """Maximal abelian group of Pauli strings commuting with every term of ``h``"""
    basis = kernel_basis(build_parity_check(h))
    if not basis:
        return SymmetryGroup((), h.num_qubits)
    group = maximal_abelian_generators(basis)
    logger.debug("Found %d symmetry generators: %s", group.rank, ', '.join(group.labels()))
    return group


def spin_parity_symmetries(m):
    """Spin-up and spin-down parity generators of an interleaved JW Hamiltonian"""
    return SymmetryGroup(spin_parity_generators(m), m)


def symmetry_group(h, source):
    """Symmetries of ``h`` from 'spin_parity' or the 'maximal' search"""
    if source == 'spin_parity':
        return spin_parity_symmetries(h.num_qubits)
    if source == 'maximal':
        return find_symmetries(h)
    raise SymmetryError(f"unknown symmetry source {source!r}")


# Triple construction

def _single_qubit(axis, q, m):
    return PauliTerm('I' * (q - 1) + axis + 'I' * (m - q))


def generator_transform(s, i, q, rho):
    """
    Make every generator except tau_i commute with sigma^rho_q

    Args:
        s: SymmetryGroup
        i: 1-based generator index; tau_i must anti-commute with sigma^rho_q
        q: 1-based qubit index
        rho: 'X' or 'Z'

    Returns:
        SymmetryGroup generating the same group
    """
    m = s.num_qubits
    sigma = encode_symplectic(_single_qubit(rho, q, m))
    vectors = s.vectors
    pivot = vectors[i - 1]
    if not symplectic_product(pivot, sigma):
        raise SymmetryError(f"generator {i} commutes with {rho} on qubit {q}")
    transformed = []
    for k, v in enumerate(vectors, start=1):
        if k != i and symplectic_product(v, sigma):
            v = v + pivot
        transformed.append(decode_symplectic(v))
    return SymmetryGroup(tuple(transformed), m)


@dataclass(frozen=True)
class TaperTriple:
    """Qubits q(i), single-qubit axes rho(i) and transformed generators tau_i"""

    q: tuple
    rho: tuple
    tau: tuple

    @property
    def rank(self):
        return len(self.q)

    @property
    def num_qubits(self):
        return self.tau[0].num_qubits if self.tau else 0

    def satisfies_predicate(self):
        """sigma^rho(i)_q(i) anti-commutes with tau_i and commutes with every other tau_j"""
        m = self.num_qubits
        for i, (q, rho) in enumerate(zip(self.q, self.rho)):
            sigma = encode_symplectic(_single_qubit(rho, q, m))
            for j, tau in enumerate(self.tau):
                if symplectic_product(sigma, encode_symplectic(tau)) != int(i == j):
                    return False
        return True

    def to_dict(self):
        return {'q': list(self.q), 'rho': list(self.rho), 'tau': [t.axes for t in self.tau]}


def build_taper_triple(s):
    """
    Choose one qubit per generator by induction over the generators

    At step n the qubit is the smallest index outside the ones already chosen
    where tau_n is not I; rho is X when tau_n has Y or Z there and Z when it
    has X. The generator transform then clears sigma^rho_q from the others.
    """
    if s.rank == 0:
        raise SymmetryError("cannot build a taper triple from an empty group")
    current = s
    q, rho = [], []
    for n in range(1, s.rank + 1):
        axes = current.generators[n - 1].axes
        choice = next(
            (j for j in range(1, s.num_qubits + 1) if j not in q and axes[j - 1] != 'I'),
            None,
        )
        if choice is None:
            raise SymmetryError(f"generator {n} has no free qubit; group is malformed")
        axis = 'Z' if axes[choice - 1] == 'X' else 'X'
        current = generator_transform(current, n, choice, axis)
        q.append(choice)
        rho.append(axis)
    triple = TaperTriple(tuple(q), tuple(rho), current.generators)
    logger.debug("Taper triple q=%s rho=%s tau=%s", triple.q, triple.rho, current.labels())
    return triple


# Unitary

def tapering_permutation(t, m):
    """
    Position-to-qubit map of W: position p holds qubit pi[p - 1]

    Untapered qubits keep their ascending order in positions 1..m-r and q(i)
    moves to position m - r + i.
    """
    kept = [j for j in range(1, m + 1) if j not in t.q]
    return tuple(kept) + tuple(t.q)


def _embed(matrix, q, m):
    factors = [np.eye(2, dtype=complex)] * m
    factors[q - 1] = matrix
    return reduce(np.kron, factors)


def _permutation_matrix(pi, m):
    """W|b> = |c> with c_pi(p) = b_p"""
    dim = 2 ** m
    indices = np.arange(dim, dtype=np.int64)
    image = np.zeros(dim, dtype=np.int64)
    for p, qubit in enumerate(pi, start=1):
        bit = (indices >> (m - p)) & 1
        image |= bit << (m - qubit)
    w = np.zeros((dim, dim), dtype=complex)
    w[image, indices] = 1
    return w


def _check_dense(m):
    if m > MAX_TAPER_QUBITS:
        raise PauliAlgebraError(
            f"dense tapering limited to {MAX_TAPER_QUBITS} qubits, got {m}"
        )


def _reflection(q, rho, tau, m):
    return (to_dense(_single_qubit(rho, q, m)) + to_dense(tau)) / np.sqrt(2)


def unitary_factors(t, m):
    """Dense U_i with U_i X_q(i) U_i+ = tau_i, one per generator"""
    _check_dense(m)
    factors = []
    for q, rho, tau in zip(t.q, t.rho, t.tau):
        u = _reflection(q, rho, tau, m)
        if rho == 'Z':
            u = u @ _embed(_HADAMARD, q, m)
        factors.append(u)
    return factors


def build_unitary(t, m):
    """
    Dense U = V_1 ... V_r . prod(H_q(i) for rho(i) = Z) . W

    V_i = (sigma^rho(i)_q(i) + tau_i)/sqrt(2). U maps X on position m-r+i to
    tau_i under conjugation.
    """
    _check_dense(m)
    u = np.eye(2 ** m, dtype=complex)
    for q, rho, tau in zip(t.q, t.rho, t.tau):
        u = u @ _reflection(q, rho, tau, m)
    for q, rho in zip(t.q, t.rho):
        if rho == 'Z':
            u = u @ _embed(_HADAMARD, q, m)
    return u @ _permutation_matrix(tapering_permutation(t, m), m)


# Tapering

@dataclass(frozen=True)
class TaperedHamiltonian:
    """Hamiltonian on m - r qubits for one choice of generator eigenvalues"""

    sector: tuple
    hamiltonian: PauliSum
    permutation: tuple
    conjugated: Optional[PauliSum] = None

    @property
    def num_qubits(self):
        return self.hamiltonian.num_qubits


def _check_symmetry(h, t):
    for k, tau in enumerate(t.tau, start=1):
        v = encode_symplectic(tau)
        for axes in h.terms:
            if symplectic_product(encode_symplectic(PauliTerm(axes)), v):
                raise SymmetryError(f"not a symmetry: {axes} anti-commutes with generator {k} ({tau.axes})")


def _conjugate_reflection(term, a, b):
    """V+ P V for V = (A + B)/sqrt(2) with anticommuting A, B"""
    with_a = symplectic_product(encode_symplectic(term), encode_symplectic(a))
    with_b = symplectic_product(encode_symplectic(term), encode_symplectic(b))
    if not with_a and not with_b:
        return term
    if with_a and with_b:
        return PauliTerm(term.axes, term.phase + 2)
    if not with_a:
        return multiply(multiply(term, a), b)
    return multiply(multiply(term, b), a)


def _conjugate_clifford(h, t, m):
    pi = tapering_permutation(t, m)
    reflections = [(_single_qubit(rho, q, m), tau) for q, rho, tau in zip(t.q, t.rho, t.tau)]
    hadamards = {q for q, rho in zip(t.q, t.rho) if rho == 'Z'}
    accumulated = {}
    for axes, coeff in h.terms.items():
        term = PauliTerm(axes)
        for a, b in reflections:
            term = _conjugate_reflection(term, a, b)
        phase = term.phase
        new_axes = list(term.axes)
        for q in hadamards:
            new_axes[q - 1], sign = _HADAMARD_RULES[new_axes[q - 1]]
            if sign < 0:
                phase += 2
        permuted = ''.join(new_axes[qubit - 1] for qubit in pi)
        term = PauliTerm(permuted, phase)
        accumulated[permuted] = accumulated.get(permuted, 0j) + coeff * term.coefficient
    return PauliSum(accumulated, m)


def _conjugate_dense(h, t, m):
    u = build_unitary(t, m)
    return decompose_dense(u.conj().T @ to_dense(h) @ u, m)


def taper(h, t, sector, method='dense'):
    """
    Remove the r symmetry qubits of ``h`` for one sector

    Args:
        h: PauliSum commuting with every tau_i
        t: TaperTriple
        sector: r signs, the eigenvalue of each tau_i
        method: 'dense' (U+ H U then decompose) or 'clifford' (term-wise conjugation)

    Returns:
        TaperedHamiltonian on m - r qubits
    """
    m = h.num_qubits
    r = t.rank
    sector = tuple(int(s) for s in sector)
    if len(sector) != r or any(s not in (1, -1) for s in sector):
        raise SymmetryError(f"sector must hold {r} signs of +1/-1, got {sector}")
    if r and t.num_qubits != m:
        raise SymmetryError(f"triple acts on {t.num_qubits} qubits, Hamiltonian on {m}")
    if method not in TAPER_METHODS:
        raise SymmetryError(f"unknown taper method {method!r}")
    _check_symmetry(h, t)

    if method == 'dense':
        conjugated = _conjugate_dense(h, t, m)
    else:
        conjugated = _conjugate_clifford(h, t, m)
    if h.is_hermitian:
        conjugated = conjugated.real_part()

    kept = m - r
    reduced = {}
    for axes, coeff in conjugated.terms.items():
        sign = 1
        for i, axis in enumerate(axes[kept:]):
            if axis == 'X':
                sign *= sector[i]
            elif axis != 'I':
                raise SymmetryError(
                    f"conjugated term {axes} has {axis} on tapered position {kept + i + 1}"
                )
        reduced[axes[:kept]] = reduced.get(axes[:kept], 0j) + sign * coeff
    tapered = PauliSum(reduced, kept)
    if h.is_hermitian:
        tapered = tapered.real_part()
    return TaperedHamiltonian(sector, tapered, tapering_permutation(t, m), conjugated)


def _solve_sectors(h, t, method):
    results = []
    for sector in itertools.product((1, -1), repeat=t.rank):
        tapered = taper(h, t, sector, method)
        energy = ground_energy(tapered.hamiltonian).ground_energy
        logger.debug("Sector %s: ground energy %.12f", format_sector(sector), energy)
        results.append((sector, tapered, energy))
    return results


def sector_energies(h, t, method='dense'):
    """Ground energy of every sector, in +-before-- lexicographic order"""
    return [(sector, energy) for sector, _, energy in _solve_sectors(h, t, method)]


def select_ground_sector(h, t, method='dense'):
    """
    Sector whose tapered Hamiltonian has the lowest ground energy

    Ties within 1e-12 keep the earlier sector in enumeration order.

    Returns:
        (sector, TaperedHamiltonian)
    """
    best = None
    for sector, tapered, energy in _solve_sectors(h, t, method):
        if best is None or energy < best[2] - SECTOR_TIE_TOL:
            best = (sector, tapered, energy)
    logger.info("Selected sector %s with ground energy %.10f", format_sector(best[0]), best[2])
    return best[0], best[1]


def format_sector(sector):
    return ''.join('+' if s > 0 else '-' for s in sector)


def parse_sector(text):
    """Parse '+-+' (or '1,-1,1') into a tuple of signs"""
    text = text.strip()
    if text and set(text) <= {'+', '-'}:
        return tuple(1 if c == '+' else -1 for c in text)
    try:
        signs = tuple(int(part) for part in text.split(','))
    except ValueError as e:
        raise SymmetryError(f"cannot parse sector {text!r}") from e
    if any(s not in (1, -1) for s in signs):
        raise SymmetryError(f"cannot parse sector {text!r}")
    return signs
