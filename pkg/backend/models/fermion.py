"""
Second-quantized molecular Hamiltonians and the Jordan-Wigner mapping.

Mode j maps to qubit j. The annihilator is a_j = I^(j-1) (x) s+ (x) Z^(m-j)
with s+ = (X + iY)/2 = |0><1|, so |1> is an occupied mode and the vacuum is
|0...0>. Spin orbitals are interleaved: odd modes are spin-up, even modes
spin-down.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from models.pauli_core import PauliSum, PauliTerm
from utils.errors import IntegralsFormatError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
LADDER_TOL = 1e-14
HERMITIAN_TOL = 1e-10
SPIN_CONVENTION = 'interleaved: odd modes spin-up, even modes spin-down'

FCIDUMP_SUFFIXES = {'.fcidump', '.fcid'}


@dataclass(frozen=True, eq=False)
class MolecularIntegrals:
    """
    Electronic-structure data over spin orbitals, in Hartree

    The Hamiltonian is
        V_nn + sum h_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s
    with the ladder operators in exactly that index order.
    """

    n_spin_orbitals: int
    v_nn: float
    one_body: np.ndarray
    two_body: np.ndarray
    metadata: dict = field(default_factory=dict)
    reference_ground_energy: Optional[float] = None

    def __post_init__(self):
        m = self.n_spin_orbitals
        if not isinstance(m, (int, np.integer)) or m < 1:
            raise IntegralsFormatError(f"n_spin_orbitals must be a positive integer, got {m!r}")
        one_body = np.asarray(self.one_body, dtype=float)
        two_body = np.asarray(self.two_body, dtype=float)
        if one_body.shape != (m, m):
            raise IntegralsFormatError(
                f"one-electron tensor has shape {one_body.shape}, expected {(m, m)}"
            )
        if two_body.shape != (m,) * 4:
            raise IntegralsFormatError(
                f"two-electron tensor has shape {two_body.shape}, expected {(m,) * 4}"
            )
        if not (np.all(np.isfinite(one_body)) and np.all(np.isfinite(two_body))):
            raise IntegralsFormatError("integrals contain non-finite values")
        if np.max(np.abs(one_body - one_body.T)) > SYMMETRY_TOL:
            raise IntegralsFormatError("one-electron tensor not symmetric")
        object.__setattr__(self, 'n_spin_orbitals', int(m))
        object.__setattr__(self, 'v_nn', float(self.v_nn))
        object.__setattr__(self, 'one_body', one_body)
        object.__setattr__(self, 'two_body', two_body)
        object.__setattr__(self, 'metadata', dict(self.metadata or {}))


@dataclass(frozen=True)
class LadderTerm:
    """coefficient * product of ladder operators, leftmost first; modes are 1-based"""

    operators: tuple
    coefficient: float

    def __post_init__(self):
        object.__setattr__(
            self, 'operators', tuple((int(j), bool(dagger)) for j, dagger in self.operators)
        )

    def check_modes(self, m):
        for j, _ in self.operators:
            if not 1 <= j <= m:
                raise IntegralsFormatError(f"mode index {j} outside 1..{m}")

    def __str__(self):
        ops = ' '.join(f"a{j}{'+' if dagger else ''}" for j, dagger in self.operators)
        return f"{self.coefficient:+.6g} {ops}".rstrip()


# Loading

def load_integrals(path):
    """
    Load molecular integrals from a JSON or FCIDUMP file

    Args:
        path: .json file in spin-orbital form, or an FCIDUMP file over
            spatial orbitals (suffix .fcidump or a name containing FCIDUMP)

    Returns:
        MolecularIntegrals
    """
    path = Path(path)
    if not path.is_file():
        raise IntegralsFormatError(f"integrals file not found: {path}")
    if path.suffix.lower() in FCIDUMP_SUFFIXES or 'fcidump' in path.name.lower():
        return load_fcidump(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise IntegralsFormatError(f"{path}: invalid JSON ({e})") from e
    mi = integrals_from_dict(data)
    logger.debug("Loaded integrals for %d spin orbitals from %s", mi.n_spin_orbitals, path)
    return mi


def integrals_from_dict(data):
    missing = [k for k in ('n_spin_orbitals', 'V_nn', 'h_pq', 'h_pqrs') if k not in data]
    if missing:
        raise IntegralsFormatError(f"missing fields: {', '.join(missing)}")
    reference = data.get('reference_ground_energy')
    try:
        return MolecularIntegrals(
            n_spin_orbitals=data['n_spin_orbitals'],
            v_nn=data['V_nn'],
            one_body=np.array(data['h_pq'], dtype=float),
            two_body=np.array(data['h_pqrs'], dtype=float),
            metadata=data.get('metadata') or {},
            reference_ground_energy=None if reference is None else float(reference),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, IntegralsFormatError):
            raise
        raise IntegralsFormatError(f"dimension mismatch or non-numeric entry: {e}") from e


def integrals_to_dict(mi):
    data = {
        'n_spin_orbitals': mi.n_spin_orbitals,
        'V_nn': mi.v_nn,
        'h_pq': mi.one_body.tolist(),
        'h_pqrs': mi.two_body.tolist(),
        'metadata': mi.metadata,
    }
    if mi.reference_ground_energy is not None:
        data['reference_ground_energy'] = mi.reference_ground_energy
    return data


def spin_orbital_integrals(h_spatial, eri_spatial, v_nn, metadata=None, reference=None):
    """
    Expand spatial-orbital integrals to interleaved spin orbitals

    Args:
        h_spatial: n x n one-electron integrals
        eri_spatial: n^4 two-electron integrals in chemist notation (ij|kl)
        v_nn: nuclear repulsion (plus any core energy)

    Returns:
        MolecularIntegrals on m = 2n spin orbitals, with
        h_pqrs = (ps|qr) when spin(p) = spin(s) and spin(q) = spin(r)
    """
    h_spatial = np.asarray(h_spatial, dtype=float)
    eri_spatial = np.asarray(eri_spatial, dtype=float)
    n = h_spatial.shape[0]
    m = 2 * n
    spin = np.arange(m) % 2
    spatial = np.arange(m) // 2
    same = spin[:, None] == spin[None, :]

    one_body = h_spatial[np.ix_(spatial, spatial)] * same
    # (ps|qr) arranged as [p, q, r, s]
    chem = eri_spatial[np.ix_(spatial, spatial, spatial, spatial)]
    two_body = np.einsum('psqr->pqrs', chem)
    two_body = two_body * same[:, None, None, :] * same[None, :, :, None]

    meta = {'spin_convention': SPIN_CONVENTION}
    meta.update(metadata or {})
    return MolecularIntegrals(m, v_nn, one_body, two_body, meta, reference)


_FCIDUMP_HEADER_END = re.compile(r'&END|/\s*$', re.IGNORECASE)


def load_fcidump(path):
    """
    Read an FCIDUMP file and expand it to spin orbitals

    Integral lines are "value i j k l" over 1-based spatial orbitals with
    8-fold permutational symmetry; "i j 0 0" is one-electron, "0 0 0 0" the
    core energy. Orbital-energy lines "i 0 0 0" are ignored.
    """
    path = Path(path)
    lines = path.read_text().splitlines()

    header = []
    body_start = None
    for index, line in enumerate(lines):
        header.append(line)
        if _FCIDUMP_HEADER_END.search(line.strip()):
            body_start = index + 1
            break
    if body_start is None:
        raise IntegralsFormatError(f"{path}: FCIDUMP namelist header not terminated")
    match = re.search(r'NORB\s*=\s*(\d+)', ' '.join(header), re.IGNORECASE)
    if not match:
        raise IntegralsFormatError(f"{path}: NORB missing from FCIDUMP header")
    n = int(match.group(1))
    if n < 1:
        raise IntegralsFormatError(f"{path}: NORB must be positive")

    h = np.zeros((n, n))
    eri = np.zeros((n,) * 4)
    core = 0.0
    for lineno, line in enumerate(lines[body_start:], start=body_start + 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise IntegralsFormatError(f"{path}:{lineno}: expected 'value i j k l'")
        try:
            value = float(parts[0].replace('D', 'E').replace('d', 'e'))
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError as e:
            raise IntegralsFormatError(f"{path}:{lineno}: {e}") from e
        if max(i, j, k, l) > n or min(i, j, k, l) < 0:
            raise IntegralsFormatError(f"{path}:{lineno}: orbital index outside 1..{n}")
        if i == j == k == l == 0:
            core += value
        elif k == 0 and l == 0:
            if j == 0:
                continue
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        else:
            i, j, k, l = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k)):
                eri[a, b, c, d] = eri[c, d, a, b] = value

    metadata = {'source': path.name, 'format': 'FCIDUMP', 'n_spatial_orbitals': n}
    mi = spin_orbital_integrals(h, eri, core, metadata)
    logger.debug("Loaded FCIDUMP with %d spatial orbitals from %s", n, path)
    return mi


# Jordan-Wigner

@lru_cache(maxsize=None)
def jw_ladder(j, dagger, m):
    """
    Jordan-Wigner image of a_j (dagger=False) or a_j+ (dagger=True)

    Returns:
        Two-term PauliSum: 0.5 X_j Z... +/- 0.5i Y_j Z...
    """
    if not 1 <= j <= m:
        raise IntegralsFormatError(f"mode index {j} outside 1..{m}")
    prefix = 'I' * (j - 1)
    suffix = 'Z' * (m - j)
    sign = -1 if dagger else 1
    return PauliSum({prefix + 'X' + suffix: 0.5, prefix + 'Y' + suffix: 0.5j * sign}, m)


def ladder_terms(mi):
    """
    Enumerate the ladder-operator terms of the molecular Hamiltonian

    The first term carries V_nn with no operators; coefficients smaller than
    1e-14 are skipped.
    """
    m = mi.n_spin_orbitals
    terms = [LadderTerm((), mi.v_nn)]
    for p, q in zip(*np.nonzero(np.abs(mi.one_body) > LADDER_TOL)):
        terms.append(LadderTerm(((p + 1, True), (q + 1, False)), mi.one_body[p, q]))
    for p, q, r, s in zip(*np.nonzero(np.abs(mi.two_body) > LADDER_TOL)):
        if p == q or r == s:
            continue
        terms.append(LadderTerm(
            ((p + 1, True), (q + 1, True), (r + 1, False), (s + 1, False)),
            0.5 * mi.two_body[p, q, r, s],
        ))
    logger.debug("Enumerated %d ladder terms on %d modes", len(terms), m)
    return terms


def ladder_to_pauli(term, m):
    term.check_modes(m)
    product = PauliSum.identity(m, term.coefficient)
    for j, dagger in term.operators:
        product = product * jw_ladder(j, dagger, m)
    return product


def build_qubit_hamiltonian(mi):
    """
    Jordan-Wigner qubit Hamiltonian of the molecular integrals

    Raises:
        NonHermitianError: imaginary residue above 1e-10 after assembly
    """
    m = mi.n_spin_orbitals
    accumulated = {}
    for term in ladder_terms(mi):
        for axes, coeff in ladder_to_pauli(term, m).terms.items():
            accumulated[axes] = accumulated.get(axes, 0j) + coeff
    h = PauliSum(accumulated, m).real_part(HERMITIAN_TOL)
    logger.info("Built %d-term qubit Hamiltonian on %d qubits", len(h), m)
    return h


def _mode_parity(m, offset):
    if m < 2 or m % 2:
        raise IntegralsFormatError(f"spin-resolved operators need an even mode count, got {m}")
    return range(offset, m + 1, 2)


def number_operators(m):
    """
    Spin-resolved number operators (N_up, N_down) as I/Z PauliSums

    N_sigma = sum over modes of that spin of (I - Z_j)/2.
    """
    result = []
    for offset in (1, 2):
        terms = {'I' * m: 0.0}
        for j in _mode_parity(m, offset):
            terms['I' * m] += 0.5
            terms['I' * (j - 1) + 'Z' + 'I' * (m - j)] = -0.5
        result.append(PauliSum(terms, m))
    return tuple(result)


def spin_parity_generators(m):
    """Parities (-1)^N_up and (-1)^N_down as Z strings on odd and even modes"""
    generators = []
    for offset in (1, 2):
        modes = set(_mode_parity(m, offset))
        generators.append(PauliTerm(''.join('Z' if j in modes else 'I' for j in range(1, m + 1))))
    return tuple(generators)
