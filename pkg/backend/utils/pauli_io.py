"""
Serialization of PauliSums in the JSON and plain-text exchange forms.

JSON:  {"m": 4, "terms": [{"re": 0.5, "im": 0.0, "axes": "IZXY"}]}
Text:  one term per line, "<re> <im> <axes>"; lines starting with # are
       comments, and a "# m=<count>" header pins the qubit count. Zero-qubit
       (scalar) terms are written with the axes placeholder "()".
"""

import json
import logging
from pathlib import Path

from models.fermion import build_qubit_hamiltonian, load_integrals
from models.pauli_core import PauliSum
from utils.errors import PauliAlgebraError

logger = logging.getLogger(__name__)

SCALAR_AXES = '()'
TEXT_SUFFIXES = {'.txt', '.pauli'}


def to_json(h):
    """Return the JSON-ready dict for a PauliSum"""
    return {
        'm': h.num_qubits,
        'terms': [
            {'re': float(c.real), 'im': float(c.imag), 'axes': axes}
            for axes, c in h.terms.items()
        ],
    }


def from_json(data):
    """Build a PauliSum from the dict produced by to_json"""
    try:
        m = int(data['m'])
        terms = {}
        for entry in data['terms']:
            axes = entry['axes']
            terms[axes] = terms.get(axes, 0j) + complex(entry['re'], entry.get('im', 0.0))
    except (KeyError, TypeError, ValueError) as e:
        raise PauliAlgebraError(f"malformed PauliSum JSON: {e}") from e
    return PauliSum(terms, m)


def to_text(h):
    lines = [f"# m={h.num_qubits}"]
    for axes, c in h.terms.items():
        lines.append(f"{c.real!r} {c.imag!r} {axes or SCALAR_AXES}")
    return '\n'.join(lines) + '\n'


def from_text(text):
    m = None
    terms = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            header = line[1:].strip()
            if header.startswith('m='):
                m = int(header[2:])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise PauliAlgebraError(f"line {lineno}: expected '<re> <im> <axes>', got {raw!r}")
        try:
            coeff = complex(float(parts[0]), float(parts[1]))
        except ValueError as e:
            raise PauliAlgebraError(f"line {lineno}: bad coefficient ({e})") from e
        axes = '' if parts[2] == SCALAR_AXES else parts[2]
        terms[axes] = terms.get(axes, 0j) + coeff
    return PauliSum(terms, m)


def load_pauli_sum(path):
    """
    Load a PauliSum from disk

    Args:
        path: .json file, or .txt/.pauli text file

    Returns:
        PauliSum
    """
    path = Path(path)
    content = path.read_text()
    if path.suffix.lower() in TEXT_SUFFIXES:
        h = from_text(content)
    else:
        h = from_json(json.loads(content))
    logger.debug("Loaded %d-term PauliSum on %d qubits from %s", len(h), h.num_qubits, path)
    return h


def save_pauli_sum(h, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() in TEXT_SUFFIXES:
        path.write_text(to_text(h))
    else:
        path.write_text(json.dumps(to_json(h), indent=2) + '\n')
    return path


def is_integrals_file(path):
    """True for FCIDUMP files and JSON files in the molecular-integrals schema"""
    path = Path(path)
    if path.suffix.lower() in ('.fcidump', '.fcid') or 'fcidump' in path.name.lower():
        return True
    if path.suffix.lower() != '.json':
        return False
    try:
        return 'n_spin_orbitals' in json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return False


def load_operator(path):
    """
    Load a qubit Hamiltonian from a PauliSum file or an integrals file

    Integrals files are Jordan-Wigner mapped first.

    Returns:
        (PauliSum, True when the input was an integrals file)
    """
    path = Path(path)
    if not path.is_file():
        raise PauliAlgebraError(f"input file not found: {path}")
    if is_integrals_file(path):
        return build_qubit_hamiltonian(load_integrals(path)), True
    return load_pauli_sum(path), False
