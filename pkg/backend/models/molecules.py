"""
Molecular integrals generated with PySCF.

A diatomic is placed on the z axis, a restricted Hartree-Fock calculation
fixes the spatial molecular orbitals, and the one- and two-electron integrals
in that basis are expanded to interleaved spin orbitals. Bond-length sweeps
write one integrals file per geometry and reuse files that already exist.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from models.fermion import integrals_to_dict, spin_orbital_integrals
from utils.errors import IntegralsFormatError
from utils.run_utils import sanitize_label

logger = logging.getLogger(__name__)

DIATOMICS = {
    'h2': ('H', 'H'),
    'lih': ('Li', 'H'),
}
UNITS = ('angstrom', 'bohr')
INTEGRAL_FORMATS = ('json', 'fcidump')


def _pyscf():
    try:
        from pyscf import ao2mo, fci, gto, scf
        from pyscf.tools import fcidump
    except ImportError as e:
        raise IntegralsFormatError("generating integrals requires pyscf (pip install pyscf)") from e
    return gto, scf, ao2mo, fci, fcidump


def _atoms(molecule):
    try:
        return DIATOMICS[str(molecule).lower()]
    except KeyError:
        raise IntegralsFormatError(
            f"unknown molecule {molecule!r}; choose from {', '.join(DIATOMICS)}"
        ) from None


@dataclass
class SpatialIntegrals:
    """RHF molecular-orbital integrals over spatial orbitals, chemist notation"""

    one_body: np.ndarray
    two_body: np.ndarray
    v_nn: float
    n_electrons: int
    hf_energy: float
    fci_energy: float
    metadata: dict

    @property
    def n_orbitals(self):
        return self.one_body.shape[0]

    def to_spin_orbitals(self):
        return spin_orbital_integrals(
            self.one_body, self.two_body, self.v_nn, self.metadata, reference=self.fci_energy
        )


def rhf_integrals(molecule, bond_length, basis='sto-3g', unit='angstrom'):
    """
    Run RHF + FCI for a diatomic at one bond length

    Args:
        molecule: key of DIATOMICS ('h2', 'lih')
        bond_length: internuclear distance in ``unit``
        basis: any basis name PySCF understands
        unit: 'angstrom' or 'bohr'

    Returns:
        SpatialIntegrals
    """
    gto, scf, ao2mo, fci, _ = _pyscf()
    first, second = _atoms(molecule)
    unit = str(unit).lower()
    if unit not in UNITS:
        raise IntegralsFormatError(f"unit must be one of {UNITS}, got {unit!r}")
    if not bond_length > 0:
        raise IntegralsFormatError(f"bond length must be positive, got {bond_length}")

    mol = gto.M(
        atom=[[first, (0.0, 0.0, 0.0)], [second, (0.0, 0.0, float(bond_length))]],
        basis=basis,
        unit=unit,
        charge=0,
        spin=0,
        verbose=0,
    )
    mf = scf.RHF(mol)
    hf_energy = mf.kernel()
    if not mf.converged:
        raise IntegralsFormatError(f"RHF did not converge for {molecule} at {bond_length} {unit}")

    c = mf.mo_coeff
    n = c.shape[1]
    one_body = c.T @ mf.get_hcore() @ c
    two_body = ao2mo.restore(1, ao2mo.kernel(mol, c), n)
    fci_energy = fci.FCI(mf).kernel()[0]

    logger.debug("%s at %g %s: E_HF = %.10f, E_FCI = %.10f",
                 molecule, bond_length, unit, hf_energy, fci_energy)
    return SpatialIntegrals(
        one_body=np.asarray(one_body),
        two_body=np.asarray(two_body),
        v_nn=float(mol.energy_nuc()),
        n_electrons=int(mol.nelectron),
        hf_energy=float(hf_energy),
        fci_energy=float(fci_energy),
        metadata={
            'molecule': str(molecule).lower(),
            'basis': basis,
            'bond_length': float(bond_length),
            'unit': unit,
            'n_electrons': int(mol.nelectron),
            'hf_energy': float(hf_energy),
            'source': 'pyscf rhf',
        },
    )


def write_integrals(spatial, path, fmt='json'):
    """Write integrals as spin-orbital JSON or as a spatial-orbital FCIDUMP"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == 'json':
        path.write_text(json.dumps(integrals_to_dict(spatial.to_spin_orbitals()), indent=2) + '\n')
    elif fmt == 'fcidump':
        *_, fcidump = _pyscf()
        fcidump.from_integrals(str(path), spatial.one_body, spatial.two_body,
                               spatial.n_orbitals, spatial.n_electrons, nuc=spatial.v_nn)
    else:
        raise IntegralsFormatError(f"format must be one of {INTEGRAL_FORMATS}, got {fmt!r}")
    return path


def bond_length_range(start, stop, step):
    """start, start + step, ... up to stop inclusive, rounded to 6 decimals"""
    if step <= 0 or stop < start:
        raise IntegralsFormatError(f"invalid bond-length range {start}:{stop}:{step}")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + k * step, 6) for k in range(count))


@dataclass(frozen=True)
class MoleculeSweep:
    """A diatomic at several bond lengths, one integrals file per geometry"""

    molecule: str
    bond_lengths: tuple
    directory: Path
    basis: str = 'sto-3g'
    unit: str = 'angstrom'

    def __post_init__(self):
        _atoms(self.molecule)
        if self.unit not in UNITS:
            raise IntegralsFormatError(f"unit must be one of {UNITS}, got {self.unit!r}")
        if not self.bond_lengths:
            raise IntegralsFormatError("a molecule sweep needs at least one bond length")
        object.__setattr__(self, 'bond_lengths', tuple(float(r) for r in self.bond_lengths))
        object.__setattr__(self, 'directory', Path(self.directory))

    @classmethod
    def from_mapping(cls, data, directory):
        """
        Build a sweep from a run-config ``molecule`` block

        ``bond_lengths`` is a list, or ``range: [start, stop, step]``.
        """
        if not isinstance(data, dict):
            raise IntegralsFormatError("molecule block must be a mapping")
        if 'bond_lengths' in data:
            lengths = data['bond_lengths']
            lengths = [lengths] if isinstance(lengths, (int, float)) else lengths
        elif 'range' in data:
            lengths = bond_length_range(*(float(v) for v in data['range']))
        else:
            raise IntegralsFormatError("molecule block needs bond_lengths or range")
        return cls(
            molecule=str(data.get('name', 'h2')).lower(),
            bond_lengths=tuple(lengths),
            directory=Path(directory),
            basis=str(data.get('basis', 'sto-3g')),
            unit=str(data.get('unit', 'angstrom')).lower(),
        )

    def label(self, bond_length):
        return sanitize_label(f"{self.molecule}_{self.basis.replace('-', '')}_{bond_length:g}")

    def paths(self):
        return [self.directory / f"{self.label(r)}.json" for r in self.bond_lengths]

    def ensure(self, path):
        """Generate the file for ``path`` if it belongs to this sweep and is missing"""
        path = Path(path)
        if path.is_file():
            return path
        for bond_length, target in zip(self.bond_lengths, self.paths()):
            if target == path:
                logger.info("Generating %s integrals at %g %s -> %s",
                            self.molecule, bond_length, self.unit, path)
                spatial = rhf_integrals(self.molecule, bond_length, self.basis, self.unit)
                return write_integrals(spatial, path)
        return path

    def to_dict(self):
        return {
            'name': self.molecule,
            'basis': self.basis,
            'unit': self.unit,
            'bond_lengths': list(self.bond_lengths),
            'directory': str(self.directory),
        }
