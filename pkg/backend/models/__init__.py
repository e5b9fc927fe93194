"""
Models package for the VQE toolkit
Contains the Pauli algebra, fermion mapping, tapering, simulation, SPSA and
exact-solver implementations, and the experiment sweep driver
"""

from .pauli_core import PauliSum, PauliTerm, SymplecticVector
from .fermion import MolecularIntegrals, build_qubit_hamiltonian, load_integrals
from .tapering import SymmetryGroup, TaperTriple, select_ground_sector, taper
from .simulator import EntanglerKind, StateVector, expectation, prepare_trial_state
from .optimizer import SpsaConfig, spsa_run
from .exact_solver import ground_energy
from .experiment import RunConfig, run_experiment
from .molecules import MoleculeSweep, rhf_integrals

__all__ = [
    'PauliSum', 'PauliTerm', 'SymplecticVector',
    'MolecularIntegrals', 'build_qubit_hamiltonian', 'load_integrals',
    'SymmetryGroup', 'TaperTriple', 'select_ground_sector', 'taper',
    'EntanglerKind', 'StateVector', 'expectation', 'prepare_trial_state',
    'SpsaConfig', 'spsa_run',
    'ground_energy',
    'RunConfig', 'run_experiment',
    'MoleculeSweep', 'rhf_integrals',
]
