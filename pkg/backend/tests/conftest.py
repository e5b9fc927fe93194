from pathlib import Path

import numpy as np
import pytest

from models.fermion import build_qubit_hamiltonian, load_integrals

DATA_DIR = Path(__file__).resolve().parent.parent / 'data' / 'integrals'
H2_JSON = DATA_DIR / 'h2_sto3g_0.7414.json'
H2_FCIDUMP = DATA_DIR / 'h2_sto3g_0.7414.fcidump'


@pytest.fixture(scope='session')
def h2_path():
    return H2_JSON


@pytest.fixture(scope='session')
def h2_fcidump_path():
    return H2_FCIDUMP


@pytest.fixture(scope='session')
def h2_integrals():
    return load_integrals(H2_JSON)


@pytest.fixture(scope='session')
def h2_hamiltonian(h2_integrals):
    return build_qubit_hamiltonian(h2_integrals)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
