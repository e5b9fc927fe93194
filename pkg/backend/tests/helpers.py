"""Builders shared by the test modules"""

import itertools
import json

import numpy as np

from models.pauli_core import PauliSum, PauliTerm, encode_symplectic, symplectic_product

H2_REFERENCE = -1.1372701214235259


def write_integrals(path, m, v_nn=0.0, h_pq=None, h_pqrs=None, **extra):
    """Write a spin-orbital integrals JSON file and return its path"""
    data = {
        'n_spin_orbitals': m,
        'V_nn': v_nn,
        'h_pq': np.zeros((m, m)).tolist() if h_pq is None else h_pq,
        'h_pqrs': np.zeros((m,) * 4).tolist() if h_pqrs is None else h_pqrs,
        'metadata': {'molecule': 'test'},
    }
    data.update(extra)
    path.write_text(json.dumps(data))
    return path


def random_axes(rng, m):
    return ''.join(rng.choice(list('IXYZ'), size=m))


def random_symmetry_generators(rng, m, r):
    """
    r independent commuting Pauli strings with phase +1

    Independent Z strings are relabelled qubit by qubit with a random
    bijection of {X, Y, Z}, which keeps them commuting and independent.
    """
    while True:
        rows = rng.integers(0, 2, size=(r, m))
        if _gf2_rank(rows) == r:
            break
    relabel = [dict(zip('XYZ', rng.permutation(list('XYZ')))) for _ in range(m)]
    generators = []
    for row in rows:
        axes = ''.join(relabel[q]['Z'] if bit else 'I' for q, bit in enumerate(row))
        generators.append(PauliTerm(axes))
    return tuple(generators)


def _gf2_rank(rows):
    rows = [int(''.join(map(str, row)), 2) for row in rows]
    rank = 0
    for bit in reversed(range(max(rows).bit_length())):
        pivot = next((r for r in rows if r >> bit & 1), None)
        if pivot is None:
            continue
        rows = [r ^ pivot if r >> bit & 1 else r for r in rows if r != pivot]
        rank += 1
    return rank


def random_symmetric_hamiltonian(rng, generators, m, n_terms=8):
    """Random real PauliSum whose every term commutes with every generator"""
    vectors = [encode_symplectic(g) for g in generators]
    terms = {}
    candidates = [''.join(p) for p in itertools.product('IXYZ', repeat=m)]
    rng.shuffle(candidates)
    for axes in candidates:
        v = encode_symplectic(PauliTerm(axes))
        if all(symplectic_product(v, g) == 0 for g in vectors):
            terms[axes] = rng.normal()
        if len(terms) == n_terms:
            break
    return PauliSum(terms, m)


def random_commuting_generators(rng, m, r, max_tries=2000):
    """
    r independent commuting Pauli strings with phase +1, axes drawn freely

    Random non-identity strings are kept when they commute with every string
    already chosen and lie outside their span, so one qubit can carry X, Y
    and Z across different generators.
    """
    while True:
        chosen, vectors = [], []
        for _ in range(max_tries):
            if len(chosen) == r:
                break
            axes = random_axes(rng, m)
            if set(axes) == {'I'}:
                continue
            v = encode_symplectic(PauliTerm(axes))
            if any(symplectic_product(v, w) for w in vectors):
                continue
            if _gf2_rank([w.to_array() for w in vectors + [v]]) <= len(vectors):
                continue
            chosen.append(PauliTerm(axes))
            vectors.append(v)
        if len(chosen) == r:
            return tuple(chosen)
