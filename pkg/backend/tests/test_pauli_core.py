import itertools
from functools import reduce

import numpy as np
import pytest

from models.pauli_core import (
    PAULI_MATRICES, PauliSum, PauliTerm, SymplecticVector, decode_symplectic,
    decompose_dense, encode_symplectic, multiply, symplectic_product, to_dense,
)
from utils.errors import NonHermitianError, PauliAlgebraError
from utils.pauli_io import from_json, from_text, load_pauli_sum, save_pauli_sum, to_json, to_text
from tests.helpers import random_axes


def kron_dense(axes):
    return reduce(np.kron, [PAULI_MATRICES[a] for a in axes])


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


class TestPauliTerm:

    @pytest.mark.parametrize('label, axes, phase', [
        ('XZ', 'XZ', 0),
        ('-IY', 'IY', 2),
        ('iZZ', 'ZZ', 1),
        ('-iXX', 'XX', 3),
        ('+Y', 'Y', 0),
    ])
    def test_from_label(self, label, axes, phase):
        term = PauliTerm.from_label(label)
        assert term.axes == axes
        assert term.phase == phase

    def test_str_round_trips_label(self):
        for label in ('XZ', '-IY', 'iZZ', '-iXX'):
            assert str(PauliTerm.from_label(label)) == label

    @pytest.mark.parametrize('axes', ['', 'XQ', 'xz'])
    def test_rejects_bad_axes(self, axes):
        with pytest.raises(PauliAlgebraError):
            PauliTerm(axes)


class TestSymplectic:

    def test_encode_example(self):
        v = encode_symplectic(PauliTerm('IZXY'))
        assert v.x == (0, 0, 1, 1)
        assert v.z == (0, 1, 0, 1)
        assert str(v) == '(0011|0101)'

    def test_encode_identity_and_yy(self):
        assert str(encode_symplectic(PauliTerm('IIII'))) == '(0000|0000)'
        assert str(encode_symplectic(PauliTerm('YY'))) == '(11|11)'

    def test_encode_drops_phase(self):
        assert encode_symplectic(PauliTerm('XY', 3)) == encode_symplectic(PauliTerm('XY'))

    def test_decode_examples(self):
        term = decode_symplectic(SymplecticVector((0, 0, 1, 1), (0, 1, 0, 1)))
        assert (term.axes, term.phase) == ('IZXY', 0)
        assert decode_symplectic(SymplecticVector((0, 0), (0, 0))).axes == 'II'
        y = decode_symplectic(SymplecticVector((1,), (1,)))
        assert (y.axes, y.phase) == ('Y', 0)

    def test_round_trips(self, rng):
        for _ in range(20):
            axes = random_axes(rng, 5)
            assert decode_symplectic(encode_symplectic(PauliTerm(axes))).axes == axes
            v = SymplecticVector.from_array(rng.integers(0, 2, size=10))
            assert encode_symplectic(decode_symplectic(v)) == v

    def test_halves_must_match(self):
        with pytest.raises(PauliAlgebraError):
            SymplecticVector((0, 1), (1,))

    def test_addition_is_xor(self):
        a = SymplecticVector((1, 0), (1, 1))
        b = SymplecticVector((1, 1), (0, 1))
        assert a + b == SymplecticVector((0, 1), (1, 0))

    def test_product_examples(self):
        x = encode_symplectic(PauliTerm('X'))
        z = encode_symplectic(PauliTerm('Z'))
        assert symplectic_product(x, z) == 1
        assert symplectic_product(x, x) == 0

    def test_product_matches_dense_commutator(self):
        a, b = PauliTerm('IZXY'), PauliTerm('XZYI')
        da, db = kron_dense(a.axes), kron_dense(b.axes)
        expected = 0 if np.allclose(da @ db, db @ da) else 1
        assert symplectic_product(encode_symplectic(a), encode_symplectic(b)) == expected

    def test_all_two_qubit_pairs(self):
        labels = [''.join(p) for p in itertools.product('IXYZ', repeat=2)]
        for a, b in itertools.product(labels, repeat=2):
            da, db = kron_dense(a), kron_dense(b)
            bit = symplectic_product(encode_symplectic(PauliTerm(a)), encode_symplectic(PauliTerm(b)))
            if bit == 0:
                assert np.array_equal(da @ db, db @ da), (a, b)
            else:
                assert np.array_equal(da @ db, -(db @ da)), (a, b)

    def test_length_mismatch(self):
        with pytest.raises(PauliAlgebraError):
            symplectic_product(encode_symplectic(PauliTerm('X')), encode_symplectic(PauliTerm('XX')))


class TestMultiply:

    @pytest.mark.parametrize('a, b, expected', [
        ('X', 'Y', 'iZ'),
        ('Y', 'X', '-iZ'),
        ('Y', 'Z', 'iX'),
        ('Z', 'X', 'iY'),
        ('X', 'X', 'I'),
    ])
    def test_single_qubit_table(self, a, b, expected):
        assert multiply(PauliTerm(a), PauliTerm(b)) == PauliTerm.from_label(expected)

    def test_matches_dense_product(self):
        p, q = PauliTerm('XZ'), PauliTerm('ZY')
        product = multiply(p, q)
        assert np.allclose(to_dense(product), kron_dense('XZ') @ kron_dense('ZY'))

    def test_associative_and_phase_exact(self, rng):
        for m in (1, 2, 3):
            for _ in range(10):
                p, q, s = (PauliTerm(random_axes(rng, m), int(rng.integers(4))) for _ in range(3))
                left = multiply(multiply(p, q), s)
                assert left == multiply(p, multiply(q, s))
                assert np.allclose(to_dense(left), to_dense(p) @ to_dense(q) @ to_dense(s))

    def test_length_mismatch(self):
        with pytest.raises(PauliAlgebraError):
            multiply(PauliTerm('X'), PauliTerm('XY'))


class TestPauliSum:

    def test_prunes_small_coefficients(self):
        h = PauliSum({'XX': 1e-13, 'ZZ': 0.5})
        assert dict(h.terms) == {'ZZ': 0.5}

    def test_arithmetic(self):
        a = PauliSum({'X': 1.0})
        b = PauliSum({'Y': 1.0})
        assert (a * b).allclose(PauliSum({'Z': 1j}))
        assert (a + b - a).allclose(b)
        assert (2 * a + 1).allclose(PauliSum({'X': 2.0, 'I': 1.0}))
        assert len(a - a) == 0

    def test_from_terms_merges_duplicates(self):
        h = PauliSum.from_terms([(0.5, 'ZI'), (0.25, PauliTerm('ZI', 2)), (1.0, 'IZ')])
        assert h.allclose(PauliSum({'ZI': 0.25, 'IZ': 1.0}))

    def test_hermitian_flag(self):
        assert PauliSum({'X': 1.0, 'Z': -2.0}).is_hermitian
        assert not PauliSum({'X': 1j}).is_hermitian

    def test_real_part_refuses_large_residue(self):
        with pytest.raises(NonHermitianError):
            PauliSum({'X': 1 + 1e-6j}).real_part()
        assert PauliSum({'X': 1 + 1e-13j}).real_part().is_hermitian

    def test_mixed_lengths_rejected(self):
        with pytest.raises(PauliAlgebraError):
            PauliSum({'X': 1.0, 'XX': 1.0})
        with pytest.raises(PauliAlgebraError):
            PauliSum({'X': 1.0}) + PauliSum({'XX': 1.0})

    def test_scalar_sum(self):
        scalar = PauliSum({'': 3.0}, 0)
        assert scalar.num_qubits == 0
        assert (scalar * scalar).coefficient('') == 9.0


class TestDense:

    def test_z(self):
        assert np.array_equal(to_dense(PauliTerm('Z')), np.diag([1, -1]))

    def test_identity(self):
        assert np.array_equal(to_dense(PauliTerm('II')), np.eye(4))

    def test_sigma_plus_times_z(self):
        h = PauliSum({'XZ': 0.5, 'YZ': 0.5j})
        sigma_plus = np.array([[0, 1], [0, 0]])
        assert np.allclose(to_dense(h), np.kron(sigma_plus, np.diag([1, -1])))

    def test_matches_kronecker_products(self, rng):
        for m in (1, 2, 3):
            axes = random_axes(rng, m)
            assert np.allclose(to_dense(PauliTerm(axes, 1)), 1j * kron_dense(axes))

    def test_size_guard(self):
        with pytest.raises(PauliAlgebraError):
            to_dense(PauliTerm('Z' * 15))


class TestDecompose:

    def test_z_and_identity(self):
        assert decompose_dense(np.diag([1.0, -1.0])).allclose(PauliSum({'Z': 1.0}))
        assert decompose_dense(np.eye(2)).allclose(PauliSum({'I': 1.0}))

    def test_random_hermitian_round_trip(self, rng):
        for _ in range(50):
            m = int(rng.integers(1, 5))
            matrix = random_hermitian(rng, 2 ** m)
            h = decompose_dense(matrix, m)
            assert h.num_qubits == m
            assert h.is_hermitian
            assert np.max(np.abs(to_dense(h) - matrix)) < 1e-10

    def test_non_hermitian_is_exact_too(self, rng):
        matrix = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        assert np.allclose(to_dense(decompose_dense(matrix)), matrix)

    def test_inverts_to_dense(self, rng):
        for m in (1, 2, 3, 4):
            h = PauliSum({random_axes(rng, m): rng.normal() for _ in range(6)}, m)
            assert decompose_dense(to_dense(h)).allclose(h, atol=1e-12)

    @pytest.mark.parametrize('shape', [(3, 3), (2, 4), (6, 6)])
    def test_bad_dimensions(self, shape):
        with pytest.raises(PauliAlgebraError):
            decompose_dense(np.zeros(shape))

    def test_qubit_count_must_agree(self):
        with pytest.raises(PauliAlgebraError):
            decompose_dense(np.eye(4), 3)


class TestPauliIO:

    def test_json_form(self, tmp_path):
        h = PauliSum({'IZXY': 0.5, 'ZZII': -1.25})
        data = to_json(h)
        assert data['m'] == 4
        assert {'re': 0.5, 'im': 0.0, 'axes': 'IZXY'} in data['terms']
        path = save_pauli_sum(h, tmp_path / 'h.json')
        assert load_pauli_sum(path).allclose(h)

    def test_text_form(self, tmp_path):
        h = from_text("0.5 0.0 IZXY\n# comment\n-1.0 0.25 ZZII\n")
        assert h.coefficient('ZZII') == complex(-1.0, 0.25)
        path = save_pauli_sum(h, tmp_path / 'h.txt')
        assert load_pauli_sum(path).allclose(h)
        assert to_text(h).startswith('# m=4')

    def test_scalar_text_form(self):
        h = PauliSum({'': 2.5}, 0)
        assert from_text(to_text(h)).allclose(h)

    def test_malformed(self):
        with pytest.raises(PauliAlgebraError):
            from_text("0.5 IZXY\n")
        with pytest.raises(PauliAlgebraError):
            from_json({'terms': []})
