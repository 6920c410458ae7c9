"""Tests for src.core.pauli"""

from fractions import Fraction

import numpy as np
import pytest

from src.core.matcore import kron_all
from src.core.pauli import (
    commutes,
    conjugating_word,
    contains_minus_identity,
    dense,
    gf2_rank,
    gf2_solve,
    graph_hamiltonians,
    product,
    projector,
    simultaneous_diag,
    stab_dimension,
    stabilizer_group,
    symplectic_product,
)
from src.models import PauliWord
from src.utils.errors import ParseError, ShapeError, StabilizerError
from src.varieties.toric import hypercube_matrix


def words(*texts):
    return [PauliWord.parse(t) for t in texts]


class TestPauliWord:
    def test_parse_and_render(self):
        w = PauliWord.parse("-XZ")
        assert w.sign == -1
        assert w.x_bits == (1, 0)
        assert w.z_bits == (0, 1)
        assert str(w) == "-XZ"

    def test_parse_y(self):
        assert PauliWord.parse("Y").has_y

    @pytest.mark.parametrize("text", ["", "XQ", "+"])
    def test_parse_rejects(self, text):
        with pytest.raises(ParseError):
            PauliWord.parse(text)

    def test_vector_round_trip(self):
        w = PauliWord.parse("XZIY")
        assert PauliWord.from_vector(w.vector()) == w


class TestSymplectic:
    @pytest.mark.parametrize("p,q,expected", [
        ("X", "Z", 1),
        ("X", "X", 0),
        ("XZ", "ZX", 0),
        ("XI", "ZZ", 1),
        ("Y", "Z", 1),
    ])
    def test_product(self, p, q, expected):
        assert symplectic_product(PauliWord.parse(p), PauliWord.parse(q)) == expected

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            commutes(PauliWord.parse("X"), PauliWord.parse("XX"))

    def test_graph_hamiltonians_commute(self, fig1):
        hs = graph_hamiltonians(fig1)
        assert [str(h) for h in hs] == ["XZZI", "ZXZZ", "ZZXI", "IZIX"]
        assert all(commutes(p, q) for p in hs for q in hs)

    def test_chain3_hamiltonians(self, chain3):
        assert [str(h) for h in graph_hamiltonians(chain3)] == ["XZI", "ZXZ", "IZX"]


class TestPhases:
    def test_xz_is_minus_i_y(self):
        word, e = product(words("X", "Z"))
        assert word.letters() == "Y"
        assert e == 3

    def test_dense_matches_kron(self):
        x = np.array([[0, 1], [1, 0]])
        z = np.diag([1, -1])
        np.testing.assert_array_equal(dense(PauliWord.parse("-XZ")), -kron_all(x, z))

    def test_dense_rejects_y(self):
        with pytest.raises(StabilizerError):
            dense(PauliWord.parse("XY"))

    @pytest.mark.parametrize("gens,expected", [
        (["Z", "-Z"], True),
        (["ZZ", "XX"], False),
        (["XX", "ZZ", "YY"], True),
        (["XX", "ZZ", "-YY"], False),
    ])
    def test_contains_minus_identity(self, gens, expected):
        assert contains_minus_identity(words(*gens)) is expected

    def test_dense_agrees_with_bookkeeping(self):
        assert contains_minus_identity(words("XZ", "-XZ"), brute_force=True)


class TestGF2:
    def test_rank(self):
        m = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        assert gf2_rank(m) == 2

    def test_solve(self):
        m = np.array([[1, 1, 0], [0, 1, 1]])
        s = gf2_solve(m, [1, 0])
        assert np.array_equal((m @ s) % 2, [1, 0])

    def test_inconsistent(self):
        m = np.array([[1, 1], [1, 1]])
        assert gf2_solve(m, [1, 0]) is None


class TestStabilizerGroups:
    def test_anticommuting(self):
        with pytest.raises(StabilizerError):
            stabilizer_group(words("X", "Z"))

    def test_dependent(self):
        with pytest.raises(StabilizerError):
            stabilizer_group(words("XI", "IX", "XX"))

    def test_minus_identity(self):
        with pytest.raises(StabilizerError):
            stabilizer_group(words("XX", "ZZ", "YY"))

    @pytest.mark.parametrize("gens,dim", [
        (["ZZI", "IZZ"], 2),
        (["XZI", "ZXZ", "IZX"], 1),
        (["ZII"], 4),
        (["-ZZ"], 2),
    ])
    def test_dimension(self, gens, dim):
        group = stabilizer_group(words(*gens))
        assert stab_dimension(group) == dim
        assert dim == 2 ** group.k

    def test_projector_is_exact_and_idempotent(self):
        group = stabilizer_group(words("ZZ"))
        p = projector(group, [0])
        assert p.dtype == object
        assert np.all(p.dot(p) == p)
        assert np.trace(p) == Fraction(2)

    def test_projectors_sum_to_identity(self):
        group = stabilizer_group(words("XZ", "ZX"))
        total = sum(projector(group, [a, b]) for a in (0, 1) for b in (0, 1))
        assert np.all(total == np.eye(4, dtype=int))

    @pytest.mark.parametrize("i", [0, 1, 2])
    def test_conjugating_word(self, chain3, i):
        group = stabilizer_group(graph_hamiltonians(chain3))
        w = conjugating_word(group, i)
        for j, g in enumerate(group.gens):
            assert commutes(w, g) == (j != i)


class TestSimultaneousDiag:
    def test_chain3_model(self, chain3_model):
        assert chain3_model.dim == 8
        assert chain3_model.is_uniform
        assert np.all(chain3_model.norms == 8)
        assert set(np.unique(chain3_model.O)) <= {-1, 1}
        np.testing.assert_array_equal(chain3_model.A, hypercube_matrix(3))

    def test_diagonalises_every_hamiltonian(self, fig1):
        gens = graph_hamiltonians(fig1)
        model = simultaneous_diag(gens)
        for i, g in enumerate(gens):
            np.testing.assert_array_equal(model.O.T @ dense(g) @ model.O, np.diag(model.norms * model.A[i]))

    def test_fewer_generators_than_qubits(self):
        model = simultaneous_diag(words("ZZI", "IZZ"))
        assert model.A.shape == (2, 8)
        assert model.O.shape == (8, 8)
        assert np.array_equal(model.O.T @ model.O, np.diag(model.norms))

    def test_orthonormal_basis(self, chain3_model):
        u = chain3_model.orthonormal_basis()
        np.testing.assert_allclose(u.T @ u, np.eye(8), atol=1e-14)

    def test_document(self, chain3_model):
        doc = chain3_model.to_dict()
        assert doc['gens'] == ["XZI", "ZXZ", "IZX"]
        assert len(doc['O']) == 8
