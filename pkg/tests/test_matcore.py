"""Tests for src.core.matcore"""

from fractions import Fraction

import numpy as np
import pytest

from src.config import config
from src.core.matcore import (
    bell_state,
    eig_sym,
    expand_operator,
    flatten_sym,
    hs_inner,
    identity,
    is_psd,
    is_symmetric,
    kron,
    kron_all,
    mat_exp,
    mat_inv_sqrt,
    mat_log,
    mat_sqrt,
    partial_trace,
    permute_factors,
    random_symmetric,
    sym_index,
    symmetric_basis,
    to_rational,
    trace,
    unflatten_sym,
)
from src.models import SubsystemShape, SymMat
from src.utils.errors import NonFiniteError, NotPositiveError, NotSymmetricError, ScalarKindError, ShapeError
from tests.conftest import random_state


class TestKron:
    def test_factor_one_is_slowest(self):
        a = np.array([[1, 2], [3, 4]])
        b = np.eye(2, dtype=int)
        k = kron(a, b)
        assert k[0, 2] == 2
        assert k[1, 3] == 2
        assert k[0, 1] == 0

    def test_exact_stays_exact(self):
        k = kron(to_rational(np.eye(2)), to_rational(np.array([[1, 0], [0, 2]])))
        assert k.dtype == object
        assert k[3, 3] == Fraction(2)

    def test_mixing_exact_and_float_fails(self):
        with pytest.raises(ScalarKindError):
            kron(to_rational(np.eye(2)), np.eye(2))

    def test_kron_all(self):
        z = np.diag([1, -1])
        assert np.array_equal(np.diag(kron_all(z, z, z)), [1, -1, -1, 1, -1, 1, 1, -1])

    def test_kron_all_needs_a_factor(self):
        with pytest.raises(ShapeError):
            kron_all()


class TestPartialTrace:
    def test_product_state_marginals(self, rng):
        a, b, c = (random_state(rng, 2) for _ in range(3))
        rho = kron_all(a, b, c)
        shape = SubsystemShape.qubits(3)
        np.testing.assert_allclose(partial_trace(rho, shape, [0]), a, atol=1e-14)
        np.testing.assert_allclose(partial_trace(rho, shape, [1]), b, atol=1e-14)
        np.testing.assert_allclose(partial_trace(rho, shape, [0, 2]), kron(a, c), atol=1e-14)

    def test_bell_state_marginal_is_maximally_mixed(self):
        marginal = partial_trace(bell_state(), SubsystemShape.qubits(2), [1])
        assert marginal.dtype == object
        assert marginal.tolist() == [[Fraction(1, 2), 0], [0, Fraction(1, 2)]]

    def test_keep_everything_returns_copy(self, rng):
        rho = random_state(rng, 4)
        out = partial_trace(rho, SubsystemShape.qubits(2), [1, 0])
        np.testing.assert_array_equal(out, rho)

    def test_unequal_local_dimensions(self, rng):
        a, b = random_state(rng, 2), random_state(rng, 3)
        shape = SubsystemShape((2, 3))
        np.testing.assert_allclose(partial_trace(kron(a, b), shape, [1]), b, atol=1e-14)

    @pytest.mark.parametrize("keep", [[], [3], [-1]])
    def test_bad_keep(self, keep):
        with pytest.raises(ShapeError):
            partial_trace(np.eye(8), SubsystemShape.qubits(3), keep)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            partial_trace(np.eye(4), SubsystemShape.qubits(3), [0])


class TestExpandAndPermute:
    def test_expand_matches_kron_in_order(self, rng):
        op = random_symmetric(rng, 2)
        shape = SubsystemShape.qubits(3)
        np.testing.assert_allclose(expand_operator(op, shape, [1]), kron_all(np.eye(2), op, np.eye(2)))

    def test_expand_reversed_support(self, rng):
        a, b = random_symmetric(rng, 2), random_symmetric(rng, 2)
        shape = SubsystemShape.qubits(3)
        expected = kron_all(b, np.eye(2), a)
        np.testing.assert_allclose(expand_operator(kron(a, b), shape, [2, 0]), expected, atol=1e-14)

    def test_expand_rejects_repeated_factor(self):
        with pytest.raises(ShapeError):
            expand_operator(np.eye(4), SubsystemShape.qubits(3), [1, 1])

    def test_permute_swaps_factors(self, rng):
        a, b = random_symmetric(rng, 2), random_symmetric(rng, 3)
        swapped = permute_factors(kron(a, b), SubsystemShape((2, 3)), [1, 0])
        np.testing.assert_allclose(swapped, kron(b, a), atol=1e-14)


class TestSpectral:
    @pytest.mark.parametrize("method", ["eigh", "jacobi"])
    def test_reconstruction_and_order(self, rng, method):
        m = random_symmetric(rng, 6)
        decomp = eig_sym(m, method=method)
        assert np.all(np.diff(decomp.values) <= 0)
        np.testing.assert_allclose(decomp.reconstruct(), m, atol=1e-12)
        np.testing.assert_allclose(decomp.vectors.T @ decomp.vectors, np.eye(6), atol=1e-12)

    def test_jacobi_agrees_with_eigh(self, rng):
        m = random_symmetric(rng, 8)
        np.testing.assert_allclose(eig_sym(m, 'jacobi').values, eig_sym(m, 'eigh').values, atol=1e-12)

    def test_non_finite(self):
        with pytest.raises(NonFiniteError):
            eig_sym(np.array([[1.0, np.nan], [np.nan, 1.0]]))

    def test_exp_log_inverse(self, rng):
        rho = random_state(rng, 4)
        np.testing.assert_allclose(mat_exp(mat_log(rho)), rho, atol=1e-12)

    def test_sqrt_squares_back(self, rng):
        rho = random_state(rng, 4)
        root = mat_sqrt(rho)
        np.testing.assert_allclose(root @ root, rho, atol=1e-12)
        inv = mat_inv_sqrt(rho)
        np.testing.assert_allclose(inv @ rho @ inv, np.eye(4), atol=1e-9)

    def test_log_needs_positive_definite(self):
        with pytest.raises(NotPositiveError):
            mat_log(np.diag([1.0, 0.0]))

    def test_sqrt_rejects_negative(self):
        with pytest.raises(NotPositiveError):
            mat_sqrt(np.diag([1.0, -0.5]))

    def test_sqrt_of_singular_psd(self):
        np.testing.assert_allclose(mat_sqrt(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]))


class TestPredicatesAndCoordinates:
    def test_trace_and_inner_exact(self):
        rho = bell_state()
        assert trace(rho) == 1
        assert hs_inner(rho, rho) == 1
        assert hs_inner(rho, identity(4, exact=True)) == 1

    def test_is_symmetric(self):
        assert is_symmetric(np.eye(3))
        assert not is_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
        assert not is_symmetric(np.ones((2, 3)))

    def test_is_psd(self):
        assert is_psd(np.diag([1.0, 0.0]))
        assert not is_psd(np.diag([1.0, -1e-3]))

    def test_flatten_order(self):
        m = np.array([[1, 2, 4], [2, 3, 5], [4, 5, 6]])
        assert flatten_sym(m).tolist() == [1, 2, 3, 4, 5, 6]
        np.testing.assert_array_equal(unflatten_sym(flatten_sym(m)), m)

    @pytest.mark.parametrize("i,j,expected", [(0, 0, 0), (1, 0, 1), (1, 1, 2), (2, 0, 3), (0, 2, 3), (7, 7, 35)])
    def test_sym_index(self, i, j, expected):
        assert sym_index(i, j) == expected

    def test_unflatten_bad_length(self):
        with pytest.raises(ShapeError):
            unflatten_sym(np.arange(5), 3)

    def test_symmetric_basis_spans(self):
        basis = symmetric_basis(3)
        assert len(basis) == 6
        stacked = np.array([flatten_sym(b) for b in basis])
        assert np.linalg.matrix_rank(stacked) == 6


class TestDimensionLimit:
    @pytest.fixture
    def low_limit(self):
        saved = config.snapshot()
        config.set('matcore.max_dim', 4)
        yield
        config._config = saved

    def test_kron_above_limit(self):
        with pytest.raises(ShapeError) as info:
            kron(np.eye(16), np.eye(8))
        assert info.value.context == {'n': 128, 'limit': 64}

    def test_eig_sym_above_limit(self):
        with pytest.raises(ShapeError):
            eig_sym(np.eye(65))

    def test_partial_trace_above_limit(self):
        with pytest.raises(ShapeError):
            partial_trace(np.eye(128), SubsystemShape.qubits(7), [0])

    def test_expand_above_limit(self):
        with pytest.raises(ShapeError):
            expand_operator(np.eye(2), SubsystemShape.qubits(7), [3])

    def test_limit_at_boundary(self):
        assert kron(np.eye(8), np.eye(8)).shape == (64, 64)
        assert eig_sym(np.eye(64)).values.shape == (64,)

    def test_configured_limit(self, low_limit):
        assert kron(np.eye(2), np.eye(2)).shape == (4, 4)
        with pytest.raises(ShapeError):
            kron(np.eye(2), np.eye(4))
        with pytest.raises(ShapeError):
            partial_trace(np.eye(8), SubsystemShape.qubits(3), [0])


class TestSymMat:
    def test_rejects_asymmetric_rational(self):
        with pytest.raises(NotSymmetricError):
            SymMat(np.array([[Fraction(1), Fraction(2)], [Fraction(3), Fraction(1)]], dtype=object))

    def test_round_trip_document(self):
        m = SymMat(bell_state())
        doc = m.to_dict()
        assert doc['scalar'] == 'rational'
        assert doc['rows'][0][0] == '1/2'
        again = SymMat.from_dict(doc)
        assert np.array_equal(again.matrix, m.matrix)

    def test_triangle_order(self):
        m = SymMat(np.array([[1.0, 2.0], [2.0, 3.0]]))
        assert m.triangle() == [1.0, 2.0, 3.0]
