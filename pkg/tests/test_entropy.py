"""Tests for src.core.entropy"""

import math

import numpy as np
import pytest

from src.core.entropy import gibbs_entropy, qcmi, rel_entropy, von_neumann
from src.core.matcore import bell_state, kron, kron_all
from src.models import SubsystemShape
from src.utils.errors import NotPositiveError, ShapeError
from tests.conftest import random_state


class TestVonNeumann:
    @pytest.mark.parametrize("p", np.linspace(0.05, 0.95, 7))
    def test_binary(self, p):
        expected = -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
        assert von_neumann(np.diag([p, 1 - p])).value == pytest.approx(expected, abs=1e-12)

    def test_maximally_mixed(self):
        report = von_neumann(np.eye(4) / 4)
        assert report.value == pytest.approx(2.0, abs=1e-12)
        assert report.rank_used == 4

    def test_pure_state(self):
        report = von_neumann(bell_state())
        assert abs(report.value) < 1e-12
        assert report.rank_used == 1

    def test_trace_check(self):
        with pytest.raises(NotPositiveError):
            von_neumann(np.eye(2))
        assert von_neumann(np.eye(2) / 3, check_trace=False).rank_used == 2

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(NotPositiveError):
            von_neumann(np.diag([1.1, -0.1]))


class TestQCMI:
    def test_mutual_information_of_bell_state(self):
        assert qcmi(bell_state(), SubsystemShape.qubits(2), [0], [1]) == pytest.approx(2.0, abs=1e-12)

    def test_product_state_is_zero(self, rng):
        rho = kron_all(*(random_state(rng, 2) for _ in range(3)))
        assert abs(qcmi(rho, SubsystemShape.qubits(3), [0], [2], [1])) < 1e-10

    def test_markov_chain_of_classical_states(self):
        # Z1 - Z2 - Z3 classical chain p(a)p(b|a)p(c|b)
        p = np.zeros(8)
        pa = [0.3, 0.7]
        pba = [[0.9, 0.1], [0.2, 0.8]]
        pcb = [[0.6, 0.4], [0.25, 0.75]]
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    p[4 * a + 2 * b + c] = pa[a] * pba[a][b] * pcb[b][c]
        assert abs(qcmi(np.diag(p), SubsystemShape.qubits(3), [0], [2], [1])) < 1e-12

    def test_strong_subadditivity(self, rng):
        shape = SubsystemShape.qubits(3)
        values = [qcmi(random_state(rng, 8), shape, [0], [2], [1]) for _ in range(1000)]
        assert min(values) >= -1e-7

    @pytest.mark.parametrize("a,c,b", [([0], [0], [1]), ([], [1], [2]), ([0], [1], [1])])
    def test_bad_subsets(self, a, c, b):
        with pytest.raises(ShapeError):
            qcmi(np.eye(8) / 8, SubsystemShape.qubits(3), a, c, b)


class TestRelEntropy:
    @pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 0.8])
    def test_against_diagonal(self, p):
        expected = -1 - 0.5 * math.log2(p * (1 - p))
        assert rel_entropy(np.eye(2) / 2, np.diag([p, 1 - p])) == pytest.approx(expected, abs=1e-12)

    def test_zero_on_equal_states(self, rng):
        rho = random_state(rng, 4)
        assert abs(rel_entropy(rho, rho)) < 1e-10

    def test_support_violation_is_infinite(self):
        assert rel_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf

    def test_pure_against_mixed(self):
        assert rel_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)

    def test_generalized_form(self):
        a, b = 1.0, 2.0
        expected = (2 * a * math.log(a / b) - 2 * a + 2 * b) / math.log(2)
        assert rel_entropy(a * np.eye(2), b * np.eye(2), generalized=True) == pytest.approx(expected, abs=1e-12)

    def test_generalized_agrees_on_states(self, rng):
        rho, sigma = random_state(rng, 4), random_state(rng, 4)
        assert rel_entropy(rho, sigma, generalized=True) == pytest.approx(rel_entropy(rho, sigma), abs=1e-10)

    def test_non_negative(self, rng):
        for _ in range(5):
            assert rel_entropy(random_state(rng, 4), random_state(rng, 4)) >= -1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            rel_entropy(np.eye(2) / 2, np.eye(4) / 4)


class TestGibbsEntropy:
    def test_identity(self):
        assert gibbs_entropy(np.eye(2)) == pytest.approx(2.0)

    def test_diagonal(self):
        assert gibbs_entropy(np.diag([math.e, 1.0])) == pytest.approx(1.0)

    def test_kron_additivity_on_traces(self, rng):
        a = random_state(rng, 2)
        rho = kron(a, np.eye(2) / 2)
        s_nats = von_neumann(rho).value * math.log(2)
        assert gibbs_entropy(rho) == pytest.approx(s_nats + 1.0, abs=1e-12)
