"""Tests for src.varieties.samplers"""

import numpy as np
import pytest

from src.core import builtin_graph, path_graph, qcmi, separator_triples
from src.core.matcore import kron, mat_exp, unflatten_sym
from src.models import SubsystemShape
from src.utils.errors import IncompatibleMarginalsError, SamplingError, ShapeError
from src.utils.helpers import derive_rng
from src.varieties.samplers import (
    DecomposableParametrisation,
    ExpSymParametrisation,
    LSSMParametrisation,
    QCMIParametrisation,
    commutant_kernel,
    commuting_tree_state,
    gibbs_sample_commuting_tree,
    gibbs_sample_decomposable,
    gibbs_sample_lssm,
    lssm_basis,
    manifold_dim,
    marginal_pack,
    normalise_state,
    petz_chain3,
    petz_chain3_primed,
    petz_tree,
    sample_petz,
    sample_qcmi_chain3,
)


class TestQCMISampler:
    def test_shape_and_meta(self):
        samples = sample_qcmi_chain3(seed=1, count=3)
        assert samples.ambient_dim == 36
        assert samples.count == 3
        assert samples.meta['sampler'] == 'qcmi'
        assert samples.meta['seed'] == 1

    def test_same_seed_same_points(self):
        a = sample_qcmi_chain3(seed=7, count=4)
        b = sample_qcmi_chain3(seed=7, count=4)
        np.testing.assert_array_equal(a.points, b.points)

    def test_independent_of_batch_and_threads(self):
        small = sample_qcmi_chain3(seed=7, count=2)
        large = sample_qcmi_chain3(seed=7, count=5, threads=3)
        np.testing.assert_array_equal(small.points, large.points[:2])

    def test_positive_points_are_markov_states(self):
        samples = sample_qcmi_chain3(seed=5, count=20, positive=True)
        assert samples.meta['non_state'] == []
        for m in samples.matrices():
            rho = normalise_state(m)
            assert abs(qcmi(rho, SubsystemShape.qubits(3), [0], [2], [1])) < 1e-7

    def test_diagonal_structure(self):
        for m in sample_qcmi_chain3(seed=2, count=2, structure='diagonal').matrices():
            np.testing.assert_array_equal(m, np.diag(np.diag(m)))

    def test_unknown_structure(self):
        with pytest.raises(ShapeError):
            sample_qcmi_chain3(seed=0, structure='twisted')

    def test_count_must_be_positive(self):
        with pytest.raises(SamplingError):
            sample_qcmi_chain3(seed=0, count=0)

    def test_commutant_of_generic_matrix(self, rng):
        m = rng.uniform(-1, 1, (4, 4))
        kernel = commutant_kernel(m + m.T)
        assert kernel.shape == (3, 4, 4)
        for n in kernel:
            left, right = kron(m + m.T, np.eye(2)), kron(np.eye(2), n)
            np.testing.assert_allclose(left @ right, right @ left, atol=1e-10)


class TestPetz:
    @pytest.mark.parametrize("name", ["chain3", "chain4"])
    def test_recovers_commuting_tree_states(self, name):
        g = builtin_graph(name)
        for i in range(50):
            rho = commuting_tree_state(g, derive_rng(11, i))
            pack = marginal_pack(rho, g)
            plain = petz_tree(g, pack)
            primed = petz_tree(g, pack, primed=True)
            assert np.linalg.norm(plain - rho) < 1e-6
            assert np.linalg.norm(plain - primed) < 1e-8

    def test_chain3_forms_agree_on_markov_state(self, chain3):
        rho = commuting_tree_state(chain3, derive_rng(12, 0))
        pack = marginal_pack(rho, chain3)
        plain = petz_chain3(pack.two_body[(1, 2)], pack.two_body[(2, 3)])
        primed = petz_chain3_primed(pack.two_body[(1, 2)], pack.two_body[(2, 3)])
        np.testing.assert_allclose(plain, rho, atol=1e-10)
        np.testing.assert_allclose(plain, primed, atol=1e-10)

    def test_claw_recovery(self):
        g = builtin_graph("claw")
        rho = commuting_tree_state(g, derive_rng(13, 0))
        np.testing.assert_allclose(petz_tree(g, marginal_pack(rho, g)), rho, atol=1e-9)

    def test_chain5_recovery(self):
        g = path_graph(5)
        rho = commuting_tree_state(g, derive_rng(14, 0))
        np.testing.assert_allclose(petz_tree(g, marginal_pack(rho, g)), rho, atol=1e-9)

    def test_incompatible_marginals(self):
        a = np.diag([0.7, 0.1, 0.1, 0.1])
        b = np.diag([0.1, 0.1, 0.1, 0.7])
        with pytest.raises(IncompatibleMarginalsError):
            petz_chain3(a, b)

    def test_petz_samples_are_states(self, chain3):
        samples = sample_petz(chain3, seed=4, count=2)
        for m in samples.matrices():
            assert np.trace(m) == pytest.approx(1.0)
            assert np.linalg.eigvalsh(m)[0] > -1e-10


class TestGibbs:
    def test_lssm_basis_dimension(self, chain3, fig1):
        assert len(lssm_basis(chain3)) == 15
        basis = np.array([b.ravel() for b in lssm_basis(fig1)])
        assert np.linalg.matrix_rank(basis) == len(basis)

    def test_lssm_samples(self, chain3):
        samples = gibbs_sample_lssm(chain3, seed=0, count=2)
        assert samples.ambient_dim == 36
        assert samples.meta['basis_size'] == 15
        for m in samples.matrices():
            assert np.linalg.eigvalsh(m)[0] > 0

    def test_decomposable_samples(self, fig1):
        samples = gibbs_sample_decomposable(fig1, seed=0, count=2)
        assert samples.ambient_dim == 136

    def test_commuting_tree_states_are_markov(self):
        g = builtin_graph("chain4")
        shape = SubsystemShape.qubits(4)
        for rho in gibbs_sample_commuting_tree(g, seed=9, count=2).matrices():
            assert np.trace(rho) == pytest.approx(1.0)
            for t in separator_triples(g):
                assert abs(qcmi(rho, shape, [t.i - 1], [t.k - 1], [t.j - 1])) < 1e-8

    def test_commuting_tree_needs_tree(self, fig1):
        with pytest.raises(ShapeError):
            gibbs_sample_commuting_tree(fig1, seed=0)


class TestDimension:
    def test_exp_sym(self):
        assert manifold_dim(ExpSymParametrisation(2), seed=0) == 3

    def test_decomposable(self, chain3):
        param = DecomposableParametrisation(chain3)
        assert param.n_params == 12
        assert manifold_dim(param, seed=0) == 10

    def test_qcmi_parametrisation_shape(self):
        param = QCMIParametrisation(seed=0)
        assert param.n_params == 13
        assert param(param.random_params(derive_rng(0, 1))).shape == (36,)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_qcmi_variety_is_twelve_dimensional(self, seed):
        assert manifold_dim(QCMIParametrisation(seed=seed), seed=seed) == 12

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_lssm_dimension_is_stable(self, chain3, seed):
        assert manifold_dim(LSSMParametrisation(chain3), seed=seed) == 15

    def test_exp_sym_matches_mat_exp(self, rng):
        param = ExpSymParametrisation(2)
        x = rng.uniform(-1, 1, 3)
        np.testing.assert_allclose(unflatten_sym(param(x), 2), mat_exp(unflatten_sym(x, 2)))
