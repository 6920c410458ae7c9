"""
Point samplers for the QCMI, Petz and Gibbs varieties, plus Jacobian-rank
dimension estimates of their parametrisations.

Every sampler is a pure function of (seed, index): sample i draws from
``derive_rng(seed, i)``, so output does not depend on batch size or thread
count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from src.config import config, tolerance
from src.core.graphs import chain_middle, cliques, is_tree, leaf_pair, petz_order, to_networkx
from src.core.matcore import (
    commutator,
    expand_operator,
    flatten_sym,
    kron,
    kron_all,
    mat_exp,
    mat_inv_sqrt,
    mat_sqrt,
    min_eigenvalue,
    partial_trace,
    random_symmetric,
    symmetric_basis,
    to_float,
    unflatten_sym,
)
from src.models import Graph, MarginalPack, SampleSet, SubsystemShape
from src.utils.errors import (
    IncompatibleMarginalsError,
    NotPositiveError,
    SamplingError,
    ShapeError,
)
from src.utils.helpers import derive_rng, resolve_seed

logger = logging.getLogger(__name__)

QCMI_STRUCTURES = ('generic', 'diagonal', 'block')


# Batch plumbing

def _seed(seed: Optional[int]) -> int:
    return resolve_seed(seed, config.get('sampling.default_seed', 0))


def _run_batch(draw: Callable[[np.random.Generator], np.ndarray], seed: int, count: int,
               threads: Optional[int] = None) -> List[np.ndarray]:
    if count < 1:
        raise SamplingError(f"count must be at least 1, got {count}")
    threads = int(tolerance('sampling.threads', threads))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda i: draw(derive_rng(seed, i)), range(count)))
    return [draw(derive_rng(seed, i)) for i in range(count)]


def _sample_set(matrices: Sequence[np.ndarray], meta: Dict) -> SampleSet:
    n = matrices[0].shape[0]
    points = np.array([flatten_sym(m) for m in matrices], dtype=float)
    return SampleSet(ambient_dim=n * (n + 1) // 2, points=points, meta=meta)


def _uniform(rng: np.random.Generator, size) -> np.ndarray:
    return rng.uniform(config.get('sampling.low', -1.0), config.get('sampling.high', 1.0), size=size)


def _random_sym(rng: np.random.Generator, n: int) -> np.ndarray:
    return random_symmetric(rng, n, config.get('sampling.low', -1.0), config.get('sampling.high', 1.0))


def _random_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def normalise_state(m: np.ndarray, tol: float = 1e-9) -> Optional[np.ndarray]:
    """m / tr(m) when m is PSD with positive trace, else None"""
    m = to_float(m)
    tr = float(np.trace(m))
    if tr <= 0.0 or min_eigenvalue(m) < -tol * max(1.0, tr):
        return None
    return m / tr


# QCMI variety of the 3-chain

def commutant_kernel(m_ab: np.ndarray) -> np.ndarray:
    """
    Matrices N on BC (as 4x4 arrays) with [M (x) Id_C, Id_A (x) N] = 0, as a
    stack of orthonormal kernel directions over the symmetric basis.
    """
    basis = symmetric_basis(4)
    lhs = kron(m_ab, np.eye(2))
    cols = [commutator(lhs, kron(np.eye(2), e)).ravel() for e in basis]
    kernel = null_space(np.column_stack(cols))
    return np.array([sum(c * e for c, e in zip(vec, basis)) for vec in kernel.T])


def _qcmi_factor(rng: np.random.Generator, structure: str, positive: bool) -> np.ndarray:
    if structure == 'diagonal':
        diag = _uniform(rng, 4)
        return np.diag(np.abs(diag) if positive else diag)
    if structure == 'block':
        q = _random_rotation(rng, 2)
        m = np.zeros((4, 4))
        for b in range(2):
            block = _random_sym(rng, 2)
            if positive:
                block = block @ block.T
            m += kron(block, np.outer(q[:, b], q[:, b]))
        return m
    if positive:
        w = _uniform(rng, (4, 4))
        return w @ w.T
    return _random_sym(rng, 4)


def _draw_qcmi(rng: np.random.Generator, structure: str, positive: bool) -> np.ndarray:
    tol = tolerance('sampling.commutator_tol')
    for attempt in range(int(config.get('sampling.max_resample', 20))):
        m = _qcmi_factor(rng, structure, positive)
        if structure == 'diagonal':
            diag = _uniform(rng, 4)
            n = np.diag(np.abs(diag) if positive else diag)
        else:
            kernel = commutant_kernel(m)
            if kernel.shape[0] == 0:
                logger.debug("empty commutant kernel, resampling (attempt %d)", attempt + 1)
                continue
            coefs = _uniform(rng, kernel.shape[0])
            n = np.tensordot(coefs, kernel, axes=1)
            n = (n + n.T) / 2
            if positive:
                shift = min_eigenvalue(n)
                if shift < 0:
                    n = n + (abs(shift) + abs(float(rng.uniform(0.0, 1.0)))) * np.eye(4)
        left, right = kron(m, np.eye(2)), kron(np.eye(2), n)
        residual = np.linalg.norm(commutator(left, right))
        if residual > tol * max(1.0, np.linalg.norm(left) * np.linalg.norm(right)):
            logger.debug("commutator residual %.2e above tolerance, resampling", residual)
            continue
        rho = left @ right
        return (rho + rho.T) / 2
    raise SamplingError(f"no commuting pair found after {config.get('sampling.max_resample', 20)} draws")


def sample_qcmi_chain3(seed: Optional[int] = None, count: int = 1, structure: str = 'generic',
                       positive: bool = False, threads: Optional[int] = None) -> SampleSet:
    """
    Points (M (x) Id_2)(Id_2 (x) N) of the 3-chain QCMI variety, 36 coordinates.

    Args:
        seed: Run seed (QGM_SEED or the configured default when None)
        count: Number of points
        structure: 'generic' draws M freely and N from the commutant of M;
            'diagonal' draws both diagonal (classical monomial model);
            'block' draws M block diagonal over a random basis of B
        positive: Draw PSD factors so every point is a state up to scale
        threads: Worker threads

    Returns:
        SampleSet whose meta lists the indices of points that are not states
    """
    if structure not in QCMI_STRUCTURES:
        raise ShapeError(f"unknown structure {structure!r}; choose from {QCMI_STRUCTURES}")
    seed = _seed(seed)
    matrices = _run_batch(lambda rng: _draw_qcmi(rng, structure, positive), seed, count, threads)
    non_state = [i for i, m in enumerate(matrices) if normalise_state(m) is None]
    if non_state:
        logger.debug("%d of %d QCMI samples are not states", len(non_state), count)
    return _sample_set(matrices, {
        'sampler': 'qcmi', 'graph': 'chain3', 'seed': seed, 'count': count,
        'structure': structure, 'positive': positive, 'non_state': non_state,
    })


# Petz recovery

def _require_pd(m: np.ndarray, tol: float, name: str) -> None:
    lowest = min_eigenvalue(m)
    if lowest <= tol:
        raise NotPositiveError(f"{name} is singular or indefinite (smallest eigenvalue {lowest:.3e})",
                               min_eigenvalue=lowest)


def petz_recover(rho_ab, rho_bc, shape: SubsystemShape, a: Sequence[int], b: Sequence[int],
                 c: Sequence[int], tol: Optional[float] = None, primed: bool = False) -> np.ndarray:
    """
    Petz recovery of a state on the factors a + b + c from its AB and BC
    marginals.

    ``shape`` describes all factors (0-based) of the output. ``rho_ab`` acts on
    the factors a + b in increasing order, ``rho_bc`` on b + c likewise.
    The unprimed form conjugates rho_BC by rho_AB^(1/2) rho_B^(-1/2); the
    primed form swaps the roles of the two marginals. Both give the same
    state on the Markov locus.
    """
    tol = tolerance('sampling.marginal_tol', tol)
    a, b, c = sorted(a), sorted(b), sorted(c)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ShapeError("blocks A, B and C must be disjoint")
    ab, bc = sorted(a + b), sorted(b + c)
    rho_ab, rho_bc = to_float(rho_ab), to_float(rho_bc)
    sub_ab, sub_bc = shape.sub(ab), shape.sub(bc)

    rho_b = partial_trace(rho_ab, sub_ab, [ab.index(i) for i in b])
    rho_b_other = partial_trace(rho_bc, sub_bc, [bc.index(i) for i in b])
    mismatch = float(np.linalg.norm(rho_b - rho_b_other))
    if mismatch >= tol:
        raise IncompatibleMarginalsError(f"B marginals differ by {mismatch:.3e}", mismatch=mismatch)
    psd_tol = tolerance('matcore.psd_tol')
    _require_pd(rho_ab, psd_tol, "rho_AB")
    _require_pd(rho_bc, psd_tol, "rho_BC")

    b_inv = expand_operator(mat_inv_sqrt(rho_b), shape, b)
    if primed:
        outer = expand_operator(mat_sqrt(rho_bc), shape, bc)
        inner = expand_operator(rho_ab, shape, ab)
    else:
        outer = expand_operator(mat_sqrt(rho_ab), shape, ab)
        inner = expand_operator(rho_bc, shape, bc)
    sigma = outer @ b_inv @ inner @ b_inv @ outer
    return (sigma + sigma.T) / 2


def petz_chain3(rho_ab, rho_bc, tol: Optional[float] = None) -> np.ndarray:
    """(rho_AB^1/2 (x) Id)(Id (x) rho_B^-1/2 (x) Id)(Id (x) rho_BC)(...)(...) on three qubits"""
    return petz_recover(rho_ab, rho_bc, SubsystemShape.qubits(3), [0], [1], [2], tol)


def petz_chain3_primed(rho_ab, rho_bc, tol: Optional[float] = None) -> np.ndarray:
    return petz_recover(rho_ab, rho_bc, SubsystemShape.qubits(3), [0], [1], [2], tol, primed=True)


def marginal_pack(rho, g: Graph, shape: Optional[SubsystemShape] = None) -> MarginalPack:
    """One-body and edge marginals of a global state, factors in vertex order"""
    shape = shape or SubsystemShape.qubits(g.n_vertices)
    if shape.n_factors != g.n_vertices:
        raise ShapeError(f"shape has {shape.n_factors} factors, graph has {g.n_vertices} vertices")
    rho = to_float(rho)
    pack = MarginalPack(shape=shape)
    for u, v in g.sorted_edges():
        pack.two_body[(u, v)] = partial_trace(rho, shape, [u - 1, v - 1])
    for v in g.vertices:
        pack.one_body[v] = partial_trace(rho, shape, [v - 1])
    return pack


def petz_tree(g: Graph, pack: MarginalPack, tol: Optional[float] = None, primed: bool = False) -> np.ndarray:
    """
    Global state on a tree rebuilt from its edge marginals by repeated 3-chain
    Petz recovery, following the leaf pairs of petz_order. ``primed`` uses the
    primed form at every step.
    """
    tol = tolerance('sampling.marginal_tol', tol)
    steps = petz_order(g)
    pack.check_compatible(tol)
    h = to_networkx(g)

    @lru_cache(maxsize=None)
    def recover(vertices: Tuple[int, ...]) -> np.ndarray:
        if len(vertices) == 2:
            return pack.two_body[vertices]
        if len(vertices) == 3:
            mid = chain_middle(h, vertices)
            v1, v2 = [v for v in vertices if v != mid]
        else:
            v1, v2 = leaf_pair(h, vertices)
        rest = [v for v in vertices if v not in (v1, v2)]
        sub = pack.shape.sub([v - 1 for v in vertices])
        pos = {v: i for i, v in enumerate(vertices)}
        rho_ab = recover(tuple(v for v in vertices if v != v2))
        rho_bc = recover(tuple(v for v in vertices if v != v1))
        return petz_recover(rho_ab, rho_bc, sub, [pos[v1]], [pos[v] for v in rest], [pos[v2]], tol, primed)

    result = recover(tuple(g.vertices))
    logger.debug("Petz recursion on %d vertices used %d leaf-pair steps", g.n_vertices, len(steps))
    return result


def sample_petz(g: Graph, seed: Optional[int] = None, count: int = 1,
                threads: Optional[int] = None) -> SampleSet:
    """
    Points of the Petz variety: marginals of random full-rank states pushed
    through petz_tree.
    """
    seed = _seed(seed)
    dim = 2 ** g.n_vertices

    def draw(rng: np.random.Generator) -> np.ndarray:
        w = _uniform(rng, (dim, dim))
        rho = w @ w.T + 1e-3 * np.eye(dim)
        rho /= np.trace(rho)
        return petz_tree(g, marginal_pack(rho, g))

    matrices = _run_batch(draw, seed, count, threads)
    return _sample_set(matrices, {'sampler': 'petz', 'graph': g.name or g.sorted_edges(), 'seed': seed,
                                  'count': count})


# Gibbs manifolds

def lssm_basis(g: Graph) -> List[np.ndarray]:
    """
    Basis of L_G: Kronecker products of symmetric 2x2 basis elements on each
    maximal clique, identity elsewhere, with duplicates across cliques removed.
    """
    shape = SubsystemShape.qubits(g.n_vertices)
    local = symmetric_basis(2)
    seen: Dict[FrozenSet[Tuple[int, int]], np.ndarray] = {}
    for clique in cliques(g):
        for choice in np.ndindex(*([len(local)] * len(clique))):
            key = frozenset((v, k) for v, k in zip(clique, choice) if k != 0)
            if key in seen:
                continue
            op = kron_all(*[local[k] for k in choice])
            seen[key] = expand_operator(op, shape, [v - 1 for v in clique])
    return list(seen.values())


def decomposable_term(g: Graph, clique: Sequence[int], factors: Sequence[np.ndarray]) -> np.ndarray:
    shape = SubsystemShape.qubits(g.n_vertices)
    return expand_operator(kron_all(*factors), shape, [v - 1 for v in clique])


def gibbs_sample_lssm(g: Graph, seed: Optional[int] = None, count: int = 1,
                      threads: Optional[int] = None) -> SampleSet:
    """exp(H) for H uniform over the coordinates of the L_G basis"""
    seed = _seed(seed)
    basis = lssm_basis(g)

    def draw(rng: np.random.Generator) -> np.ndarray:
        return mat_exp(np.tensordot(_uniform(rng, len(basis)), np.array(basis), axes=1))

    matrices = _run_batch(draw, seed, count, threads)
    return _sample_set(matrices, {'sampler': 'gibbs-lssm', 'graph': g.name or g.sorted_edges(),
                                  'seed': seed, 'count': count, 'basis_size': len(basis)})


def gibbs_sample_decomposable(g: Graph, seed: Optional[int] = None, count: int = 1,
                              threads: Optional[int] = None) -> SampleSet:
    """exp(H) with H a sum over cliques of Kronecker products of random symmetric 2x2 factors"""
    seed = _seed(seed)
    cl = cliques(g)

    def draw(rng: np.random.Generator) -> np.ndarray:
        h = sum(decomposable_term(g, c, [_random_sym(rng, 2) for _ in c]) for c in cl)
        return mat_exp(h)

    matrices = _run_batch(draw, seed, count, threads)
    return _sample_set(matrices, {'sampler': 'gibbs-dec', 'graph': g.name or g.sorted_edges(),
                                  'seed': seed, 'count': count})


def commuting_tree_hamiltonian(g: Graph, rng: np.random.Generator) -> np.ndarray:
    """
    Tree Hamiltonian whose edge terms commute pairwise.

    Every vertex of degree >= 2 gets a random orthonormal basis; an edge term
    is block diagonal in the bases of its internal endpoints and arbitrary on
    leaf endpoints.
    """
    if not is_tree(g):
        raise ShapeError("commuting tree Hamiltonians need a tree")
    shape = SubsystemShape.qubits(g.n_vertices)
    bases = {v: _random_rotation(rng, 2) for v in g.vertices if len(g.neighbours(v)) >= 2}

    def local_terms(v: int) -> List[np.ndarray]:
        if v in bases:
            q = bases[v]
            return [np.outer(q[:, k], q[:, k]) for k in range(2)]
        return symmetric_basis(2)

    h = np.zeros((shape.n, shape.n))
    for u, v in g.sorted_edges():
        term = np.zeros((4, 4))
        for p in local_terms(u):
            for q in local_terms(v):
                term += float(_uniform(rng, 1)[0]) * kron(p, q)
        h += expand_operator(term, shape, [u - 1, v - 1])
    return h


def commuting_tree_state(g: Graph, rng: np.random.Generator) -> np.ndarray:
    rho = mat_exp(commuting_tree_hamiltonian(g, rng))
    return rho / np.trace(rho)


def gibbs_sample_commuting_tree(g: Graph, seed: Optional[int] = None, count: int = 1,
                                threads: Optional[int] = None) -> SampleSet:
    """Trace-one exponentials of commuting tree Hamiltonians (quantum Markov states)"""
    seed = _seed(seed)
    matrices = _run_batch(lambda rng: commuting_tree_state(g, rng), seed, count, threads)
    return _sample_set(matrices, {'sampler': 'gibbs-tree', 'graph': g.name or g.sorted_edges(),
                                  'seed': seed, 'count': count})


# Parametrisations and dimension

class Parametrisation:
    """A differentiable map from parameters to flattened symmetric matrices"""

    name = "parametrisation"

    @property
    def n_params(self) -> int:
        raise NotImplementedError

    def __call__(self, params: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def random_params(self, rng: np.random.Generator) -> np.ndarray:
        return _uniform(rng, self.n_params)


class ExpSymParametrisation(Parametrisation):
    """exp of a free symmetric d x d matrix"""

    name = "exp-sym"

    def __init__(self, d: int = 2):
        self.d = d

    @property
    def n_params(self) -> int:
        return self.d * (self.d + 1) // 2

    def __call__(self, params):
        return flatten_sym(mat_exp(unflatten_sym(np.asarray(params, dtype=float), self.d)))


class LSSMParametrisation(Parametrisation):
    """exp of a linear combination of the L_G basis"""

    name = "lssm"

    def __init__(self, g: Graph):
        self.basis = np.array(lssm_basis(g))

    @property
    def n_params(self) -> int:
        return len(self.basis)

    def __call__(self, params):
        return flatten_sym(mat_exp(np.tensordot(np.asarray(params, dtype=float), self.basis, axes=1)))


class DecomposableParametrisation(Parametrisation):
    """exp of a sum over cliques of Kronecker products of 2x2 symmetric factors"""

    name = "decomposable"

    def __init__(self, g: Graph):
        self.g = g
        self.cliques = cliques(g)

    @property
    def n_params(self) -> int:
        return 3 * sum(len(c) for c in self.cliques)

    def __call__(self, params):
        params = np.asarray(params, dtype=float)
        h, k = 0.0, 0
        for clique in self.cliques:
            factors = []
            for _ in clique:
                factors.append(unflatten_sym(params[k:k + 3], 2))
                k += 3
            h = h + decomposable_term(self.g, clique, factors)
        return flatten_sym(mat_exp(h))


class QCMIParametrisation(Parametrisation):
    """
    (M, c) -> (M (x) Id_2)(Id_2 (x) sum_k c_k N_k), with N_k a commutant basis
    computed at a base point M0.
    """

    name = "qcmi"

    def __init__(self, seed: Optional[int] = None):
        rng = derive_rng(_seed(seed), 0)
        self.m0 = _random_sym(rng, 4)
        self.kernel = commutant_kernel(self.m0)

    @property
    def n_params(self) -> int:
        return 10 + len(self.kernel)

    def __call__(self, params):
        params = np.asarray(params, dtype=float)
        m = unflatten_sym(params[:10], 4)
        n = np.tensordot(params[10:], self.kernel, axes=1)
        return flatten_sym(kron(m, np.eye(2)) @ kron(np.eye(2), n))

    def random_params(self, rng):
        m_part = flatten_sym(self.m0) + 0.1 * _uniform(rng, 10)
        return np.concatenate([m_part, _uniform(rng, len(self.kernel))])


def jacobian(param: Parametrisation, at: np.ndarray, fd_step: float) -> np.ndarray:
    at = np.asarray(at, dtype=float)
    cols = []
    for k in range(param.n_params):
        e = np.zeros_like(at)
        e[k] = fd_step
        cols.append((param(at + e) - param(at - e)) / (2 * fd_step))
    return np.column_stack(cols)


def numerical_rank(m: np.ndarray, rtol: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def manifold_dim(param: Parametrisation, at: Optional[np.ndarray] = None, fd_step: Optional[float] = None,
                 seed: Optional[int] = None, retries: Optional[int] = None) -> int:
    """
    Dimension of the image of a parametrisation: Jacobian rank by central
    differences, required to agree across ``retries`` generic points.
    """
    fd_step = tolerance('dimension.fd_step', fd_step)
    rtol = tolerance('dimension.rank_rtol')
    retries = int(tolerance('dimension.retries', retries))
    seed = _seed(seed)

    points = [] if at is None else [np.asarray(at, dtype=float)]
    i = 0
    while len(points) < retries:
        points.append(param.random_params(derive_rng(seed, i)))
        i += 1

    ranks = [numerical_rank(jacobian(param, p, fd_step), rtol) for p in points]
    logger.debug("%s Jacobian ranks at %d points: %s", param.name, len(ranks), ranks)
    if len(set(ranks)) != 1:
        raise SamplingError(f"Jacobian rank unstable across points: {ranks}", ranks=ranks)
    return ranks[0]
