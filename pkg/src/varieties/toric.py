"""
Toric ideals of integer matrices and the conjugated equations of commuting
Gibbs varieties.

Binomial generators are found degree by degree: monomials of degree <= d are
grouped into fibres of the monomial map x_j -> t^{a_j}, and a binomial inside a
fibre is kept only when its two monomials are not yet linked by monomial
multiples of the generators kept so far. Because every such multiple is itself
a difference of two monomials, the linear span is tracked with a union-find
over monomials.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from networkx.utils import UnionFind
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from src.config import config, tolerance
from src.core.matcore import sym_index
from src.models import IdealPresentation, LatticeVector, MonomialBasis, Poly, Provenance, ToricModel
from src.utils.constants import MAX_HYPERCUBE_N, MAX_TORIC_COLUMNS, MAX_TORIC_DEGREE
from src.utils.errors import DegreeBoundError, ShapeError
from src.utils.helpers import canonical_json_dumps, hash_string

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]


def hypercube_matrix(N: int, signed: bool = True) -> np.ndarray:
    """
    N x 2^N matrix whose column j lists the bits of j, most significant first.

    Signed entries are +1 for a set bit and -1 otherwise; unsigned entries are
    the bits themselves.
    """
    if not 1 <= N <= MAX_HYPERCUBE_N:
        raise ShapeError(f"hypercube dimension must be in 1..{MAX_HYPERCUBE_N}, got {N}")
    bits = np.array([[(j >> (N - 1 - i)) & 1 for j in range(2 ** N)] for i in range(N)], dtype=np.int64)
    return 2 * bits - 1 if signed else bits


def add_ones_row(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    return np.vstack([np.ones((1, A.shape[1]), dtype=np.int64), A])


def monomial_map(A: np.ndarray, t: Sequence) -> List:
    """The point (t^{a_1}, ..., t^{a_n}); exact for Fraction parameters"""
    A = np.asarray(A, dtype=np.int64)
    if len(t) != A.shape[0]:
        raise ShapeError(f"{len(t)} parameters for a matrix with {A.shape[0]} rows")
    exact = all(isinstance(ti, (int, Fraction)) for ti in t)
    params = [Fraction(ti) if exact else float(ti) for ti in t]
    point = []
    for col in A.T:
        value = Fraction(1) if exact else 1.0
        for ti, a in zip(params, col.tolist()):
            value = value * ti ** a
        point.append(value)
    return point


def _check_matrix(A: np.ndarray, degree_bound: int) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[1] == 0:
        raise ShapeError(f"expected a non-empty integer matrix, got shape {A.shape}")
    if not np.array_equal(A, np.round(A)):
        raise ShapeError("toric matrix must have integer entries")
    max_columns = int(config.get('toric.max_columns', MAX_TORIC_COLUMNS))
    max_degree = int(config.get('toric.max_degree', MAX_TORIC_DEGREE))
    if A.shape[1] > max_columns:
        raise ShapeError(f"{A.shape[1]} columns exceed the limit of {max_columns}")
    if not 1 <= degree_bound <= max_degree:
        raise ShapeError(f"degree bound must be in 1..{max_degree}, got {degree_bound}")
    return A.astype(np.int64)


def _monomials_of_degree(n: int, degree: int) -> List[Exponents]:
    monos = []
    for combo in combinations_with_replacement(range(n), degree):
        exps = [0] * n
        for var in combo:
            exps[var] += 1
        monos.append(tuple(exps))
    return monos


def _times(a: Exponents, b: Exponents) -> Exponents:
    return tuple(x + y for x, y in zip(a, b))


class _FibrePass:
    """Incremental state of the degree-by-degree binomial search"""

    def __init__(self, A: np.ndarray):
        self.A = A
        self.n = A.shape[1]
        self.links = UnionFind()
        self.fibres: Dict[Tuple[int, ...], List[Exponents]] = {}
        self.kept: List[Tuple[Exponents, Exponents]] = []
        self.by_degree: Dict[int, List[Exponents]] = {0: [(0,) * self.n]}
        self._insert((0,) * self.n)

    def _image(self, m: Exponents) -> Tuple[int, ...]:
        return tuple((self.A @ np.array(m, dtype=np.int64)).tolist())

    def _insert(self, m: Exponents) -> Optional[Tuple[Exponents, Exponents]]:
        fibre = self.fibres.setdefault(self._image(m), [])
        self.links[m]
        new = None
        if fibre and self.links[m] != self.links[fibre[0]]:
            new = (m, fibre[0])
            self.links.union(m, fibre[0])
        fibre.append(m)
        return new

    def advance(self, degree: int) -> List[Tuple[Exponents, Exponents]]:
        """Add degree-``degree`` monomials; return binomials not generated by earlier ones"""
        self.by_degree[degree] = _monomials_of_degree(self.n, degree)
        for plus, minus in self.kept:
            lift = degree - max(sum(plus), sum(minus))
            if lift < 1:
                continue
            for mu in self.by_degree[lift]:
                self.links.union(_times(mu, plus), _times(mu, minus))
        found = []
        for m in self.by_degree[degree]:
            new = self._insert(m)
            if new is not None:
                found.append(new)
        return found


def _binomial(plus: Exponents, minus: Exponents) -> Poly:
    return Poly.monomial(plus) - Poly.monomial(minus)


def toric_ideal(A: np.ndarray, degree_bound: int = 2, verify: Optional[bool] = None) -> IdealPresentation:
    """
    Binomial generators of the toric ideal of ``A`` up to ``degree_bound``.

    With ``verify`` the search runs one degree further; any new generator there
    means the bound was too small and raises DegreeBoundError.
    """
    A = _check_matrix(A, degree_bound)
    verify = tolerance('toric.verify_degree', verify)
    search = _FibrePass(A)
    generators: List[Poly] = []
    lattice: List[List[int]] = []
    counts: Dict[int, int] = {}
    for d in range(1, degree_bound + 1):
        found = search.advance(d)
        search.kept.extend(found)
        counts[d] = len(found)
        for plus, minus in found:
            generators.append(_binomial(plus, minus))
            lattice.append(list(LatticeVector(tuple(p - q for p, q in zip(plus, minus))).u))
        logger.debug("toric degree %d: %d new binomials", d, len(found))

    if verify:
        extra = search.advance(degree_bound + 1)
        if extra:
            witness = _binomial(*extra[0])
            raise DegreeBoundError(
                f"{len(extra)} generators of degree {degree_bound + 1} are not implied by degree <= {degree_bound}",
                witness=witness.to_string('x'), degree_bound=degree_bound,
            )
    logger.info("toric ideal of a %dx%d matrix: %d generators up to degree %d",
                A.shape[0], A.shape[1], len(generators), degree_bound)
    return IdealPresentation(
        n_vars=A.shape[1],
        generators=generators,
        provenance=Provenance.TORIC,
        metadata={
            'degree_bound': degree_bound,
            'verified_degree': degree_bound + 1 if verify else None,
            'counts_by_degree': {str(d): c for d, c in counts.items()},
            'n_fibres': len(search.fibres),
            'lattice_vectors': lattice,
            'A': A.tolist(),
        },
    )


# Exact truncated membership

def _multiples(generators: Sequence[Poly], n_vars: int, degree: int) -> List[Poly]:
    out = []
    for g in generators:
        lift = degree - g.degree
        if lift < 0:
            continue
        for mu in MonomialBasis(n_vars, lift).monomials():
            out.append(g * Poly(n_vars, {mu: 1}))
    return out


def _rank(polys: Sequence[Poly], basis: MonomialBasis) -> int:
    if not polys:
        return 0
    vectors = [basis.vector_from_poly(p) for p in polys]
    if all(p.is_exact for p in polys):
        rows = [[QQ(Fraction(c).numerator, Fraction(c).denominator) for c in v] for v in vectors]
        return DomainMatrix(rows, (len(rows), basis.size), QQ).rank()
    return int(np.linalg.matrix_rank(np.array(vectors, dtype=float)))


def ideal_contains(ideal: IdealPresentation, poly: Poly, degree: Optional[int] = None) -> bool:
    """
    Whether ``poly`` is a combination of monomial multiples of the generators
    of total degree <= ``degree`` (default: the degree of ``poly``).
    """
    if poly.n_vars != ideal.n_vars:
        raise ShapeError(f"polynomial has {poly.n_vars} variables, ideal has {ideal.n_vars}")
    if poly.is_zero():
        return True
    degree = poly.degree if degree is None else degree
    if degree < poly.degree:
        return False
    basis = MonomialBasis(ideal.n_vars, degree)
    span = _multiples(ideal.generators, ideal.n_vars, degree)
    return _rank(span, basis) == _rank(span + [poly], basis)


# Cached hypercube ideals

class IdealCache:
    """Content-addressed store of toric ideals with hit/miss counts"""

    def __init__(self):
        self._store: Dict[str, IdealPresentation] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(A: np.ndarray, degree_bound: int) -> str:
        return hash_string(canonical_json_dumps({'A': np.asarray(A).tolist(), 'degree_bound': degree_bound}))

    def get_or_compute(self, A: np.ndarray, degree_bound: int) -> IdealPresentation:
        key = self.key(A, degree_bound)
        if key in self._store:
            self.hits += 1
            logger.debug("ideal cache hit %s", key)
            return self._store[key]
        self.misses += 1
        ideal = toric_ideal(A, degree_bound)
        self._store[key] = ideal
        return ideal

    def clear(self) -> None:
        self._store.clear()
        self.hits = self.misses = 0

    def __len__(self) -> int:
        return len(self._store)


ideal_cache = IdealCache()


def precompute_hypercube_ideal(N: int, degree_bound: int = 2, cache: Optional[IdealCache] = None) -> IdealPresentation:
    """Toric ideal of the signed N-cube, computed once per (N, degree bound)"""
    cache = ideal_cache if cache is None else cache
    return cache.get_or_compute(hypercube_matrix(N), degree_bound)


# Conjugated equations

def _y_vars(d: int) -> int:
    return d * (d + 1) // 2


def _conjugated_entry(O: np.ndarray, i: int, j: int) -> Poly:
    """(O^T Y O)_ij as a linear form in the flattened entries of Y"""
    d = O.shape[0]
    coefs = [0] * _y_vars(d)
    for a in range(d):
        for b in range(a + 1):
            if a == b:
                c = int(O[a, i]) * int(O[a, j])
            else:
                c = int(O[a, i]) * int(O[b, j]) + int(O[b, i]) * int(O[a, j])
            coefs[sym_index(a, b)] = c
    return Poly.linear(coefs)


def _substitute(p: Poly, images: Sequence[Poly], n_vars: int) -> Poly:
    """p(images[0], images[1], ...) expanded"""
    total = Poly.zero(n_vars)
    for mono, coef in p.terms.items():
        term = Poly.constant(coef, n_vars)
        for var, exp in mono:
            term = term * images[var] ** exp
        total = total + term
    return total


def gv_equations(model: ToricModel, degree_bound: int = 2, threads: Optional[int] = None) -> IdealPresentation:
    """
    Equations of the Gibbs variety of a commuting family in the entries of Y.

    The off-diagonal entries of O^T Y O give linear forms. Each toric
    generator of ``model.A`` is rewritten with x_j = (O^T Y O)_jj / c_j, c_j
    the squared column norm, and scaled to coprime integer coefficients.
    """
    O = model.O
    d = O.shape[0]
    n_vars = _y_vars(d)
    toric = toric_ideal(model.A, degree_bound)

    linear = [_conjugated_entry(O, i, j) for i in range(d) for j in range(i + 1, d)]
    diagonal = [_conjugated_entry(O, j, j) * Fraction(1, int(model.norms[j])) for j in range(d)]

    def conjugate(g: Poly) -> Poly:
        return _substitute(g, diagonal, n_vars).primitive()

    threads = int(tolerance('sampling.threads', threads))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            conjugated = list(pool.map(conjugate, toric.generators))
    else:
        conjugated = [conjugate(g) for g in toric.generators]

    ideal = IdealPresentation(
        n_vars=n_vars,
        generators=linear + conjugated,
        provenance=Provenance.CONJUGATED,
        metadata={
            'degree_bound': degree_bound,
            'n_linear': len(linear),
            'n_conjugated': len(conjugated),
            'toric_counts_by_degree': toric.metadata['counts_by_degree'],
            'matrix_dim': d,
        },
    )
    pulled = pullback(ideal, model)
    quadrics = [p for p in pulled.generators if p.degree == 2]
    # reported count: independent new quadrics modulo the linear forms, the dimension of the
    # degree-2 part of the toric ideal (56 for fig1); quadrics involving the linear forms are not counted
    ideal.metadata['quadric_rank'] = _rank(quadrics, MonomialBasis(d, 2))
    logger.info("conjugated ideal: %d linear forms, %d conjugated generators, quadric rank %d in %d variables",
                len(linear), len(conjugated), ideal.metadata['quadric_rank'], n_vars)
    return ideal


def _substitution_matrix(model: ToricModel) -> np.ndarray:
    """Integer T and scale s with y = T p / s for Y = O diag(p_j / c_j) O^T"""
    O = model.O.astype(object)
    d = O.shape[0]
    norms = [int(c) for c in model.norms]
    scale = math.lcm(*norms)
    T = np.zeros((_y_vars(d), d), dtype=object)
    for a in range(d):
        for b in range(a + 1):
            for j in range(d):
                T[sym_index(a, b), j] = int(O[a, j]) * int(O[b, j]) * (scale // norms[j])
    return T, scale


def pullback(ideal: IdealPresentation, model: ToricModel) -> IdealPresentation:
    """
    Substitute Y = O diag(p_j / c_j) O^T into conjugated generators.

    Linear forms map to zero and each conjugated generator maps back to its
    toric binomial in p (as a primitive integer polynomial). Zero images are
    dropped.
    """
    d = model.O.shape[0]
    if ideal.n_vars != _y_vars(d):
        raise ShapeError(f"ideal has {ideal.n_vars} variables, model needs {_y_vars(d)}")
    T, scale = _substitution_matrix(model)
    images = None
    out: List[Poly] = []
    for g in ideal.generators:
        if g.degree <= 2:
            # 2 L g has integer Q, l, c; multiplying by scale^2 keeps T^T Q T integral
            coefs = [Fraction(c) for c in g.terms.values()]
            L = 2 * math.lcm(*[c.denominator for c in coefs]) if coefs else 2
            Q, lin, const = g.quadratic_parts()
            Qi = np.array([[int(Fraction(v) * L) for v in row] for row in Q], dtype=object)
            li = np.array([int(Fraction(v) * L) for v in lin], dtype=object)
            pulled = Poly.from_quadratic(
                T.T.dot(Qi).dot(T),
                scale * T.T.dot(li),
                scale * scale * int(Fraction(const) * L),
            )
        else:
            if images is None:
                images = [Poly.linear([Fraction(int(c), scale) for c in row]) for row in T]
            pulled = _substitute(g, images, d)
        if not pulled.is_zero():
            out.append(pulled.primitive())
    return IdealPresentation(n_vars=d, generators=out, provenance=Provenance.TORIC,
                             metadata={'pulled_back_from': ideal.provenance.value})
