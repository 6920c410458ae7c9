"""
Stabiliser formalism over GF(2).

A Pauli word is stored as bit vectors (x | z). Factor j is X for (1, 0), Z for
(0, 1), Y for (1, 1). Phases of products are tracked as powers of i with the
convention P(x, z) = i^(x.z) X^x Z^z, so Y = iXZ and every signed word is
Hermitian. Dense realisations are limited to Y-free words, which are real.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.config import tolerance
from src.models import Graph, PauliWord, StabilizerGroup, ToricModel
from src.utils.constants import IDENTITY_2, MAX_MATRIX_DIM, SIGMA_X, SIGMA_Z
from src.utils.errors import ShapeError, StabilizerError

logger = logging.getLogger(__name__)

MAX_DENSE_QUBITS = int(np.log2(MAX_MATRIX_DIM))


# Symplectic structure

def symplectic_product(p: PauliWord, q: PauliWord) -> int:
    """x_p . z_q + z_p . x_q over GF(2)"""
    if p.n != q.n:
        raise ShapeError(f"Pauli words act on {p.n} and {q.n} qubits")
    xp, zp = np.array(p.x_bits), np.array(p.z_bits)
    xq, zq = np.array(q.x_bits), np.array(q.z_bits)
    return int((xp @ zq + zp @ xq) % 2)


def commutes(p: PauliWord, q: PauliWord) -> bool:
    return symplectic_product(p, q) == 0


def graph_hamiltonians(g: Graph) -> List[PauliWord]:
    """X on vertex i, Z on every neighbour of i, identity elsewhere"""
    words = []
    for v in g.vertices:
        x = [1 if u == v else 0 for u in g.vertices]
        nbrs = set(g.neighbours(v))
        z = [1 if u in nbrs else 0 for u in g.vertices]
        words.append(PauliWord(tuple(x), tuple(z)))
    return words


# Phases

def _phase(word: PauliWord) -> int:
    return 0 if word.sign > 0 else 2


def multiply(p: Tuple[np.ndarray, np.ndarray, int], q: Tuple[np.ndarray, np.ndarray, int]):
    """
    Product of two phased words (x, z, e) standing for i^e P(x, z).

    Returns the product in the same form with e reduced mod 4.
    """
    x1, z1, e1 = p
    x2, z2, e2 = q
    x3, z3 = (x1 + x2) % 2, (z1 + z2) % 2
    e = e1 + e2 + int(x1 @ z1 + x2 @ z2 - x3 @ z3 + 2 * (z1 @ x2))
    return x3, z3, e % 4


def phased(word: PauliWord):
    return np.array(word.x_bits, dtype=np.int64), np.array(word.z_bits, dtype=np.int64), _phase(word)


def product(words: Sequence[PauliWord]) -> Tuple[PauliWord, int]:
    """
    Ordered product of words as (word, phase exponent).

    The returned word carries sign +1; the full product is i^e times it.
    """
    if not words:
        raise ShapeError("product of an empty list of words")
    acc = phased(words[0])
    for w in words[1:]:
        if w.n != words[0].n:
            raise ShapeError("words act on different numbers of qubits")
        acc = multiply(acc, phased(w))
    x, z, e = acc
    return PauliWord(tuple(int(b) for b in x), tuple(int(b) for b in z)), e


def contains_minus_identity(gens: Sequence[PauliWord], brute_force: Optional[bool] = None) -> bool:
    """
    True if some product of the generators equals -Id.

    Products over every subset are accumulated with phase bookkeeping. For
    Y-free words on few qubits the dense products are multiplied out as well
    and both answers must agree.
    """
    if not gens:
        return False
    n = gens[0].n
    found = False
    for mask in range(1, 2 ** len(gens)):
        chosen = [g for j, g in enumerate(gens) if mask >> j & 1]
        word, e = product(chosen)
        if not any(word.x_bits) and not any(word.z_bits) and e == 2:
            found = True
            break

    if brute_force is None:
        brute_force = n <= tolerance('pauli.brute_force_max_qubits') and not any(g.has_y for g in gens)
    if brute_force:
        dense_found = _dense_contains_minus_identity(gens)
        if dense_found != found:
            raise StabilizerError("phase bookkeeping disagrees with dense products",
                                  gens=[str(g) for g in gens])
    return found


def _dense_contains_minus_identity(gens: Sequence[PauliWord]) -> bool:
    mats = [dense(g) for g in gens]
    minus_id = -np.eye(mats[0].shape[0], dtype=np.int64)
    for mask in range(1, 2 ** len(mats)):
        acc = None
        for j, m in enumerate(mats):
            if mask >> j & 1:
                acc = m if acc is None else acc @ m
        if np.array_equal(acc, minus_id):
            return True
    return False


# GF(2) linear algebra

def gf2_row_reduce(m: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns"""
    a = np.array(m, dtype=np.uint8) % 2
    rows, cols = a.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        for o in others:
            if o != r:
                a[o] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_rank(m: np.ndarray) -> int:
    return len(gf2_row_reduce(m)[1])


def gf2_solve(m: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    """One solution s of m s = rhs over GF(2), or None"""
    m = np.array(m, dtype=np.uint8) % 2
    rhs = np.array(rhs, dtype=np.uint8).reshape(-1, 1) % 2
    reduced, pivots = gf2_row_reduce(np.hstack([m, rhs]))
    n_cols = m.shape[1]
    if n_cols in pivots:
        return None
    s = np.zeros(n_cols, dtype=np.uint8)
    for row, c in enumerate(pivots):
        s[c] = reduced[row, -1]
    return s


# Stabiliser groups

def stabilizer_group(gens: Sequence[PauliWord]) -> StabilizerGroup:
    """
    Validate generators: equal size, pairwise commuting, independent, -Id not
    in the generated group.
    """
    gens = tuple(gens)
    if not gens:
        raise StabilizerError("a stabiliser group needs at least one generator")
    n = gens[0].n
    if any(g.n != n for g in gens):
        raise StabilizerError("generators act on different numbers of qubits")
    if len(gens) > n:
        raise StabilizerError(f"{len(gens)} generators on {n} qubits cannot be independent")

    for (i, p), (j, q) in itertools.combinations(enumerate(gens), 2):
        if not commutes(p, q):
            raise StabilizerError(f"generators {i + 1} ({p}) and {j + 1} ({q}) anticommute", pair=[i + 1, j + 1])

    rank = gf2_rank(np.array([g.vector() for g in gens]))
    if rank != len(gens):
        raise StabilizerError(f"generators are dependent: GF(2) rank {rank} < {len(gens)}")

    if contains_minus_identity(gens):
        raise StabilizerError("-Id belongs to the generated group")
    return StabilizerGroup(n=n, gens=gens, contains_minus_id=False)


def dense(word: PauliWord) -> np.ndarray:
    """Integer matrix of a Y-free word, factor 1 slowest"""
    if word.has_y:
        raise StabilizerError(f"dense realisation of {word} needs complex entries (contains Y)")
    if word.n > MAX_DENSE_QUBITS:
        raise ShapeError(f"dense realisation limited to {MAX_DENSE_QUBITS} qubits")
    factors = {(0, 0): IDENTITY_2, (1, 0): SIGMA_X, (0, 1): SIGMA_Z}
    m = np.array([[word.sign]], dtype=np.int64)
    for x, z in zip(word.x_bits, word.z_bits):
        m = np.kron(m, factors[(x, z)])
    return m


def _scaled_projector(group: StabilizerGroup, x: Sequence[int]) -> np.ndarray:
    """2^m P^x as an integer matrix"""
    x = [int(b) & 1 for b in x]
    if len(x) != group.n_generators:
        raise ShapeError(f"syndrome has {len(x)} bits, group has {group.n_generators} generators")
    dim = 2 ** group.n
    acc = np.eye(dim, dtype=np.int64)
    for bit, g in zip(x, group.gens):
        acc = acc @ (np.eye(dim, dtype=np.int64) + (-1) ** bit * dense(g))
    return acc


def projector(group: StabilizerGroup, x: Sequence[int]) -> np.ndarray:
    """
    P^x = 2^-m prod_j (Id + (-1)^x_j p_j) as an exact Fraction matrix.

    Projects onto the joint eigenspace where generator j has eigenvalue (-1)^x_j.
    """
    scale = 2 ** group.n_generators
    scaled = _scaled_projector(group, x)
    return np.vectorize(lambda v: Fraction(int(v), scale), otypes=[object])(scaled)


def stab_dimension(group: StabilizerGroup) -> int:
    """Dimension of the joint +1 eigenspace, from the exact rank of P^0"""
    scale = 2 ** group.n_generators
    scaled = _scaled_projector(group, [0] * group.n_generators)
    if not np.array_equal(scaled @ scaled, scale * scaled):
        raise StabilizerError("P^0 is not idempotent")
    tr = int(np.trace(scaled))
    if tr % scale:
        raise StabilizerError(f"trace of P^0 is not an integer: {tr}/{scale}")
    dim = tr // scale
    expected = 2 ** group.k
    if dim != expected:
        raise StabilizerError(f"stabilised space has dimension {dim}, expected {expected}")
    return dim


def conjugating_word(group: StabilizerGroup, i: int) -> PauliWord:
    """
    A word p anticommuting with generator ``i`` (0-based) and commuting with
    every other generator, so that p g_i p^T = -g_i.
    """
    if not 0 <= i < group.n_generators:
        raise ShapeError(f"generator index {i} outside 0..{group.n_generators - 1}")
    n = group.n
    # row j of the system is (z_j | x_j), so row_j . (vx | vz) is the symplectic product
    system = np.array([np.concatenate([g.z_bits, g.x_bits]) for g in group.gens], dtype=np.uint8)
    rhs = np.zeros(group.n_generators, dtype=np.uint8)
    rhs[i] = 1
    solution = gf2_solve(system, rhs)
    if solution is None:
        raise StabilizerError(f"no Pauli word flips generator {i + 1} alone")
    word = PauliWord(tuple(int(b) for b in solution[:n]), tuple(int(b) for b in solution[n:]))
    for j, g in enumerate(group.gens):
        if commutes(word, g) == (j == i):
            raise StabilizerError(f"conjugating word {word} fails on generator {j + 1}")
    return word


# Simultaneous eigenbasis

def _primitive(v: Sequence[Fraction]) -> np.ndarray:
    """Scale a rational vector to coprime integers with positive first nonzero entry"""
    fracs = [Fraction(c) for c in v]
    denom = 1
    for f in fracs:
        denom = math.lcm(denom, f.denominator)
    ints = [int(f * denom) for f in fracs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    ints = [c // g for c in ints]
    lead = next(c for c in ints if c != 0)
    if lead < 0:
        ints = [-c for c in ints]
    return np.array(ints, dtype=np.int64)


def _image_basis(scaled: np.ndarray, rank: int) -> List[np.ndarray]:
    """Orthogonal primitive integer vectors spanning the column space of ``scaled``"""
    if rank == 1:
        col = next(c for c in scaled.T if np.any(c))
        return [_primitive(col)]

    basis: List[List[Fraction]] = []
    for col in scaled.T:
        if not np.any(col):
            continue
        v = [Fraction(int(c)) for c in col]
        for b in basis:
            coef = sum(p * q for p, q in zip(v, b)) / sum(q * q for q in b)
            v = [p - coef * q for p, q in zip(v, b)]
        if any(v):
            basis.append(v)
        if len(basis) == rank:
            break
    return [_primitive(b) for b in basis]


def simultaneous_diag(gens: Sequence[PauliWord]) -> ToricModel:
    """
    Exact common eigenbasis of commuting Y-free words.

    Column j of A has +1 in row i exactly when bit i of j (most significant
    first) is set; the eigenvectors spanning the matching joint eigenspace are
    the columns of O in that block. Each column of O is a primitive integer
    vector; graph-state families give +-1 columns of squared norm 2^n.
    """
    group = stabilizer_group(gens)
    if any(g.has_y for g in group.gens):
        raise StabilizerError("simultaneous_diag needs Y-free generators")
    m, n = group.n_generators, group.n
    dim = 2 ** n

    columns: List[np.ndarray] = []
    signs: List[List[int]] = []
    for j in range(2 ** m):
        bits = [(j >> (m - 1 - i)) & 1 for i in range(m)]
        x = [1 - b for b in bits]
        scaled = _scaled_projector(group, x)
        rank, rem = divmod(int(np.trace(scaled)), 2 ** m)
        if rem or rank < 1:
            raise StabilizerError(f"joint eigenspace for syndrome {x} has non-integral dimension")
        for vec in _image_basis(scaled, rank):
            columns.append(vec)
            signs.append([1 if b else -1 for b in bits])

    if len(columns) != dim:
        raise StabilizerError(f"eigenbasis has {len(columns)} vectors, expected {dim}")
    O = np.column_stack(columns)
    A = np.array(signs, dtype=np.int64).T
    norms = np.einsum('ij,ij->j', O, O)

    gram = O.T @ O
    if not np.array_equal(gram, np.diag(norms)):
        raise StabilizerError("eigenbasis columns are not orthogonal")
    for i, g in enumerate(group.gens):
        if not np.array_equal(O.T @ dense(g) @ O, np.diag(norms * A[i])):
            raise StabilizerError(f"O^T H_{i + 1} O is not diag(norms * A_{i + 1})")

    logger.debug("diagonalised %d generators on %d qubits (uniform norms: %s)",
                 m, n, bool(np.all(norms == norms[0])))
    return ToricModel(A=A, O=O, norms=norms, gens=group)
