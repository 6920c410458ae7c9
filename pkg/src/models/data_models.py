"""
Data models for qgm
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from src.models.polynomial import Poly
from src.utils.constants import PAULI_BITS, PAULI_LETTERS, SCALAR_FLOAT, SCALAR_RATIONAL
from src.utils.errors import GraphError, IncompatibleMarginalsError, NotSymmetricError, ParseError, ShapeError
from src.utils.helpers import format_fraction, parse_fraction


class Provenance(Enum):
    """Where an ideal presentation came from"""
    TORIC = "toric"
    CONJUGATED = "conjugated"
    INTERPOLATED = "interpolated"


def scalar_kind(m: np.ndarray) -> str:
    """'rational' for object arrays of exact numbers, 'float' otherwise"""
    return SCALAR_RATIONAL if np.asarray(m).dtype == object else SCALAR_FLOAT


def matrix_to_rows(m: np.ndarray) -> List[List[Any]]:
    """Dense row-major rows; rationals rendered as "p/q" strings"""
    if scalar_kind(m) == SCALAR_RATIONAL:
        return [[format_fraction(Fraction(v)) for v in row] for row in m]
    return [[float(v) for v in row] for row in np.asarray(m, dtype=float)]


@dataclass(frozen=True)
class SubsystemShape:
    """Local dimensions (d_1, ..., d_N) of a tensor-product space"""

    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ShapeError("SubsystemShape needs at least one factor")
        if any(d < 2 for d in dims):
            raise ShapeError(f"every local dimension must be >= 2, got {dims}")
        object.__setattr__(self, 'dims', dims)

    @classmethod
    def qubits(cls, n_factors: int) -> "SubsystemShape":
        return cls((2,) * n_factors)

    @property
    def n(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    def sub(self, factors: Sequence[int]) -> "SubsystemShape":
        return SubsystemShape(tuple(self.dims[i] for i in factors))

    def to_dict(self) -> Dict[str, Any]:
        return {'dims': list(self.dims)}


@dataclass(frozen=True)
class SymMat:
    """
    Symmetric matrix over exact rationals or binary64.

    ``matrix`` is a read-only dense array: dtype object holding Fractions for the
    rational kind, float64 for the float kind. Symmetry is checked on
    construction.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ShapeError(f"expected a non-empty square matrix, got shape {m.shape}")
        if m.dtype == object:
            m = np.vectorize(Fraction, otypes=[object])(m)
            if not np.all(m == m.T):
                raise NotSymmetricError("rational matrix is not exactly symmetric")
        else:
            m = m.astype(float)
            scale = max(1.0, float(np.max(np.abs(m))))
            if np.max(np.abs(m - m.T)) > 1e-12 * scale:
                raise NotSymmetricError("float matrix is not symmetric within 1e-12")
            m = (m + m.T) / 2
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def scalar(self) -> str:
        return scalar_kind(self.matrix)

    def triangle(self) -> List[Any]:
        """Stored lower-triangle coordinates in SampleSet order"""
        rows, cols = np.tril_indices(self.n)
        return list(self.matrix[rows, cols])

    def to_float(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        """Matrix JSON document"""
        return {'n': self.n, 'scalar': self.scalar, 'rows': matrix_to_rows(self.matrix)}

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "SymMat":
        try:
            n = int(doc['n'])
            kind = doc.get('scalar', SCALAR_FLOAT)
            rows = doc['rows']
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ParseError(f"matrix rows do not form an {n}x{n} array")
            if kind == SCALAR_RATIONAL:
                data = np.array([[parse_fraction(v) for v in r] for r in rows], dtype=object)
            elif kind == SCALAR_FLOAT:
                data = np.array(rows, dtype=float)
            else:
                raise ParseError(f"unknown scalar kind {kind!r}")
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed matrix document: {e}") from e
        return cls(data)


@dataclass(frozen=True)
class EigDecomp:
    """Eigenvalues (descending) and orthonormal eigenvector columns"""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


@dataclass(frozen=True)
class EntropyReport:
    """Entropy value in bits and the number of eigenvalues above the zero clamp"""

    value: float
    rank_used: int

    def to_dict(self) -> Dict[str, Any]:
        return {'value': self.value, 'rank_used': self.rank_used}


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 1..n_vertices"""

    n_vertices: int
    edges: FrozenSet[Tuple[int, int]] = frozenset()
    name: Optional[str] = None

    def __post_init__(self):
        if self.n_vertices < 1:
            raise GraphError("a graph needs at least one vertex")
        normalised = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (1 <= u <= self.n_vertices and 1 <= v <= self.n_vertices):
                raise GraphError(f"edge ({u},{v}) outside 1..{self.n_vertices}")
            normalised.add((min(u, v), max(u, v)))
        object.__setattr__(self, 'edges', frozenset(normalised))

    @property
    def vertices(self) -> List[int]:
        return list(range(1, self.n_vertices + 1))

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def neighbours(self, v: int) -> List[int]:
        return sorted({b for a, b in self.edges if a == v} | {a for a, b in self.edges if b == v})

    def to_dict(self) -> Dict[str, Any]:
        return {'n_vertices': self.n_vertices, 'edges': [list(e) for e in self.sorted_edges()], 'name': self.name}


@dataclass(frozen=True, order=True)
class SeparatorTriple:
    """Vertex j separates i from k"""

    i: int
    j: int
    k: int


@dataclass(frozen=True)
class PetzStep:
    """One leaf-pair reduction of the Petz recursion on the vertex set ``vertices``"""

    v1: int
    v2: int
    vertices: Tuple[int, ...]

    @property
    def middle(self) -> Tuple[int, ...]:
        return tuple(v for v in self.vertices if v not in (self.v1, self.v2))


@dataclass(frozen=True)
class PauliWord:
    """Signed Pauli product encoded by X-support and Z-support bit vectors"""

    x_bits: Tuple[int, ...]
    z_bits: Tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        x = tuple(int(b) & 1 for b in self.x_bits)
        z = tuple(int(b) & 1 for b in self.z_bits)
        if len(x) != len(z) or not x:
            raise ShapeError("x_bits and z_bits must be non-empty and of equal length")
        if self.sign not in (1, -1):
            raise ShapeError(f"sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, 'x_bits', x)
        object.__setattr__(self, 'z_bits', z)

    @property
    def n(self) -> int:
        return len(self.x_bits)

    @property
    def has_y(self) -> bool:
        return any(x and z for x, z in zip(self.x_bits, self.z_bits))

    def vector(self) -> np.ndarray:
        """GF(2) vector (x | z) of length 2n"""
        return np.array(self.x_bits + self.z_bits, dtype=np.uint8)

    @classmethod
    def from_vector(cls, v: Sequence[int], sign: int = 1) -> "PauliWord":
        v = [int(b) & 1 for b in v]
        half = len(v) // 2
        return cls(tuple(v[:half]), tuple(v[half:]), sign)

    @classmethod
    def parse(cls, text: str) -> "PauliWord":
        """Parse e.g. 'XZZI', '+XZ', '-ZZ'"""
        s = text.strip().replace('−', '-')
        sign = 1
        if s[:1] in ('+', '-'):
            sign = -1 if s[0] == '-' else 1
            s = s[1:]
        if not s or any(ch not in PAULI_BITS for ch in s.upper()):
            raise ParseError(f"not a Pauli word: {text!r}")
        bits = [PAULI_BITS[ch] for ch in s.upper()]
        return cls(tuple(b[0] for b in bits), tuple(b[1] for b in bits), sign)

    def letters(self) -> str:
        return ''.join(PAULI_LETTERS[(x, z)] for x, z in zip(self.x_bits, self.z_bits))

    def __str__(self) -> str:
        return ('-' if self.sign < 0 else '') + self.letters()


@dataclass(frozen=True)
class StabilizerGroup:
    """Commuting, independent generators whose group excludes -Id"""

    n: int
    gens: Tuple[PauliWord, ...]
    contains_minus_id: bool = False

    @property
    def n_generators(self) -> int:
        return len(self.gens)

    @property
    def k(self) -> int:
        """Number of logical qubits: n minus the number of generators"""
        return self.n - len(self.gens)

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'gens': [str(g) for g in self.gens]}


@dataclass(frozen=True)
class ToricModel:
    """
    Simultaneous diagonalisation of a stabiliser family.

    ``O`` has integer columns with squared norms ``norms``; for graph
    Hamiltonians every entry is +-1 and every norm is 2^n. Then
    O^T H_i O = diag(norms * A[i]).
    """

    A: np.ndarray
    O: np.ndarray
    norms: np.ndarray
    gens: StabilizerGroup

    @property
    def n_qubits(self) -> int:
        return self.gens.n

    @property
    def dim(self) -> int:
        return self.O.shape[0]

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.norms == self.norms[0]))

    def orthonormal_basis(self) -> np.ndarray:
        return self.O / np.sqrt(self.norms.astype(float))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n_qubits,
            'gens': [str(g) for g in self.gens.gens],
            'A': self.A.astype(int).tolist(),
            'O': self.O.astype(int).tolist(),
            'norms': self.norms.astype(int).tolist(),
        }


@dataclass
class SampleSet:
    """Flattened symmetric-matrix samples in the lower-triangle row order"""

    ambient_dim: int
    points: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(0, self.ambient_dim) if pts.size == 0 else pts.reshape(1, -1)
        if pts.shape[1] != self.ambient_dim:
            raise ShapeError(f"points have {pts.shape[1]} coordinates, ambient_dim is {self.ambient_dim}")
        self.points = pts

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def matrix_dim(self) -> int:
        n = int((np.sqrt(8 * self.ambient_dim + 1) - 1) / 2)
        return n

    def matrices(self) -> List[np.ndarray]:
        n = self.matrix_dim
        rows, cols = np.tril_indices(n)
        out = []
        for p in self.points:
            m = np.zeros((n, n))
            m[rows, cols] = p
            m[cols, rows] = p
            out.append(m)
        return out

    def split(self, fraction: float) -> Tuple["SampleSet", "SampleSet"]:
        """Deterministic split: the trailing ``fraction`` of points becomes the holdout"""
        n_hold = int(round(self.count * fraction))
        cut = self.count - n_hold
        return (SampleSet(self.ambient_dim, self.points[:cut], dict(self.meta)),
                SampleSet(self.ambient_dim, self.points[cut:], dict(self.meta)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ambient_dim': self.ambient_dim,
            'meta': self.meta,
            'points': [[float(v) for v in p] for p in self.points],
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "SampleSet":
        try:
            ambient = int(doc['ambient_dim'])
            points = np.array(doc['points'], dtype=float).reshape(-1, ambient) if doc['points'] \
                else np.zeros((0, ambient))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed SampleSet document: {e}") from e
        return cls(ambient, points, dict(doc.get('meta', {})))


@dataclass
class MarginalPack:
    """One- and two-body marginals of a state on a graph"""

    shape: SubsystemShape
    two_body: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)
    one_body: Dict[int, np.ndarray] = field(default_factory=dict)

    def check_compatible(self, tol: float = 1e-8) -> float:
        """
        Verify that every two-body marginal reduces to the one-body marginal
        of each endpoint. Missing one-body entries are filled in from the first
        incident edge. Returns the worst Frobenius mismatch.
        """
        worst = 0.0
        for (u, v), m in sorted(self.two_body.items()):
            du, dv = self.shape.dims[u - 1], self.shape.dims[v - 1]
            t = np.asarray(m, dtype=float).reshape(du, dv, du, dv)
            for vertex, reduced in ((u, np.einsum('ijkj->ik', t)), (v, np.einsum('ijil->jl', t))):
                ref = self.one_body.get(vertex)
                if ref is None:
                    self.one_body[vertex] = reduced
                    continue
                worst = max(worst, float(np.linalg.norm(reduced - np.asarray(ref, dtype=float))))
        if worst > tol:
            raise IncompatibleMarginalsError(f"marginals disagree on a shared vertex by {worst:.3e}",
                                             mismatch=worst)
        return worst


@dataclass(frozen=True)
class LatticeVector:
    """Integer kernel vector u of A, split as u = u_plus - u_minus"""

    u: Tuple[int, ...]

    @property
    def plus(self) -> Tuple[int, ...]:
        return tuple(max(c, 0) for c in self.u)

    @property
    def minus(self) -> Tuple[int, ...]:
        return tuple(max(-c, 0) for c in self.u)

    @property
    def degree(self) -> int:
        return max(sum(self.plus), sum(self.minus))

    def binomial(self) -> Poly:
        n = len(self.u)
        return Poly.monomial(self.plus) - Poly.monomial(self.minus) if n else Poly.zero(0)


@dataclass
class KernelReport:
    """Polynomials found to vanish on a sample at one degree"""

    degree: int
    kernel_dim: int
    basis: List[Poly] = field(default_factory=list)
    residual: float = 0.0
    singular_values: List[float] = field(default_factory=list)
    gap_ratio: Optional[float] = None
    n_fit: int = 0
    n_holdout: int = 0
    linear_relations: List[Poly] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'degree': self.degree,
            'kernel_dim': self.kernel_dim,
            'basis': [p.to_dict() for p in self.basis],
            'residual': self.residual,
            'singular_values': self.singular_values,
            'gap_ratio': self.gap_ratio,
            'n_fit': self.n_fit,
            'n_holdout': self.n_holdout,
            'linear_relations': [p.to_dict() for p in self.linear_relations],
            'metadata': self.metadata,
        }


@dataclass
class IdealPresentation:
    """Generators of an ideal with their provenance"""

    n_vars: int
    generators: List[Poly] = field(default_factory=list)
    provenance: Provenance = Provenance.TORIC
    metadata: Dict[str, Any] = field(default_factory=dict)

    def by_degree(self) -> Dict[int, List[Poly]]:
        grouped: Dict[int, List[Poly]] = {}
        for g in self.generators:
            grouped.setdefault(g.degree, []).append(g)
        return grouped

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_vars': self.n_vars,
            'provenance': self.provenance.value,
            'generators': [g.to_dict() for g in self.generators],
            'metadata': self.metadata,
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "IdealPresentation":
        try:
            return cls(
                n_vars=int(doc['n_vars']),
                generators=[Poly.from_dict(g) for g in doc['generators']],
                provenance=Provenance(doc.get('provenance', 'toric')),
                metadata=dict(doc.get('metadata', {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed ideal document: {e}") from e


@dataclass
class ProjectionResult:
    """Quantum information projection of a state onto a commuting Gibbs manifold"""

    rho_star: np.ndarray
    b: np.ndarray
    dual: np.ndarray
    residual: float
    delta: np.ndarray
    u: np.ndarray
    iterations: int = 0
    converged: bool = False
    objective_history: List[float] = field(default_factory=list)
    decrement_history: List[float] = field(default_factory=list)
    certificates: Dict[str, Any] = field(default_factory=dict)

    def moment_residual(self, hamiltonians: Sequence[np.ndarray]) -> float:
        """max_i |tr(H_i rho*) - b_i|"""
        moments = np.array([np.trace(h @ self.rho_star) for h in hamiltonians])
        return float(np.max(np.abs(moments - self.b)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rho_star': {'n': int(self.rho_star.shape[0]), 'scalar': SCALAR_FLOAT,
                         'rows': matrix_to_rows(self.rho_star)},
            'b': [float(v) for v in self.b],
            'dual': [float(v) for v in self.dual],
            'delta': [float(v) for v in self.delta],
            'u': [float(v) for v in self.u],
            'residual': self.residual,
            'iterations': self.iterations,
            'converged': self.converged,
            'objective_history': self.objective_history,
            'decrement_history': self.decrement_history,
            'certificates': self.certificates,
        }


@dataclass
class RunRecord:
    """Everything needed to replay one CLI invocation"""

    argv: List[str]
    seed: Optional[int]
    versions: Dict[str, str] = field(default_factory=dict)
    input_digests: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    started_at: str = ""
    exit_code: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'argv': self.argv,
            'seed': self.seed,
            'versions': self.versions,
            'input_digests': self.input_digests,
            'outputs': self.outputs,
            'wall_time': self.wall_time,
            'started_at': self.started_at,
            'exit_code': self.exit_code,
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "RunRecord":
        try:
            return cls(
                argv=[str(a) for a in doc['argv']],
                seed=doc.get('seed'),
                versions=dict(doc.get('versions', {})),
                input_digests=dict(doc.get('input_digests', {})),
                outputs=list(doc.get('outputs', [])),
                wall_time=float(doc.get('wall_time', 0.0)),
                started_at=str(doc.get('started_at', '')),
                exit_code=int(doc.get('exit_code', 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed RunRecord: {e}") from e
