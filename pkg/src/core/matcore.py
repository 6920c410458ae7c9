"""
Symmetric-matrix algebra on exact rationals and binary64.

Exact matrices are numpy object arrays of ``Fraction`` (integer arrays are
accepted as exact too); floating matrices are float64 arrays. Tensor factor 1
is the slowest-varying index of a Kronecker product.
"""

import logging
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from src.config import config, tolerance
from src.models import EigDecomp, SubsystemShape, SymMat
from src.utils.constants import MAX_MATRIX_DIM
from src.utils.errors import (
    ConvergenceError,
    NonFiniteError,
    NotPositiveError,
    ScalarKindError,
    ShapeError,
)

logger = logging.getLogger(__name__)

MatrixLike = Union[np.ndarray, SymMat, Sequence[Sequence]]

_RATIONAL = "rational"
_INTEGER = "integer"
_FLOAT = "float"


def as_array(m: MatrixLike) -> np.ndarray:
    """Unwrap a SymMat or convert nested lists into an ndarray"""
    if isinstance(m, SymMat):
        return m.matrix
    return np.asarray(m)


def _kind(m: np.ndarray) -> str:
    if m.dtype == object:
        return _RATIONAL
    if np.issubdtype(m.dtype, np.integer) or m.dtype == bool:
        return _INTEGER
    return _FLOAT


def _combine_kinds(a: np.ndarray, b: np.ndarray) -> str:
    ka, kb = _kind(a), _kind(b)
    if {ka, kb} == {_RATIONAL, _FLOAT}:
        raise ScalarKindError(f"cannot combine {ka} and {kb} matrices")
    if _FLOAT in (ka, kb):
        return _FLOAT
    if _RATIONAL in (ka, kb):
        return _RATIONAL
    return _INTEGER


def to_rational(m: MatrixLike) -> np.ndarray:
    """Exact copy with Fraction entries (floats converted exactly)"""
    arr = as_array(m)
    return np.vectorize(Fraction, otypes=[object])(arr) if arr.size else arr.astype(object)


def to_float(m: MatrixLike) -> np.ndarray:
    return np.asarray(as_array(m), dtype=float)


def _square(m: np.ndarray, name: str = "matrix") -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m.shape[0]


def _check_dim(n: int) -> None:
    limit = int(config.get('matcore.max_dim', MAX_MATRIX_DIM))
    if n > limit:
        raise ShapeError(f"dimension {n} exceeds the limit of {limit}", n=n, limit=limit)


def identity(n: int, exact: bool = False) -> np.ndarray:
    if exact:
        eye = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            eye[i, i] = Fraction(1)
        return eye
    return np.eye(n)


def _identity_like(n: int, kind: str) -> np.ndarray:
    if kind == _RATIONAL:
        return identity(n, exact=True)
    if kind == _INTEGER:
        return np.eye(n, dtype=np.int64)
    return np.eye(n)


# Tensor products and marginals

def kron(a: MatrixLike, b: MatrixLike) -> np.ndarray:
    """Kronecker product; exact when both inputs are exact"""
    a, b = as_array(a), as_array(b)
    _square(a, "left factor")
    _square(b, "right factor")
    _combine_kinds(a, b)
    _check_dim(a.shape[0] * b.shape[0])
    return np.kron(a, b)


def kron_all(*factors: MatrixLike) -> np.ndarray:
    if not factors:
        raise ShapeError("kron_all needs at least one factor")
    result = as_array(factors[0])
    for f in factors[1:]:
        result = kron(result, f)
    return result


def _check_shape(m: np.ndarray, shape: SubsystemShape) -> None:
    n = _square(m)
    _check_dim(n)
    if shape.n != n:
        raise ShapeError(f"shape {shape.dims} describes dimension {shape.n}, matrix has {n}")


def _factor_list(indices: Sequence[int], shape: SubsystemShape, name: str) -> List[int]:
    factors = sorted(set(int(i) for i in indices))
    if not factors:
        raise ShapeError(f"{name} must be nonempty")
    if factors[0] < 0 or factors[-1] >= shape.n_factors:
        raise ShapeError(f"{name} {factors} outside factors 0..{shape.n_factors - 1}")
    return factors


def partial_trace(m: MatrixLike, shape: SubsystemShape, keep: Sequence[int]) -> np.ndarray:
    """
    Trace out every factor not in ``keep`` (0-based factor indices).

    The kept factors stay in their original relative order. Exact inputs give
    exact outputs.
    """
    m = as_array(m)
    _check_shape(m, shape)
    keep = _factor_list(keep, shape, "keep")
    traced = [i for i in range(shape.n_factors) if i not in keep]
    if not traced:
        return m.copy()

    dims = shape.dims
    N = len(dims)
    tensor = m.reshape(dims + dims)
    order = keep + traced
    tensor = tensor.transpose(order + [N + i for i in order])
    dk = int(np.prod([dims[i] for i in keep]))
    dt = int(np.prod([dims[i] for i in traced]))
    tensor = tensor.reshape(dk, dt, dk, dt)

    result = tensor[:, 0, :, 0].copy()
    for t in range(1, dt):
        result = result + tensor[:, t, :, t]
    return result


def expand_operator(op: MatrixLike, shape: SubsystemShape, support: Sequence[int]) -> np.ndarray:
    """
    Embed ``op`` acting on the factors ``support`` (in that order) into the
    full space, with identity on every other factor.
    """
    op = as_array(op)
    support = [int(i) for i in support]
    if len(set(support)) != len(support):
        raise ShapeError(f"support {support} repeats a factor")
    _check_dim(shape.n)
    _factor_list(support, shape, "support")
    sub = int(np.prod([shape.dims[i] for i in support]))
    if _square(op, "operator") != sub:
        raise ShapeError(f"operator of dimension {op.shape[0]} does not act on factors {support}")

    rest = [i for i in range(shape.n_factors) if i not in support]
    order = support + rest
    d_rest = int(np.prod([shape.dims[i] for i in rest])) if rest else 1
    big = np.kron(op, _identity_like(d_rest, _kind(op)))

    N = shape.n_factors
    dims_in_order = tuple(shape.dims[i] for i in order)
    tensor = big.reshape(dims_in_order + dims_in_order)
    inverse = list(np.argsort(order))
    tensor = tensor.transpose(inverse + [N + i for i in inverse])
    return tensor.reshape(shape.n, shape.n)


def permute_factors(m: MatrixLike, shape: SubsystemShape, order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor p is old factor order[p]"""
    m = as_array(m)
    _check_shape(m, shape)
    order = [int(i) for i in order]
    if sorted(order) != list(range(shape.n_factors)):
        raise ShapeError(f"{order} is not a permutation of the factors")
    N = shape.n_factors
    tensor = m.reshape(shape.dims + shape.dims).transpose(order + [N + i for i in order])
    return tensor.reshape(shape.n, shape.n)


# Spectral calculus

def _jacobi(m: np.ndarray, tol: float, max_sweeps: int):
    """Cyclic Jacobi rotations; returns unsorted eigenvalues, eigenvectors and sweep count"""
    a = m.astype(float).copy()
    n = a.shape[0]
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v, 0

    for sweep in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off < tol * norm:
            return np.diag(a).copy(), v, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", last_residual=float(off / norm))


def eig_sym(m: MatrixLike, method: Optional[str] = None, tol: Optional[float] = None) -> EigDecomp:
    """
    Eigendecomposition of a real symmetric matrix, eigenvalues descending.

    Args:
        m: Symmetric matrix (exact inputs are converted to binary64)
        method: 'eigh' (LAPACK) or 'jacobi' (cyclic Jacobi sweeps)
        tol: Jacobi stopping rule on the off-diagonal Frobenius mass, relative

    Returns:
        EigDecomp with orthonormal eigenvector columns
    """
    arr = to_float(m)
    _check_dim(_square(arr))
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("eig_sym received non-finite entries")
    arr = (arr + arr.T) / 2
    method = tolerance('matcore.eig_method', method)

    if method == 'jacobi':
        values, vectors, sweeps = _jacobi(
            arr, tolerance('matcore.jacobi_tol', tol), int(tolerance('matcore.jacobi_max_sweeps'))
        )
        logger.debug("Jacobi converged after %d sweeps (n=%d)", sweeps, arr.shape[0])
    elif method == 'eigh':
        values, vectors = np.linalg.eigh(arr)
    else:
        raise ValueError(f"Unknown eigen method: {method}")

    order = np.argsort(values)[::-1]
    return EigDecomp(values=values[order], vectors=vectors[:, order])


def mat_func(m: MatrixLike, f: Callable[[np.ndarray], np.ndarray],
             decomp: Optional[EigDecomp] = None) -> np.ndarray:
    """Apply a scalar function to the spectrum of a symmetric matrix"""
    decomp = decomp or eig_sym(m)
    result = (decomp.vectors * f(decomp.values)) @ decomp.vectors.T
    return (result + result.T) / 2


def mat_exp(m: MatrixLike) -> np.ndarray:
    return mat_func(m, np.exp)


def _require_positive(decomp: EigDecomp, tol: float, what: str) -> None:
    lowest = float(decomp.values[-1])
    if lowest <= tol:
        raise NotPositiveError(f"{what} needs eigenvalues > {tol:g}, smallest is {lowest:.3e}",
                               min_eigenvalue=lowest)


def mat_log(m: MatrixLike, tol: Optional[float] = None) -> np.ndarray:
    tol = tolerance('matcore.psd_tol', tol)
    decomp = eig_sym(m)
    _require_positive(decomp, tol, "mat_log")
    return mat_func(m, np.log, decomp)


def mat_sqrt(m: MatrixLike, tol: Optional[float] = None) -> np.ndarray:
    tol = tolerance('matcore.psd_tol', tol)
    decomp = eig_sym(m)
    lowest = float(decomp.values[-1])
    if lowest < -tol:
        raise NotPositiveError(f"mat_sqrt needs a PSD matrix, smallest eigenvalue is {lowest:.3e}",
                               min_eigenvalue=lowest)
    return mat_func(m, lambda w: np.sqrt(np.clip(w, 0.0, None)), decomp)


def mat_inv_sqrt(m: MatrixLike, tol: Optional[float] = None) -> np.ndarray:
    tol = tolerance('matcore.psd_tol', tol)
    decomp = eig_sym(m)
    _require_positive(decomp, tol, "mat_inv_sqrt")
    return mat_func(m, lambda w: 1.0 / np.sqrt(w), decomp)


# Scalars and predicates

def hs_inner(a: MatrixLike, b: MatrixLike):
    """Hilbert-Schmidt inner product tr(a b); exact for exact inputs"""
    a, b = as_array(a), as_array(b)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    _combine_kinds(a, b)
    return np.sum(a * b.T)


def trace(m: MatrixLike):
    m = as_array(m)
    _square(m)
    return np.sum(np.diagonal(m))


def is_symmetric(m: MatrixLike, tol: Optional[float] = None) -> bool:
    m = as_array(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    if _kind(m) != _FLOAT:
        return bool(np.all(m == m.T))
    tol = tolerance('matcore.symmetry_tol', tol)
    return bool(np.max(np.abs(m - m.T), initial=0.0) <= tol * max(1.0, float(np.max(np.abs(m), initial=0.0))))


def is_psd(m: MatrixLike, tol: Optional[float] = None) -> bool:
    tol = tolerance('matcore.psd_tol', tol)
    return float(eig_sym(m).values[-1]) >= -tol


def min_eigenvalue(m: MatrixLike) -> float:
    return float(eig_sym(m).values[-1])


def commutator(a: MatrixLike, b: MatrixLike) -> np.ndarray:
    a, b = as_array(a), as_array(b)
    return a @ b - b @ a


# Coordinates and constructors

def flatten_sym(m: MatrixLike) -> np.ndarray:
    """Lower triangle row by row: (1,1), (2,1), (2,2), (3,1), ..."""
    m = as_array(m)
    rows, cols = np.tril_indices(_square(m))
    return m[rows, cols]


def unflatten_sym(v: Sequence, n: Optional[int] = None) -> np.ndarray:
    v = np.asarray(v)
    if n is None:
        n = int((np.sqrt(8 * v.size + 1) - 1) / 2)
    if v.size != n * (n + 1) // 2:
        raise ShapeError(f"{v.size} coordinates do not describe a {n}x{n} symmetric matrix")
    m = np.zeros((n, n), dtype=v.dtype)
    rows, cols = np.tril_indices(n)
    m[rows, cols] = v
    m[cols, rows] = v
    return m


def sym_index(i: int, j: int) -> int:
    """0-based coordinate of entry (i, j) in the flattened order"""
    if i < j:
        i, j = j, i
    return i * (i + 1) // 2 + j


def random_symmetric(rng: np.random.Generator, n: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Symmetric matrix with independent uniform entries on and above the diagonal"""
    upper = rng.uniform(low, high, size=(n, n))
    upper = np.triu(upper)
    return upper + np.triu(upper, 1).T


def symmetric_basis(d: int) -> List[np.ndarray]:
    """Basis of real symmetric d x d matrices, starting with the identity"""
    basis = [np.eye(d)]
    for j in range(d - 1):
        e = np.zeros((d, d))
        e[j, j] = 1.0
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d))
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
    return basis


def bell_state() -> np.ndarray:
    """(|00> + |11>)(<00| + <11|)/2 as an exact 4 x 4 matrix"""
    rho = np.full((4, 4), Fraction(0), dtype=object)
    for i in (0, 3):
        for j in (0, 3):
            rho[i, j] = Fraction(1, 2)
    return rho
