"""
Numerical implicitisation: low-degree polynomials vanishing on a sample.

Coordinates are rescaled to unit RMS and Vandermonde columns to unit norm
before the SVD; kernel vectors are mapped back to the original coordinates.
Quadrics are searched on the affine span of the sample, so the reported
degree-2 kernel counts only relations that are new modulo the linear ones.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import qr

from src.config import tolerance
from src.models import KernelReport, MonomialBasis, Poly, SampleSet
from src.utils.errors import (
    InsufficientSamplesError,
    NonFiniteError,
    RankDecisionError,
    ShapeError,
)

logger = logging.getLogger(__name__)


def _rms_scale(points: np.ndarray) -> np.ndarray:
    scale = np.sqrt(np.mean(points ** 2, axis=0))
    scale[scale == 0.0] = 1.0
    return scale


def _require_samples(n_points: int, basis_size: int, oversample: float) -> None:
    needed = int(np.ceil(oversample * basis_size))
    if n_points < needed:
        raise InsufficientSamplesError(
            f"{n_points} fitting points for {basis_size} monomials; need at least {needed}",
            needed=needed, available=n_points,
        )


def _kernel_rows(v: np.ndarray, tol: float, gap: float) -> Tuple[np.ndarray, np.ndarray, Optional[float]]:
    """
    Right null vectors of ``v`` (rows of the returned array), the singular
    values and the gap ratio across the cut.
    """
    norms = np.linalg.norm(v, axis=0)
    norms[norms == 0.0] = 1.0
    _, s, vt = np.linalg.svd(v / norms, full_matrices=False)
    n_cols = v.shape[1]
    s_full = np.zeros(n_cols)
    s_full[:s.size] = s
    s_max = s_full[0] if s_full[0] > 0 else 1.0
    small = s_full < tol * s_max
    kernel_dim = int(np.sum(small))
    rank = n_cols - kernel_dim

    if kernel_dim and rank:
        ratio = float(s_full[rank - 1] / max(s_full[rank], np.finfo(float).tiny))
    elif rank:
        ratio = float(s_full[rank - 1] / (tol * s_max))
    else:
        ratio = None
    if ratio is not None and ratio < gap:
        raise RankDecisionError(
            f"singular value gap {ratio:.3g} below {gap:g} at the cut (kernel dim {kernel_dim})",
            gap_ratio=ratio,
        )
    kernel = vt[rank:] / norms
    return kernel, s_full, ratio


def _sparsify(kernel: np.ndarray, drop: float = 1e-10) -> np.ndarray:
    """Rows in reduced form on pivot columns chosen by column-pivoted QR"""
    if kernel.shape[0] == 0:
        return kernel
    k = kernel.shape[0]
    _, _, piv = qr(kernel, mode='economic', pivoting=True)
    reduced = np.linalg.solve(kernel[:, piv[:k]], kernel)
    reduced[np.abs(reduced) < drop * np.max(np.abs(reduced), axis=1, keepdims=True)] = 0.0
    return reduced


def _unscale(basis: MonomialBasis, coefs: np.ndarray, scale: np.ndarray) -> Poly:
    """Polynomial in original coordinates from coefficients in x / scale"""
    terms = {}
    for mono, c in zip(basis.monomials(), coefs):
        if c == 0.0:
            continue
        factor = 1.0
        for var, exp in mono:
            factor *= scale[var] ** exp
        terms[mono] = float(c) / factor
    return Poly(basis.n_vars, terms)


def _relative_residuals(poly: Poly, points: np.ndarray) -> np.ndarray:
    values, scale = poly.evaluate_batch(points, with_scale=True)
    return np.divide(np.abs(values), scale, out=np.zeros_like(values), where=scale > 0)


def _validate(polys: Sequence[Poly], holdout: np.ndarray, threshold: float) -> float:
    if not polys or holdout.shape[0] == 0:
        return 0.0
    worst = 0.0
    for i, p in enumerate(polys):
        r = float(np.max(_relative_residuals(p, holdout)))
        if r > threshold:
            raise RankDecisionError(f"relation {i} fails on held-out points (relative residual {r:.3e})",
                                    residual=r)
        worst = max(worst, r)
    return worst


def _plain_kernel(fit: np.ndarray, degree: int, tol: float, gap: float, oversample: float):
    n = fit.shape[1]
    basis = MonomialBasis(n, degree)
    _require_samples(fit.shape[0], basis.size, oversample)
    scale = _rms_scale(fit)
    kernel, s, ratio = _kernel_rows(basis.vandermonde(fit / scale), tol, gap)
    polys = [_unscale(basis, row, scale) for row in _sparsify(kernel)]
    return polys, s, ratio


def _affine_chart(points: np.ndarray, codim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Centre and orthonormal row basis of the affine span of ``points``"""
    centre = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centre, full_matrices=False)
    return centre, vt[:points.shape[1] - codim]


def _quadrics_on_chart(fit: np.ndarray, codim: int, tol: float, gap: float, oversample: float):
    """
    Quadrics vanishing on the sample, found in coordinates t of its affine
    span and pulled back to the original coordinates.
    """
    scale = _rms_scale(fit)
    scaled = fit / scale
    centre, chart = _affine_chart(scaled, codim)
    t = (scaled - centre) @ chart.T
    basis = MonomialBasis(chart.shape[0], 2)
    _require_samples(t.shape[0], basis.size, oversample)
    kernel, s, ratio = _kernel_rows(basis.vandermonde(t), tol, gap)

    inv_scale = 1.0 / scale
    quadrics = []
    for row in _sparsify(kernel):
        Q, lin, const = basis.poly_from_vector(row).quadratic_parts()
        Q, lin = Q.astype(float), lin.astype(float)
        # t = chart (x' - centre), x' = x / scale
        Qx = chart.T @ Q @ chart
        lx = chart.T @ lin - 2.0 * Qx @ centre
        cx = float(centre @ Qx @ centre - lin @ chart @ centre + float(const))
        Qx = inv_scale[:, None] * Qx * inv_scale[None, :]
        lx = inv_scale * lx
        quadrics.append(Poly.from_quadratic(Qx, lx, cx))
    return quadrics, s, ratio


def vandermonde_kernel(samples: SampleSet, degree: int, tol: Optional[float] = None,
                       quotient_linear: bool = True, holdout_fraction: Optional[float] = None) -> KernelReport:
    """
    Polynomials of degree <= ``degree`` vanishing on a sample.

    Args:
        samples: Points to interpolate
        degree: 1 or 2 with the linear quotient, any degree without it
        tol: Relative singular value cut
        quotient_linear: Search quadrics modulo the linear relations
        holdout_fraction: Trailing share of points kept for validation

    Returns:
        KernelReport; for degree 2 with the quotient, ``basis`` holds the new
        quadrics and ``linear_relations`` the degree-1 kernel
    """
    tol = tolerance('implicit.tol', tol)
    gap = float(tolerance('implicit.gap_ratio'))
    oversample = float(tolerance('implicit.oversample'))
    holdout_fraction = tolerance('implicit.holdout_fraction', holdout_fraction)
    threshold = float(tolerance('implicit.holdout_threshold'))
    if degree < 1:
        raise ShapeError(f"degree must be at least 1, got {degree}")
    if not np.all(np.isfinite(samples.points)):
        raise NonFiniteError("sample contains non-finite coordinates")

    fit_set, hold_set = samples.split(holdout_fraction)
    fit, hold = fit_set.points, hold_set.points

    if degree == 1 or not quotient_linear:
        polys, s, ratio = _plain_kernel(fit, degree, tol, gap, oversample)
        residual = _validate(polys, hold, threshold)
        linear: List[Poly] = polys if degree == 1 else []
        logger.info("degree %d kernel: %d relations (gap %.3g)", degree, len(polys), ratio or 0.0)
        return KernelReport(degree=degree, kernel_dim=len(polys), basis=polys, residual=residual,
                            singular_values=[float(v) for v in s], gap_ratio=ratio,
                            n_fit=fit.shape[0], n_holdout=hold.shape[0], linear_relations=linear,
                            metadata={'quotient_linear': quotient_linear, 'tol': tol})

    if degree != 2:
        raise ShapeError("the linear quotient is implemented for degree 2 only")
    linear, _, _ = _plain_kernel(fit, 1, tol, gap, oversample)
    _validate(linear, hold, threshold)
    quadrics, s, ratio = _quadrics_on_chart(fit, len(linear), tol, gap, oversample)
    residual = _validate(quadrics, hold, threshold)
    logger.info("degree 2 kernel modulo %d linear relations: %d quadrics (gap %.3g)",
                len(linear), len(quadrics), ratio or 0.0)
    return KernelReport(degree=2, kernel_dim=len(quadrics), basis=quadrics, residual=residual,
                        singular_values=[float(v) for v in s], gap_ratio=ratio,
                        n_fit=fit.shape[0], n_holdout=hold.shape[0], linear_relations=linear,
                        metadata={'quotient_linear': True, 'tol': tol,
                                  'affine_dim': samples.ambient_dim - len(linear)})


def eval_poly(p: Poly, point: Sequence):
    """Value of ``p`` at one point; exact when both are exact"""
    return p.evaluate(list(point))


def membership(samples: SampleSet, candidates: Sequence[Poly], tol: Optional[float] = None) -> pd.DataFrame:
    """
    Residual table of candidate relations on a sample.

    The residual of p at x is |p(x)| divided by the sum of the absolute values
    of its terms at x, so it is independent of the sample scale.
    """
    tol = tolerance('implicit.holdout_threshold', tol)
    rows = []
    for i, p in enumerate(candidates):
        if p.n_vars != samples.ambient_dim:
            raise ShapeError(f"candidate {i} has {p.n_vars} variables, sample has {samples.ambient_dim}")
        values = np.abs(p.evaluate_batch(samples.points)) if samples.count else np.zeros(0)
        relative = _relative_residuals(p, samples.points) if samples.count else np.zeros(0)
        worst = float(np.max(relative, initial=0.0))
        rows.append({
            'poly': i,
            'degree': p.degree,
            'terms': len(p),
            'max_residual': worst,
            'max_abs_residual': float(np.max(values, initial=0.0)),
            'passed': worst < tol,
        })
    return pd.DataFrame(rows, columns=['poly', 'degree', 'terms', 'max_residual', 'max_abs_residual', 'passed'])
