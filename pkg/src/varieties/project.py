"""
Quantum information projection onto the Gibbs manifold of a commuting family.

In the common eigenbasis O of the family the problem is classical: with
u_j the diagonal of rho in that basis, the projection has eigenvalues
delta_j = exp((A^T x)_j), where x minimises the convex dual
f(x) = sum_j exp((A^T x)_j) - <A u, x>.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.config import tolerance
from src.core.entropy import gibbs_entropy, rel_entropy
from src.core.matcore import as_array, is_symmetric, min_eigenvalue, random_symmetric, to_float
from src.models import ProjectionResult, ToricModel
from src.utils.errors import (
    CertificateError,
    ConvergenceError,
    NotPositiveError,
    NotSymmetricError,
    ShapeError,
    SupportError,
)
from src.utils.helpers import derive_rng, resolve_seed

logger = logging.getLogger(__name__)


def model_hamiltonians(model: ToricModel) -> List[np.ndarray]:
    """Dense H_i = O diag(A_i / c) O^T"""
    O = model.O.astype(float)
    return [(O * (row / model.norms)) @ O.T for row in model.A.astype(float)]


def model_state(model: ToricModel, x: np.ndarray) -> np.ndarray:
    """exp(sum_i x_i H_i) built from its spectrum"""
    O = model.O.astype(float)
    return (O * (np.exp(model.A.T @ x) / model.norms)) @ O.T


def _merge_columns(A: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct columns, their multiplicities and the summed moments"""
    cols, inverse, counts = np.unique(A.T, axis=0, return_inverse=True, return_counts=True)
    inverse = np.asarray(inverse).reshape(-1)
    merged_u = np.zeros(cols.shape[0])
    np.add.at(merged_u, inverse, u)
    return cols.T.astype(float), counts.astype(float), merged_u


class _Dual:
    """f(x) = sum_g w_g exp((A^T x)_g) - <target, x> on merged columns"""

    def __init__(self, A: np.ndarray, weights: np.ndarray, target: np.ndarray):
        self.A = A
        self.w = weights
        self.target = target

    def value(self, x: np.ndarray) -> float:
        return float(self.w @ np.exp(self.A.T @ x) - self.target @ x)

    def gradient_hessian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        e = self.w * np.exp(self.A.T @ x)
        return self.A @ e - self.target, (self.A * e) @ self.A.T


def _newton(dual: _Dual, x0: np.ndarray, tol: float, max_iter: int, armijo: float,
            history: Optional[Dict[str, List[float]]] = None) -> Tuple[np.ndarray, int, bool, float]:
    """Damped Newton with Armijo backtracking by halving"""
    x = np.array(x0, dtype=float)
    threshold = tol * max(1.0, float(np.max(np.abs(dual.target), initial=0.0)))
    residual = np.inf
    for it in range(max_iter + 1):
        g, H = dual.gradient_hessian(x)
        residual = float(np.max(np.abs(g), initial=0.0))
        fx = dual.value(x)
        if history is not None:
            history['objective'].append(fx)
        if residual <= threshold:
            return x, it, True, residual
        if it == max_iter:
            break
        step = np.linalg.lstsq(H, -g, rcond=None)[0]
        slope = float(g @ step)
        if history is not None:
            history['decrement'].append(-slope)
        t = 1.0
        # below rounding level of f the full step is taken
        tiny = -slope <= 64 * np.finfo(float).eps * max(1.0, abs(fx))
        while not tiny and dual.value(x + t * step) > fx + armijo * t * slope:
            t *= 0.5
            if t < 1e-16:
                logger.debug("line search stalled at residual %.3e", residual)
                return x, it, False, residual
        x = x + t * step
        logger.debug("newton %d: residual %.3e, step %.3g", it, residual, t)
    return x, max_iter, False, residual


def _prepare(rho, model: ToricModel) -> np.ndarray:
    rho = to_float(as_array(rho))
    if rho.shape != (model.dim, model.dim):
        raise ShapeError(f"state is {rho.shape}, model acts on dimension {model.dim}")
    if not np.all(np.isfinite(rho)):
        raise ShapeError("state has non-finite entries")
    if not is_symmetric(rho):
        raise NotSymmetricError("state is not symmetric")
    lowest = min_eigenvalue(rho)
    if lowest <= tolerance('matcore.psd_tol'):
        raise NotPositiveError(f"state must be positive definite (smallest eigenvalue {lowest:.3e})",
                               min_eigenvalue=lowest)
    return rho


def diagonal_moments(rho: np.ndarray, model: ToricModel) -> np.ndarray:
    """u_j = o_j^T rho o_j / c_j, the diagonal of rho in the normalised eigenbasis"""
    O = model.O.astype(float)
    return np.einsum('ij,ik,kj->j', O, rho, O) / model.norms


def info_project(rho, model: ToricModel, tol: Optional[float] = None, max_iter: Optional[int] = None,
                 x0: Optional[np.ndarray] = None) -> ProjectionResult:
    """
    Project a positive definite state onto exp(span of the model's family).

    Args:
        rho: Positive definite symmetric matrix of any trace
        model: Simultaneous diagonalisation of the family
        tol: Relative bound on the dual gradient
        max_iter: Newton iteration cap
        x0: Starting dual point (zero by default)

    Returns:
        ProjectionResult with the projection, the moments b, the dual point and
        the iteration history
    """
    tol = float(tolerance('projection.tol', tol))
    max_iter = int(tolerance('projection.max_iter', max_iter))
    armijo = float(tolerance('projection.armijo'))
    rho = _prepare(rho, model)

    u = diagonal_moments(rho, model)
    if np.any(u <= 0.0):
        raise SupportError("a diagonal moment vanishes; the state is not supported on every eigenvector",
                           zero_columns=np.nonzero(u <= 0.0)[0].tolist())
    A = model.A.astype(float)
    b = A @ u
    merged_A, weights, merged_u = _merge_columns(model.A, u)
    dual = _Dual(merged_A, weights, merged_A @ merged_u)

    start = np.zeros(A.shape[0]) if x0 is None else np.asarray(x0, dtype=float)
    history: Dict[str, List[float]] = {'objective': [], 'decrement': []}
    x, iterations, converged, residual = _newton(dual, start, tol, max_iter, armijo, history)
    if not converged:
        raise ConvergenceError(f"dual Newton did not converge in {iterations} iterations "
                               f"(gradient {residual:.3e})", last_residual=residual)

    delta = np.exp(A.T @ x)
    rho_star = model_state(model, x)
    rho_star = (rho_star + rho_star.T) / 2
    moment_gap = float(np.max(np.abs(A @ delta - b), initial=0.0))
    logger.info("information projection converged in %d iterations (moment residual %.3e)",
                iterations, moment_gap)
    result = ProjectionResult(
        rho_star=rho_star,
        b=b,
        dual=x,
        residual=moment_gap,
        delta=delta,
        u=u,
        iterations=iterations,
        converged=True,
        objective_history=history['objective'],
        decrement_history=history['decrement'],
    )
    result.certificates['gibbs_entropy'] = gibbs_entropy(rho_star)
    result.certificates['rel_entropy'] = rel_entropy(rho, rho_star, generalized=True)
    result.certificates['dual_objective'] = history['objective'][-1]
    return result


# Certificates

def _constraint_free_direction(rng: np.random.Generator, hams: List[np.ndarray]) -> np.ndarray:
    """Random symmetric E with <H_i, E> = 0 for every i"""
    d = hams[0].shape[0]
    E = random_symmetric(rng, d)
    stack = np.array([h.ravel() for h in hams])
    coefs = np.linalg.lstsq(stack @ stack.T, stack @ E.ravel(), rcond=None)[0]
    E = E - (coefs @ stack).reshape(d, d)
    return (E + E.T) / 2


def _map_probes(probe: Callable[[np.random.Generator], Dict[str, Any]], seed: int, count: int,
                threads: Optional[int]) -> List[Dict[str, Any]]:
    threads = int(tolerance('sampling.threads', threads))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda i: probe(derive_rng(seed, i)), range(count)))
    return [probe(derive_rng(seed, i)) for i in range(count)]


def _entropy_certificate(result: ProjectionResult, hams, n_probe, seed, slack, threads) -> Dict[str, Any]:
    star = result.rho_star
    s_star = gibbs_entropy(star)
    room = min_eigenvalue(star)

    def probe(rng: np.random.Generator) -> Dict[str, Any]:
        E = _constraint_free_direction(rng, hams)
        reach = rng.uniform(0.05, 0.95) if rng.uniform() < 0.5 else 1e-3
        t = reach * room / max(np.linalg.norm(E, 2), 1e-300)
        s = gibbs_entropy(star + t * E)
        return {'t': t, 'margin': s_star - s}

    probes = _map_probes(probe, seed, n_probe, threads)
    worst = min(probes, key=lambda p: p['margin'])
    return {'passed': worst['margin'] >= -slack, 'worst_margin': worst['margin'],
            'n_probe': n_probe, 'entropy': s_star, 'witness': worst}


def _minimality_certificate(rho, result: ProjectionResult, model, n_probe, seed, slack, threads) -> Dict[str, Any]:
    d_star = rel_entropy(rho, result.rho_star, generalized=True)
    k = model.A.shape[0]

    def probe(rng: np.random.Generator) -> Dict[str, Any]:
        scale = 1e-3 if rng.uniform() < 0.5 else 1.0
        y = result.dual + scale * rng.standard_normal(k)
        q = model_state(model, y)
        d_probe = rel_entropy(rho, q, generalized=True)
        pythagorean = d_probe - d_star - rel_entropy(result.rho_star, q, generalized=True)
        return {'scale': scale, 'margin': d_probe - d_star, 'pythagorean_gap': pythagorean,
                'y': y.tolist()}

    probes = _map_probes(probe, seed + 1, n_probe, threads)
    worst = min(probes, key=lambda p: p['margin'])
    gap = min(p['pythagorean_gap'] for p in probes)
    return {'passed': worst['margin'] >= -slack and gap >= -1e-6, 'worst_margin': worst['margin'],
            'worst_pythagorean_gap': gap, 'n_probe': n_probe, 'rel_entropy': d_star, 'witness': worst}


def _uniqueness_certificate(rho, result: ProjectionResult, model, restarts, seed) -> Dict[str, Any]:
    spread = 0.0
    witness = None
    scale = max(1.0, float(np.max(np.abs(result.delta))))
    for i in range(restarts):
        x0 = derive_rng(seed + 2, i).uniform(-1.0, 1.0, size=model.A.shape[0])
        other = info_project(rho, model, x0=x0)
        gap = float(np.max(np.abs(other.delta - result.delta))) / scale
        if gap > spread:
            spread, witness = gap, x0.tolist()
    return {'passed': spread <= 1e-8, 'max_spread': spread, 'restarts': restarts, 'witness': witness}


def certify_projection(rho, result: ProjectionResult, model: ToricModel, n_probe: Optional[int] = None,
                       seed: Optional[int] = None, threads: Optional[int] = None) -> Dict[str, Any]:
    """
    Check a projection against probes of the constraint slice and the manifold.

    Runs the entropy certificate (no PSD point with the same moments has larger
    entropy), the minimality certificate (no manifold point is closer to rho)
    and the uniqueness probe (random Newton restarts agree). The report is also
    stored in ``result.certificates``.

    Raises:
        CertificateError: A certificate failed; the failing probe is the witness
    """
    if not result.converged:
        raise CertificateError("projection has not converged")
    rho = _prepare(rho, model)
    n_probe = int(tolerance('projection.n_probe', n_probe))
    slack = float(tolerance('projection.certificate_slack'))
    restarts = int(tolerance('projection.restarts'))
    seed = resolve_seed(seed, tolerance('sampling.default_seed'))
    hams = model_hamiltonians(model)

    report = {
        'entropy': _entropy_certificate(result, hams, n_probe, seed, slack, threads),
        'minimality': _minimality_certificate(rho, result, model, n_probe, seed, slack, threads),
        'uniqueness': _uniqueness_certificate(rho, result, model, restarts, seed),
    }
    report['passed'] = all(part['passed'] for part in report.values())
    result.certificates.update(report)
    for name in ('entropy', 'minimality', 'uniqueness'):
        if not report[name]['passed']:
            raise CertificateError(f"{name} certificate failed", witness=report[name]['witness'])
    logger.info("projection certificates passed (%d probes, %d restarts)", n_probe, restarts)
    return report


# Classical oracle

def ips_project(A: np.ndarray, u: np.ndarray, tol: Optional[float] = None,
                max_iter: Optional[int] = None) -> np.ndarray:
    """
    Iterative proportional scaling for exp(A^T x) with entries of A in {-1, 0, 1}.

    Each update rescales delta_j by r^{A_ij} with r solving the i-th moment
    equation exactly. Returns delta with A delta = A u.
    """
    tol = float(tolerance('projection.ips_tol', tol))
    max_iter = int(tolerance('projection.ips_max_iter', max_iter))
    A = np.asarray(A)
    u = np.asarray(u, dtype=float)
    if not np.all(np.isin(A, (-1, 0, 1))):
        raise ShapeError("proportional scaling needs entries in {-1, 0, 1}")
    if A.shape[1] != u.size:
        raise ShapeError(f"{u.size} moments for {A.shape[1]} columns")
    if np.any(u <= 0.0):
        raise SupportError("proportional scaling needs strictly positive moments")
    target = A @ u
    threshold = tol * max(1.0, float(np.max(np.abs(target), initial=0.0)))
    plus, minus = A == 1, A == -1
    delta = np.ones(A.shape[1])
    for sweep in range(1, max_iter + 1):
        for i in range(A.shape[0]):
            if not (plus[i].any() or minus[i].any()):
                continue
            a_plus, a_minus = delta[plus[i]].sum(), delta[minus[i]].sum()
            if a_plus > 0:
                r = (target[i] + np.sqrt(target[i] ** 2 + 4 * a_plus * a_minus)) / (2 * a_plus)
            elif target[i] < 0:
                r = -a_minus / target[i]
            else:
                raise SupportError(f"moment {i} is out of reach of its row")
            delta = delta * r ** A[i]
        residual = float(np.max(np.abs(A @ delta - target), initial=0.0))
        if residual <= threshold:
            logger.debug("proportional scaling converged after %d sweeps", sweep)
            return delta
    raise ConvergenceError(f"proportional scaling did not converge in {max_iter} sweeps",
                           last_residual=residual)
