"""
Von Neumann entropy, quantum relative entropy and conditional mutual
information. Every value is reported in bits.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.config import tolerance
from src.core.matcore import as_array, eig_sym, partial_trace, to_float
from src.models import EntropyReport, SubsystemShape
from src.utils.errors import NotPositiveError, ShapeError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


def _spectrum(m, psd_tol: float, what: str):
    decomp = eig_sym(m)
    lowest = float(decomp.values[-1])
    if lowest < -psd_tol:
        raise NotPositiveError(f"{what} has eigenvalue {lowest:.3e} below -{psd_tol:g}", min_eigenvalue=lowest)
    return decomp


def _clamp_threshold(values: np.ndarray, zero_clamp: float) -> float:
    return zero_clamp * max(float(values[0]), 1.0)


def von_neumann(rho, tol: Optional[float] = None, check_trace: bool = True) -> EntropyReport:
    """
    S(rho) = -tr(rho log2 rho).

    Args:
        rho: Density matrix (PSD within ``tol``)
        tol: PSD tolerance on eigenvalues
        check_trace: Require trace within 1e-9 of 1; disable for subnormalised input

    Returns:
        EntropyReport with the value in bits and the number of eigenvalues used
    """
    psd_tol = tolerance('matcore.psd_tol', tol)
    rho = to_float(rho)
    if check_trace and abs(float(np.trace(rho)) - 1.0) > 1e-9:
        raise NotPositiveError(f"density matrix must have trace 1, got {float(np.trace(rho)):.12g}")

    values = _spectrum(rho, psd_tol, "density matrix").values
    cut = max(_clamp_threshold(values, tolerance('entropy.zero_clamp')), psd_tol)
    kept = values[values > cut]
    value = float(-np.sum(kept * np.log(kept)) / LN2)
    return EntropyReport(value=value + 0.0, rank_used=int(kept.size))


def _subset(indices: Sequence[int]) -> frozenset:
    return frozenset(int(i) for i in indices)


def qcmi(rho, shape: SubsystemShape, a: Sequence[int], c: Sequence[int],
         b: Sequence[int] = (), tol: Optional[float] = None, check_trace: bool = True) -> float:
    """
    I(A:C|B) = S(AB) + S(BC) - S(ABC) - S(B), in bits.

    ``a``, ``b`` and ``c`` are disjoint 0-based factor subsets; factors outside
    their union are traced out first. An empty ``b`` gives the mutual
    information I(A:C).
    """
    A, B, C = _subset(a), _subset(b), _subset(c)
    if not A or not C:
        raise ShapeError("subsets A and C must be nonempty")
    if A & B or A & C or B & C:
        raise ShapeError(f"subsets overlap: A={sorted(A)} B={sorted(B)} C={sorted(C)}")
    rho = as_array(rho)

    def S(factors: frozenset) -> float:
        if not factors:
            return 0.0
        return von_neumann(partial_trace(rho, shape, sorted(factors)), tol, check_trace).value

    value = S(A | B) + S(B | C) - S(A | B | C) - S(B)
    logger.debug("I(%s:%s|%s) = %.3e", sorted(A), sorted(C), sorted(B), value)
    return value


def rel_entropy(rho, sigma, tol: Optional[float] = None, generalized: bool = False) -> float:
    """
    Quantum relative entropy D(rho || sigma) in bits.

    The plain form is tr rho (log rho - log sigma). With ``generalized`` the
    unnormalised form tr rho (log rho - log sigma) - tr rho + tr sigma is used,
    which is non-negative for any PSD pair. Returns ``math.inf`` when the
    support of rho is not contained in the support of sigma.
    """
    psd_tol = tolerance('matcore.psd_tol', tol)
    zero_clamp = tolerance('entropy.zero_clamp')
    rho, sigma = to_float(rho), to_float(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")

    r = _spectrum(rho, psd_tol, "rho")
    s = _spectrum(sigma, psd_tol, "sigma")

    s_cut = max(_clamp_threshold(s.values, zero_clamp), psd_tol)
    support = s.values > s_cut
    outside = s.vectors[:, ~support]
    leak = outside.T @ rho @ outside
    if leak.size and np.linalg.norm(leak) >= tolerance('entropy.support_tol'):
        logger.debug("support of rho leaves support of sigma (leak %.3e)", np.linalg.norm(leak))
        return math.inf

    r_cut = max(_clamp_threshold(r.values, zero_clamp), psd_tol)
    r_keep = r.values > r_cut
    lam = r.values[r_keep]
    overlaps = (r.vectors[:, r_keep].T @ s.vectors[:, support]) ** 2

    value = float(np.sum(lam * np.log(lam)) - np.sum(lam * (overlaps @ np.log(s.values[support]))))
    if generalized:
        value += float(np.trace(sigma) - np.trace(rho))
    return value / LN2


def gibbs_entropy(m, tol: Optional[float] = None) -> float:
    """-tr(m ln m - m) in nats, for PSD m of any trace"""
    psd_tol = tolerance('matcore.psd_tol', tol)
    values = _spectrum(to_float(m), psd_tol, "matrix").values
    kept = values[values > max(_clamp_threshold(values, tolerance('entropy.zero_clamp')), psd_tol)]
    return float(-np.sum(kept * np.log(kept)) + np.sum(np.clip(values, 0.0, None)))
