"""
Exception hierarchy for qgm.

Every error carries a stable ``code`` that the CLI reports in its
``{"error": code, "detail": ...}`` document.
"""

from typing import Any, Dict, Optional


class QGMError(Exception):
    """Base class for all qgm computation errors"""

    code = "qgm"

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to the machine-readable CLI document"""
        doc: Dict[str, Any] = {'error': self.code, 'detail': self.detail}
        if self.context:
            doc['context'] = {k: _plain(v) for k, v in self.context.items()}
        return doc


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


class ShapeError(QGMError):
    code = "shape"


class ScalarKindError(QGMError):
    code = "scalar_kind"


class NotSymmetricError(QGMError):
    code = "not_symmetric"


class NotPositiveError(QGMError):
    code = "not_positive"


class NonFiniteError(QGMError):
    code = "non_finite"


class GraphError(QGMError):
    code = "graph"


class StabilizerError(QGMError):
    code = "stabilizer"


class SamplingError(QGMError):
    code = "sampling"


class IncompatibleMarginalsError(QGMError):
    code = "incompatible_marginals"


class InsufficientSamplesError(QGMError):
    code = "insufficient_samples"


class RankDecisionError(QGMError):
    code = "rank_decision"


class DegreeBoundError(QGMError):
    code = "degree_bound"


class SupportError(QGMError):
    code = "support"


class ConvergenceError(QGMError):
    code = "convergence"

    def __init__(self, detail: str, last_residual: Optional[float] = None, **context: Any):
        super().__init__(detail, last_residual=last_residual, **context)
        self.last_residual = last_residual


class CertificateError(QGMError):
    code = "certificate"

    def __init__(self, detail: str, witness: Any = None, **context: Any):
        super().__init__(detail, witness=witness, **context)
        self.witness = witness


class ParseError(QGMError):
    code = "parse"
