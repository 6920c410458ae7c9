"""Utilities for qgm"""

from .constants import *
from .errors import *
from .helpers import *

__all__ = [
    # Constants
    'SIGMA_X',
    'SIGMA_Z',
    'IDENTITY_2',
    'PAULI_LETTERS',
    'PAULI_BITS',
    'SCALAR_RATIONAL',
    'SCALAR_FLOAT',
    'BUILTIN_GRAPHS',
    'SAMPLERS',
    'EXPORT_FORMATS',
    'SCHEMA_KINDS',
    # Errors
    'QGMError',
    'ShapeError',
    'ScalarKindError',
    'NotSymmetricError',
    'NotPositiveError',
    'NonFiniteError',
    'GraphError',
    'StabilizerError',
    'SamplingError',
    'IncompatibleMarginalsError',
    'InsufficientSamplesError',
    'RankDecisionError',
    'DegreeBoundError',
    'SupportError',
    'ConvergenceError',
    'CertificateError',
    'ParseError',
    # Helpers
    'hash_string',
    'file_digest',
    'canonical_json_dumps',
    'format_fraction',
    'parse_fraction',
    'resolve_seed',
    'derive_rng',
]
