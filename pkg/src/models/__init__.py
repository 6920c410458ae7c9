"""Data models for qgm"""

from .polynomial import MonomialBasis, Poly
from .data_models import (
    EigDecomp,
    EntropyReport,
    Graph,
    IdealPresentation,
    KernelReport,
    LatticeVector,
    MarginalPack,
    PauliWord,
    PetzStep,
    ProjectionResult,
    Provenance,
    RunRecord,
    SampleSet,
    SeparatorTriple,
    StabilizerGroup,
    SubsystemShape,
    SymMat,
    ToricModel,
    matrix_to_rows,
    scalar_kind,
)

__all__ = [
    'EigDecomp',
    'EntropyReport',
    'Graph',
    'IdealPresentation',
    'KernelReport',
    'LatticeVector',
    'MarginalPack',
    'MonomialBasis',
    'PauliWord',
    'PetzStep',
    'Poly',
    'ProjectionResult',
    'Provenance',
    'RunRecord',
    'SampleSet',
    'SeparatorTriple',
    'StabilizerGroup',
    'SubsystemShape',
    'SymMat',
    'ToricModel',
    'matrix_to_rows',
    'scalar_kind',
]
