"""qgm - quantum graphical models: states, stabilisers, Gibbs varieties and information projection"""

from src.config import ConfigManager, config, get_config
from src.models import (
    Graph,
    IdealPresentation,
    KernelReport,
    PauliWord,
    Poly,
    ProjectionResult,
    RunRecord,
    SampleSet,
    SubsystemShape,
    SymMat,
    ToricModel,
)
from src.core import (
    builtin_graph,
    graph_hamiltonians,
    partial_trace,
    qcmi,
    rel_entropy,
    simultaneous_diag,
    stabilizer_group,
    von_neumann,
)
from src.varieties import (
    certify_projection,
    gv_equations,
    info_project,
    manifold_dim,
    petz_tree,
    toric_ideal,
    vandermonde_kernel,
)
from src.io import FileParser, FormatExporter

__version__ = "1.0.0"
__author__ = "qgm"

__all__ = [
    # Models
    'Graph',
    'IdealPresentation',
    'KernelReport',
    'PauliWord',
    'Poly',
    'ProjectionResult',
    'RunRecord',
    'SampleSet',
    'SubsystemShape',
    'SymMat',
    'ToricModel',
    # States and stabilisers
    'builtin_graph',
    'graph_hamiltonians',
    'partial_trace',
    'qcmi',
    'rel_entropy',
    'simultaneous_diag',
    'stabilizer_group',
    'von_neumann',
    # Varieties
    'certify_projection',
    'gv_equations',
    'info_project',
    'manifold_dim',
    'petz_tree',
    'toric_ideal',
    'vandermonde_kernel',
    # I/O
    'FileParser',
    'FormatExporter',
    # Config
    'config',
    'get_config',
    'ConfigManager',
]
