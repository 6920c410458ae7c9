"""
Constants for qgm
"""

import numpy as np

# Pauli matrices (real, Y-free)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.int64)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.int64)
IDENTITY_2 = np.eye(2, dtype=np.int64)

PAULI_LETTERS = {
    (0, 0): 'I',
    (1, 0): 'X',
    (0, 1): 'Z',
    (1, 1): 'Y',
}
PAULI_BITS = {letter: bits for bits, letter in PAULI_LETTERS.items()}

# Scalar kinds of a matrix
SCALAR_RATIONAL = "rational"
SCALAR_FLOAT = "float"

# Size limits
MAX_MATRIX_DIM = 64
MAX_GRAPH_VERTICES = 16
MAX_TORIC_COLUMNS = 32
MAX_TORIC_DEGREE = 4
MAX_HYPERCUBE_N = 5

# Built-in graphs: (n_vertices, edges), 1-indexed
BUILTIN_GRAPHS = {
    'chain3': (3, [(1, 2), (2, 3)]),
    'chain4': (4, [(1, 2), (2, 3), (3, 4)]),
    'claw': (4, [(1, 4), (2, 4), (3, 4)]),
    'fig1': (4, [(1, 2), (1, 3), (2, 3), (2, 4)]),
}

# Sampler names accepted by `qgm sample`
SAMPLERS = ['qcmi', 'gibbs-lssm', 'gibbs-dec', 'gibbs-tree', 'petz']

# Export formats
EXPORT_FORMATS = ['json', 'csv', 'xlsx']

# Schema kinds shipped in src/schemas
SCHEMA_KINDS = [
    'matrix',
    'sampleset',
    'poly',
    'kernel',
    'ideal',
    'projection',
    'toric_model',
    'entropy',
    'scalar',
    'membership',
    'error',
    'runrecord',
]
