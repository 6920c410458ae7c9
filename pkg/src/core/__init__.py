"""Matrix algebra, graphs, entropies and the stabiliser formalism"""

from .matcore import (
    bell_state,
    commutator,
    eig_sym,
    expand_operator,
    flatten_sym,
    hs_inner,
    identity,
    is_psd,
    is_symmetric,
    kron,
    kron_all,
    mat_exp,
    mat_inv_sqrt,
    mat_log,
    mat_sqrt,
    min_eigenvalue,
    partial_trace,
    permute_factors,
    random_symmetric,
    sym_index,
    symmetric_basis,
    to_float,
    to_rational,
    trace,
    unflatten_sym,
)
from .graphs import (
    builtin_graph,
    cliques,
    is_tree,
    make_graph,
    path_graph,
    petz_order,
    separates,
    separator_triples,
    to_networkx,
)
from .entropy import gibbs_entropy, qcmi, rel_entropy, von_neumann
from .pauli import (
    commutes,
    conjugating_word,
    contains_minus_identity,
    dense,
    gf2_rank,
    gf2_solve,
    graph_hamiltonians,
    product,
    projector,
    simultaneous_diag,
    stab_dimension,
    stabilizer_group,
    symplectic_product,
)

__all__ = [
    'bell_state',
    'commutator',
    'eig_sym',
    'expand_operator',
    'flatten_sym',
    'hs_inner',
    'identity',
    'is_psd',
    'is_symmetric',
    'kron',
    'kron_all',
    'mat_exp',
    'mat_inv_sqrt',
    'mat_log',
    'mat_sqrt',
    'min_eigenvalue',
    'partial_trace',
    'permute_factors',
    'random_symmetric',
    'sym_index',
    'symmetric_basis',
    'to_float',
    'to_rational',
    'trace',
    'unflatten_sym',
    'builtin_graph',
    'cliques',
    'is_tree',
    'make_graph',
    'path_graph',
    'petz_order',
    'separates',
    'separator_triples',
    'to_networkx',
    'gibbs_entropy',
    'qcmi',
    'rel_entropy',
    'von_neumann',
    'commutes',
    'conjugating_word',
    'contains_minus_identity',
    'dense',
    'gf2_rank',
    'gf2_solve',
    'graph_hamiltonians',
    'product',
    'projector',
    'simultaneous_diag',
    'stab_dimension',
    'stabilizer_group',
    'symplectic_product',
]
