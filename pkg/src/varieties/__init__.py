"""Samplers, implicitisation, toric ideals and information projection"""

from .samplers import (
    DecomposableParametrisation,
    ExpSymParametrisation,
    LSSMParametrisation,
    Parametrisation,
    QCMIParametrisation,
    commutant_kernel,
    commuting_tree_hamiltonian,
    commuting_tree_state,
    decomposable_term,
    gibbs_sample_commuting_tree,
    gibbs_sample_decomposable,
    gibbs_sample_lssm,
    jacobian,
    lssm_basis,
    manifold_dim,
    marginal_pack,
    normalise_state,
    numerical_rank,
    petz_chain3,
    petz_chain3_primed,
    petz_recover,
    petz_tree,
    sample_petz,
    sample_qcmi_chain3,
)
from .implicit import eval_poly, membership, vandermonde_kernel
from .toric import (
    IdealCache,
    add_ones_row,
    gv_equations,
    hypercube_matrix,
    ideal_cache,
    ideal_contains,
    monomial_map,
    precompute_hypercube_ideal,
    pullback,
    toric_ideal,
)
from .project import (
    certify_projection,
    diagonal_moments,
    info_project,
    ips_project,
    model_hamiltonians,
    model_state,
)

__all__ = [
    'DecomposableParametrisation',
    'ExpSymParametrisation',
    'LSSMParametrisation',
    'Parametrisation',
    'QCMIParametrisation',
    'commutant_kernel',
    'commuting_tree_hamiltonian',
    'commuting_tree_state',
    'decomposable_term',
    'gibbs_sample_commuting_tree',
    'gibbs_sample_decomposable',
    'gibbs_sample_lssm',
    'jacobian',
    'lssm_basis',
    'manifold_dim',
    'marginal_pack',
    'normalise_state',
    'numerical_rank',
    'petz_chain3',
    'petz_chain3_primed',
    'petz_recover',
    'petz_tree',
    'sample_petz',
    'sample_qcmi_chain3',
    'eval_poly',
    'membership',
    'vandermonde_kernel',
    'IdealCache',
    'add_ones_row',
    'gv_equations',
    'hypercube_matrix',
    'ideal_cache',
    'ideal_contains',
    'monomial_map',
    'precompute_hypercube_ideal',
    'pullback',
    'toric_ideal',
    'certify_projection',
    'diagonal_moments',
    'info_project',
    'ips_project',
    'model_hamiltonians',
    'model_state',
]
