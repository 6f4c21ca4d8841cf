"""Genus-zero and genus-g character functions of the Heisenberg VOA."""
from __future__ import annotations

from .genus0 import PropagatorSum, genus0_npoint, mode_expansion_oracle, wick
from .genus_g import (
    TRIVIAL,
    CharacterContext,
    ModuleDecomposition,
    NPointResult,
    SlotOperator,
    X_entry,
    X_vector,
    G_vector,
    form_degrees,
    genus_g_npoint,
    genus_g_partition,
    genus_sum,
    get_decomposition,
    handle_names,
    level_vectors,
    module_npoint,
    module_sum,
    o_entry,
    o_vector,
    random_context,
    random_point,
    register_decomposition,
    symbolic_context,
    w_name,
)
from .zhu import (
    ReductionReport,
    ReductionTerm,
    boundary_terms,
    build_kernel,
    compare_series,
    direct_npoint,
    one_point_boundary,
    psi_coefficient,
    q_expansion,
    verify_reduction,
    zhu_reduce,
)

__all__ = [
    "CharacterContext", "G_vector", "ModuleDecomposition", "NPointResult", "PropagatorSum",
    "ReductionReport", "ReductionTerm", "SlotOperator", "TRIVIAL", "X_entry", "X_vector", "boundary_terms", "build_kernel",
    "compare_series", "direct_npoint", "form_degrees", "genus0_npoint", "genus_g_npoint",
    "genus_g_partition", "genus_sum", "get_decomposition", "handle_names", "level_vectors",
    "mode_expansion_oracle", "module_npoint", "module_sum", "o_entry", "o_vector",
    "one_point_boundary", "psi_coefficient", "q_expansion", "random_context", "random_point",
    "register_decomposition", "symbolic_context", "verify_reduction", "w_name", "wick", "zhu_reduce",
]
