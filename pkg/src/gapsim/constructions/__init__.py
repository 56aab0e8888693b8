"""Builders of simulator Hamiltonians, each returning a ConstructionOutput."""
from .classical import classical_dr, mismatch_penalty
from .common import ConstructionOutput, GadgetPlan, zero_ancilla
from .diluters import (
    TREE_ZERO_COST,
    TreeNode,
    star_band_isolated,
    star_levels,
    star_spectrum,
    star_weak_diluter,
    tree_cost_matrix,
    tree_diluter,
    tree_ground_states,
    tree_layout,
    tree_site,
)
from .examples import (
    build_HA,
    build_HB,
    collective_ops,
    dicke_state,
    ha_ground_basis,
    hb_pair_offset,
    vertex_cover_hamiltonian,
)
from .gadgets import (
    GadgetErrors,
    PauliTarget,
    fork_couplings,
    gadget_3to2,
    gadget_errors,
    gadget_fork,
    gadget_subdivision,
    limit_check,
    pauli_degrees,
    pauli_targets,
    rescale,
    tune_delta,
)
from .pipeline import already_reduced, compose_outputs, full_dr_pipeline, plan_pipeline

__all__ = [
    "ConstructionOutput", "GadgetPlan", "zero_ancilla",
    "classical_dr", "mismatch_penalty",
    "TREE_ZERO_COST", "TreeNode", "tree_layout", "tree_site", "tree_cost_matrix",
    "tree_diluter", "tree_ground_states",
    "star_levels", "star_spectrum", "star_band_isolated", "star_weak_diluter",
    "build_HA", "build_HB", "ha_ground_basis", "hb_pair_offset", "dicke_state",
    "collective_ops", "vertex_cover_hamiltonian",
    "PauliTarget", "pauli_targets", "fork_couplings", "pauli_degrees", "GadgetErrors",
    "gadget_errors", "gadget_subdivision", "gadget_3to2", "gadget_fork", "tune_delta",
    "rescale", "limit_check",
    "already_reduced", "compose_outputs", "full_dr_pipeline", "plan_pipeline",
]
