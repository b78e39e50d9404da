"""Hierarchical fork rectangles, slab folding and bond percolation experiments."""

from .geometry import (
    Block,
    FiniteGraph,
    Orientation,
    PairKind,
    PlanarRect,
    SlabVertex,
    classify_pair,
    graph_union,
    induced_rect_graph,
)
from .gridgen import (
    ParamSeed,
    RectCatalog,
    audit_catalog,
    build_catalog,
    derive_params,
    randomize_symmetry,
    sample_nested_grids,
)
from .percolation import (
    BondConfig,
    CrossingSpec,
    crossing_event,
    estimate_crossing,
    fkg_check,
    label_clusters,
    phi_census,
    road_survival,
    sample_config,
)
from .planner import ParamPlan, PlanError, choose_m, construct_k, rect_dimensions, validate_plan
from .slicing import assemble_phi, balanced_cut, cut_rect, fold_slice, overlap_audit
from .tree import build_abstract_forest, build_overlap_tree, ray

__version__ = "0.1.0"

__all__ = [
    "Block", "FiniteGraph", "Orientation", "PairKind", "PlanarRect", "SlabVertex",
    "classify_pair", "graph_union", "induced_rect_graph",
    "ParamSeed", "RectCatalog", "audit_catalog", "build_catalog", "derive_params",
    "randomize_symmetry", "sample_nested_grids",
    "BondConfig", "CrossingSpec", "crossing_event", "estimate_crossing", "fkg_check",
    "label_clusters", "phi_census", "road_survival", "sample_config",
    "ParamPlan", "PlanError", "choose_m", "construct_k", "rect_dimensions", "validate_plan",
    "assemble_phi", "balanced_cut", "cut_rect", "fold_slice", "overlap_audit",
    "build_abstract_forest", "build_overlap_tree", "ray",
]  # fmt: skip
