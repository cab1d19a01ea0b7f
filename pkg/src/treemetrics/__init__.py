"""treemetrics: exactly-verifiable distances between rooted and merge trees.

Desk-scale implementations of a Frechet-style correspondence distance for
trees (euclidean and merge-tree variants), the interleaving distance via
good-map search, classic baselines (tree edit, alignment, Hausdorff,
curve Frechet), and a partition-reduction gadget reproducing the 1-vs-3
hardness gap.
"""

from .model import (
    EmbeddedTree,
    MergeTree,
    Node,
    PointRef,
    RootedTree,
    TreeError,
    ancestor_at_offset,
    edge_point,
    lca,
    node_point,
    ray_point,
)
from .io import ParseError, canonicalize, parse_tree, serialize_tree
from .augment import GridTree, augment, augment_heights
from .reports import DistanceReport, EditCosts
from .classic_metrics import (
    CapacityError,
    alignment_distance,
    curve_frechet,
    edit_distance,
    hausdorff_distance,
)
from .interleaving import (
    Delta,
    MapAssignment,
    check_compatible_pair,
    check_good_map,
    good_map_exists,
    interleaving_distance,
)
from .frechet_like import (
    Correspondence,
    FLQuery,
    brute_force_fl,
    check_correspondence,
    decide_fl,
    fl_distance,
)

__all__ = [
    "CapacityError",
    "Correspondence",
    "Delta",
    "DistanceReport",
    "EditCosts",
    "EmbeddedTree",
    "FLQuery",
    "GridTree",
    "MapAssignment",
    "MergeTree",
    "Node",
    "ParseError",
    "PointRef",
    "RootedTree",
    "TreeError",
    "alignment_distance",
    "ancestor_at_offset",
    "augment",
    "augment_heights",
    "brute_force_fl",
    "canonicalize",
    "check_compatible_pair",
    "check_correspondence",
    "check_good_map",
    "curve_frechet",
    "decide_fl",
    "edge_point",
    "edit_distance",
    "fl_distance",
    "good_map_exists",
    "hausdorff_distance",
    "interleaving_distance",
    "lca",
    "node_point",
    "parse_tree",
    "ray_point",
    "serialize_tree",
]
