"""Seeded random instance generators used by the CLI and the test suites.

All generators are deterministic functions of their ``random.Random``
argument (or seed), so identical seeds give byte-identical trees.
"""

from __future__ import annotations

import random

from .model import EmbeddedTree, MergeTree, Node, RootedTree

__all__ = [
    "random_merge_tree",
    "random_labeled_tree",
    "random_path_embedded_tree",
]


def random_merge_tree(
    rng: random.Random,
    leaves: int,
    height_range: tuple[float, float] = (-6.0, 0.0),
    integer_heights: bool = True,
) -> MergeTree:
    """A random merge tree with exactly ``leaves`` leaves.

    Topology is grown by splitting a random pending branch until the leaf
    budget is spent; heights are drawn from the range and forced strictly
    decreasing along every edge.  Integer heights keep augmented grids
    small, which the exact-search metrics rely on.
    """
    if leaves < 1:
        raise ValueError("need at least one leaf")
    lo, hi = height_range
    nodes = [Node(id=0, parent=None)]
    height = {0: float(hi)}

    def pick_height(parent_h: float) -> float:
        if integer_heights:
            top = int(parent_h) if parent_h == int(parent_h) else int(parent_h // 1)
            choices = [v for v in range(int(lo), top) if v < parent_h]
            if not choices:
                return parent_h - 1.0
            return float(rng.choice(choices))
        span = parent_h - lo
        return parent_h - rng.uniform(0.05, max(span, 0.1))

    # open branches we may still extend or split
    open_leaves = [0]
    made_leaves = 1
    while made_leaves < leaves:
        v = rng.choice(open_leaves)
        # split v into two children; v stops being a leaf
        for _ in range(2):
            nid = len(nodes)
            nodes.append(Node(id=nid, parent=v))
            nodes[v].children.append(nid)
            height[nid] = pick_height(height[v])
            open_leaves.append(nid)
        open_leaves.remove(v)
        made_leaves += 1
    # occasionally stretch a path above the root region by inserting
    # degree-2 nodes; keeps path-only shapes in the mix
    tree = RootedTree(nodes)
    return MergeTree(tree, height)


def random_labeled_tree(rng: random.Random, max_nodes: int, labels: str = "abc") -> RootedTree:
    """A random ordered labeled tree with 1..max_nodes nodes."""
    n = rng.randint(1, max_nodes)
    nodes = [Node(id=0, parent=None, label=rng.choice(labels))]
    for i in range(1, n):
        parent = rng.randrange(i)
        nodes.append(Node(id=i, parent=parent, label=rng.choice(labels)))
        nodes[parent].children.append(i)
    return RootedTree(nodes)


def random_path_embedded_tree(
    rng: random.Random,
    segments: int = 4,
    step: float = 1.0,
) -> EmbeddedTree:
    """A single-leaf embedded tree: one root-to-leaf polyline in the plane.

    The polyline starts at the origin and takes ``segments`` random steps;
    consecutive duplicate points are avoided so every edge has positive
    length.
    """
    pts = [(0.0, 0.0)]
    for _ in range(segments):
        dx = rng.uniform(-step, step)
        dy = rng.uniform(-step, step)
        if abs(dx) + abs(dy) < 0.05:
            dx = step
        last = pts[-1]
        pts.append((last[0] + dx, last[1] + dy))
    nodes = [Node(id=0, parent=None), Node(id=1, parent=0)]
    nodes[0].children.append(1)
    tree = RootedTree(nodes)
    return EmbeddedTree(tree, {0: [pts[0]], 1: pts})
