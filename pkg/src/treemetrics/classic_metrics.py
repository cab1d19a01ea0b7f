"""Classic baseline distances: tree edit, tree alignment, Hausdorff, Frechet.

Edit and alignment distances operate on ordered labeled trees.  Hausdorff
and curve Frechet are sampled geometric baselines over embedded trees and
polylines; both report values with an additive error bounded by the
sampling resolution (point-to-set distance is 1-Lipschitz along a curve).
"""

from __future__ import annotations

import math

import numpy as np

from .model import RootedTree, EmbeddedTree, TreeError
from .reports import DistanceReport, EditCosts

__all__ = [
    "CapacityError",
    "edit_distance",
    "alignment_distance",
    "hausdorff_distance",
    "curve_frechet",
    "sample_polyline",
    "sample_tree_points",
]


class CapacityError(RuntimeError):
    """An exact-computation size cap was exceeded."""


def _gamma(costs: EditCosts, a: str | None, b: str | None) -> float:
    """Cost of turning label a into label b; None is the empty label."""
    if a is None and b is None:
        return 0.0
    if a is None:
        return costs.insert
    if b is None:
        return costs.delete
    return 0.0 if a == b else costs.relabel


# --------------------------------------------------------------------------
# Ordered tree edit distance
# --------------------------------------------------------------------------


class _EditSolver:
    """Memoized forest-edit recursion with script extraction.

    Forests are tuples of subtree-root ids in sibling order; each root
    stands for its whole subtree.  The recursion decomposes at the
    leftmost tree, which is the classic ordered-edit recurrence.
    """

    def __init__(self, t1: RootedTree, t2: RootedTree, costs: EditCosts):
        self.t1 = t1
        self.t2 = t2
        self.costs = costs
        self.memo: dict = {}

    def label(self, tree, v):
        return tree.nodes[v].label or ""

    def subtree_cost(self, tree, v, op_cost):
        return op_cost * len(tree.subtree(v))

    def dist(self, f1: tuple, f2: tuple) -> float:
        if (f1, f2) in self.memo:
            return self.memo[(f1, f2)][0]
        if not f1 and not f2:
            result = (0.0, None)
        elif not f1:
            r2 = f2[0]
            rest = tuple(self.t2.children(r2)) + f2[1:]
            result = (self.costs.insert + self.dist((), rest), ("ins", r2, (), rest))
        elif not f2:
            r1 = f1[0]
            rest = tuple(self.t1.children(r1)) + f1[1:]
            result = (self.costs.delete + self.dist(rest, ()), ("del", r1, rest, ()))
        else:
            r1, r2 = f1[0], f2[0]
            c1 = tuple(self.t1.children(r1))
            c2 = tuple(self.t2.children(r2))
            del_cost = self.costs.delete + self.dist(c1 + f1[1:], f2)
            ins_cost = self.costs.insert + self.dist(f1, c2 + f2[1:])
            relabel = _gamma(self.costs, self.label(self.t1, r1), self.label(self.t2, r2))
            match_cost = relabel + self.dist(c1, c2) + self.dist(f1[1:], f2[1:])
            best = min(del_cost, ins_cost, match_cost)
            if best == match_cost:
                result = (best, ("match", (r1, r2), (c1, c2), (f1[1:], f2[1:])))
            elif best == del_cost:
                result = (best, ("del", r1, c1 + f1[1:], f2))
            else:
                result = (best, ("ins", r2, f1, c2 + f2[1:]))
        self.memo[(f1, f2)] = result
        return result[0]

    def script(self, f1: tuple, f2: tuple) -> list:
        """Replay memoized choices into a flat edit script."""
        self.dist(f1, f2)
        out = []
        stack = [(f1, f2)]
        while stack:
            key = stack.pop()
            choice = self.memo[key][1]
            if choice is None:
                continue
            op = choice[0]
            if op == "match":
                r1, r2 = choice[1]
                a, b = self.label(self.t1, r1), self.label(self.t2, r2)
                if a != b:
                    out.append({"op": "relabel", "node": r1, "to": b, "cost": self.costs.relabel})
                stack.append(choice[2])
                stack.append(choice[3])
            elif op == "del":
                out.append({"op": "delete", "node": choice[1], "cost": self.costs.delete})
                stack.append((choice[2], choice[3]))
            else:
                out.append({"op": "insert", "node": choice[1], "cost": self.costs.insert})
                stack.append((choice[2], choice[3]))
        return out


def edit_distance(t1: RootedTree, t2: RootedTree, costs: EditCosts | None = None) -> DistanceReport:
    """Minimum-cost ordered edit script turning t1 into t2.

    Operations are relabel, delete, and insert with the given costs;
    matching equal labels is free.  The witness script's costs sum to the
    reported value.
    """
    costs = costs or EditCosts()
    solver = _EditSolver(t1, t2, costs)
    root1, root2 = (t1.root,), (t2.root,)
    value = solver.dist(root1, root2)
    script = solver.script(root1, root2)
    return DistanceReport(
        metric="edit",
        value=value,
        witness=script,
        params={"costs": [costs.relabel, costs.insert, costs.delete]},
    )


# --------------------------------------------------------------------------
# Ordered tree alignment distance
# --------------------------------------------------------------------------


class _AlignSolver:
    """Jiang-Wang-Zhang alignment over ordered forests.

    Forest states are tuples of sibling subtree roots.  The two split
    cases let an inserted (resp. deleted) root absorb a run of trees from
    the opposite forest, which is what distinguishes alignment from edit.
    """

    def __init__(self, t1: RootedTree, t2: RootedTree, costs: EditCosts):
        self.t1 = t1
        self.t2 = t2
        self.costs = costs
        self.tree_memo: dict = {}
        self.forest_memo: dict = {}

    def label(self, tree, v):
        return tree.nodes[v].label or ""

    def wipe_cost(self, tree, roots, op_cost):
        return op_cost * sum(len(tree.subtree(r)) for r in roots)

    def tree(self, v1: int | None, v2: int | None) -> float:
        key = (v1, v2)
        if key in self.tree_memo:
            return self.tree_memo[key]
        if v1 is None and v2 is None:
            result = 0.0
        elif v2 is None:
            result = self.wipe_cost(self.t1, (v1,), self.costs.delete)
        elif v1 is None:
            result = self.wipe_cost(self.t2, (v2,), self.costs.insert)
        else:
            c1 = tuple(self.t1.children(v1))
            c2 = tuple(self.t2.children(v2))
            # either the roots pair up, or one root pairs with a blank and
            # the whole opposite tree drops into the forest below it
            result = min(
                _gamma(self.costs, self.label(self.t1, v1), self.label(self.t2, v2))
                + self.forest(c1, c2),
                self.costs.delete + self.forest(c1, (v2,)),
                self.costs.insert + self.forest((v1,), c2),
            )
        self.tree_memo[key] = result
        return result

    def forest(self, f1: tuple, f2: tuple) -> float:
        key = (f1, f2)
        if key in self.forest_memo:
            return self.forest_memo[key]
        if not f1 and not f2:
            result = 0.0
        elif not f2:
            result = self.wipe_cost(self.t1, f1, self.costs.delete)
        elif not f1:
            result = self.wipe_cost(self.t2, f2, self.costs.insert)
        else:
            last1, last2 = f1[-1], f2[-1]
            opts = [
                self.forest(f1[:-1], f2[:-1]) + self.tree(last1, last2),
                self.forest(f1[:-1], f2) + self.tree(last1, None),
                self.forest(f1, f2[:-1]) + self.tree(None, last2),
            ]
            # insert last2's root spanning a suffix run of f1
            c2 = tuple(self.t2.children(last2))
            for k in range(len(f1)):
                opts.append(
                    self.costs.insert + self.forest(f1[:k], f2[:-1]) + self.forest(f1[k:], c2)
                )
            # delete last1's root spanning a suffix run of f2
            c1 = tuple(self.t1.children(last1))
            for k in range(len(f2)):
                opts.append(
                    self.costs.delete + self.forest(f1[:-1], f2[:k]) + self.forest(c1, f2[k:])
                )
            result = min(opts)
        self.forest_memo[key] = result
        return result


def alignment_distance(
    t1: RootedTree,
    t2: RootedTree,
    costs: EditCosts | None = None,
    max_degree: int = 12,
) -> DistanceReport:
    """Minimum cost over alignments of two ordered labeled trees.

    Both trees are padded with inserted nodes until isomorphic, then
    relabel costs are paid on mismatched pairs.  Degree above
    ``max_degree`` raises CapacityError (the split enumeration is
    per-degree exponential in nothing, but guard anyway per contract).
    """
    costs = costs or EditCosts()
    for tree in (t1, t2):
        worst = max(len(tree.children(v)) for v in tree.node_ids())
        if worst > max_degree:
            raise CapacityError(f"node degree {worst} exceeds bound {max_degree}")
    solver = _AlignSolver(t1, t2, costs)
    value = solver.tree(t1.root, t2.root)
    return DistanceReport(
        metric="alignment",
        value=value,
        witness=None,
        params={"costs": [costs.relabel, costs.insert, costs.delete], "max_degree": max_degree},
    )


# --------------------------------------------------------------------------
# Sampled geometric baselines
# --------------------------------------------------------------------------


def sample_polyline(poly, resolution: float):
    """Points along a polyline with spacing <= resolution, vertices included."""
    if resolution <= 0:
        raise TreeError(f"resolution must be positive, got {resolution}")
    pts = [tuple(map(float, poly[0]))]
    for a, b in zip(poly, poly[1:]):
        seg = math.dist(a, b)
        if seg == 0:
            continue
        steps = max(1, math.ceil(seg / resolution))
        for s in range(1, steps + 1):
            r = s / steps
            pts.append((a[0] + r * (b[0] - a[0]), a[1] + r * (b[1] - a[1])))
    return pts


def sample_tree_points(t: EmbeddedTree, resolution: float) -> np.ndarray:
    """Sample every edge polyline of an embedded tree at the resolution."""
    pts = [t.position(t.tree.root)]
    for v in t.tree.node_ids():
        if v == t.tree.root:
            continue
        pts.extend(sample_polyline(t.geometry[v], resolution))
    return np.asarray(pts, dtype=float)


def _directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    # max over a of min distance into b; chunked to bound memory
    worst = 0.0
    for i in range(0, len(a), 256):
        chunk = a[i : i + 256]
        d = np.sqrt(((chunk[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
        worst = max(worst, float(d.min(axis=1).max()))
    return worst


def hausdorff_distance(t1: EmbeddedTree, t2: EmbeddedTree, resolution: float = 0.1) -> DistanceReport:
    """Symmetric Hausdorff distance between sampled embedded trees.

    The additive error is at most ``resolution`` because point-to-set
    distance varies 1-Lipschitz along each polyline.
    """
    a = sample_tree_points(t1, resolution)
    b = sample_tree_points(t2, resolution)
    value = max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))
    return DistanceReport(
        metric="hausdorff",
        value=value,
        witness=None,
        params={"resolution": resolution, "error_bound": resolution},
    )


def curve_frechet(p, q, resolution: float = 0.1) -> float:
    """Discrete Frechet distance between two polylines at the resolution.

    Standard coupling DP over the sample grid; upper-bounds the continuous
    Frechet distance within an additive sampling error.
    """
    a = sample_polyline(p, resolution)
    b = sample_polyline(q, resolution)
    return discrete_frechet(a, b)


def discrete_frechet(a, b) -> float:
    """Coupling DP on two point sequences (no resampling)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    ca = np.empty((n, m))
    ca[0, 0] = d[0, 0]
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], d[0, j])
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], d[i, 0])
        for j in range(1, m):
            ca[i, j] = max(min(ca[i - 1, j], ca[i - 1, j - 1], ca[i, j - 1]), d[i, j])
    return float(ca[-1, -1])
