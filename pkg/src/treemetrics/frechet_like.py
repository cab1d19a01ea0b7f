"""Frechet-like correspondence distance between rooted trees.

The distance is the minimum over valid correspondences R of the largest
pair cost, where a valid R relates the two trees' point sets subject to:

  (1)  totality both ways;
  (2)  interval monotonicity between comparable matched pairs;
  (3)  closure under lowest common ancestors;
  (4)  every leaf pairs with a leaf, unless a shared partner also pairs
       with the leaf's nearest branching ancestor.

Two cost variants share all machinery: the merge variant costs a pair by
its height difference, the euclidean variant by planar distance between
sampled points of embedded trees.  Correspondences are witnessed on
finite grids (augmented vertices, or arclength samples) and all checks
run at grid granularity.

``decide_fl`` runs a synchronized-descent search over frontier states;
``brute_force_fl`` independently decides the same question by exhaustive
pair-set search with constraint propagation, and exists to keep the fast
path honest.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .augment import GridTree, augment_heights
from .classic_metrics import CapacityError, sample_polyline
from .model import EmbeddedTree, HEIGHT_TOL, MergeTree, PointRef, TreeError
from .reports import DistanceReport

__all__ = [
    "Correspondence",
    "FLQuery",
    "check_correspondence",
    "decide_fl",
    "fl_distance",
    "brute_force_fl",
]

MAX_DEGREE = 8


@dataclass
class FLQuery:
    """Parameters of one Frechet-like decision or distance query."""

    variant: str = "merge"
    eps: float = 0.0
    resolution: float = 0.25
    align_roots: bool | None = None

    def __post_init__(self):
        if self.variant not in ("merge", "euclidean"):
            raise TreeError(f"unknown variant {self.variant!r}")
        if self.eps < 0:
            raise TreeError("eps must be nonnegative")
        if self.resolution <= 0:
            raise TreeError("resolution must be positive")
        if self.align_roots is None:
            self.align_roots = self.variant == "merge"


@dataclass
class Correspondence:
    """Finite witness of a correspondence: matched grid-point pairs.

    Grid-adjacent matched pairs are read as matched segments (linear
    interpolation); validity is checked at the grid points themselves.
    """

    pairs: list[tuple[PointRef, PointRef]] = field(default_factory=list)

    def to_json(self):
        return [[a.to_json(), b.to_json()] for a, b in self.pairs]

    @staticmethod
    def from_json(obj) -> "Correspondence":
        return Correspondence([(PointRef.from_json(a), PointRef.from_json(b)) for a, b in obj])


# --------------------------------------------------------------------------
# flat grid views with a pair cost
# --------------------------------------------------------------------------


class _FlatTree:
    """Uniform vertex-array view used by both cost variants."""

    def __init__(self, parent, children, payload, origin):
        self.parent = parent
        self.children = children
        self.payload = payload  # height (merge) or position (euclidean)
        self.origin = origin  # PointRef into the source tree per vertex
        self.n = len(parent)
        self.root = next(v for v in range(self.n) if parent[v] is None)
        self.leaves = [v for v in range(self.n) if not children[v]]
        self.depth = [0] * self.n
        order = [self.root]
        for v in order:
            for c in children[v]:
                self.depth[c] = self.depth[v] + 1
                order.append(c)
        self.preorder = order
        self._subtree: dict[int, tuple] = {}
        self._lca: dict[tuple, int] = {}
        self._sig: dict[int, tuple] = {}
        self.branch_anchor = [None] * self.n
        for v in self.preorder:
            p = parent[v]
            if p is None:
                continue
            self.branch_anchor[v] = p if len(children[p]) >= 2 else self.branch_anchor[p]

    def subtree(self, v: int) -> tuple:
        got = self._subtree.get(v)
        if got is None:
            out = [v]
            for x in out:
                out.extend(self.children[x])
            got = self._subtree[v] = tuple(out)
        return got

    def vlca(self, u: int, v: int) -> int:
        if u == v:
            return u
        key = (u, v) if u < v else (v, u)
        got = self._lca.get(key)
        if got is None:
            a, b = u, v
            while a != b:
                if self.depth[a] < self.depth[b]:
                    b = self.parent[b]
                else:
                    a = self.parent[a]
            got = self._lca[key] = a
        return got

    def is_anc(self, a: int, v: int) -> bool:
        return self.vlca(a, v) == a

    def chain_up(self, lo: int, hi: int) -> list[int]:
        """Vertices on the path from lo up to hi inclusive (hi an ancestor)."""
        out = [lo]
        while out[-1] != hi:
            out.append(self.parent[out[-1]])
        return out

    def shape_signature(self, v: int) -> tuple:
        """Canonical ordered-subtree signature used to prune symmetric plans."""
        got = self._sig.get(v)
        if got is None:
            got = self._sig[v] = (
                self.payload[v],
                tuple(self.shape_signature(c) for c in self.children[v]),
            )
        return got


def _flat_from_grid(g: GridTree) -> _FlatTree:
    return _FlatTree(list(g.parent), [list(c) for c in g.children], list(g.h), list(g.origin))


def _flat_from_embedded(t: EmbeddedTree, resolution: float) -> _FlatTree:
    from .model import edge_point, node_point

    parent: list = [None]
    children: list = [[]]
    payload: list = [t.position(t.tree.root)]
    origin: list = [node_point(t.tree.root)]
    vertex_of_node = {t.tree.root: 0}
    for node in t.tree.preorder():
        if node == t.tree.root:
            continue
        poly = t.geometry[node]
        samples = sample_polyline(poly, resolution)
        total = t.edge_length(node)
        prev = vertex_of_node[t.tree.parent(node)]
        acc = 0.0
        for a, b in zip(samples, samples[1:]):
            acc += math.dist(a, b)
            v = len(parent)
            parent.append(prev)
            children.append([])
            children[prev].append(v)
            payload.append(b)
            # t runs 0 at the child end, 1 at the parent end
            frac = 1.0 - min(1.0, acc / total)
            origin.append(node_point(node) if frac <= 1e-12 else edge_point(node, frac))
            prev = v
        vertex_of_node[node] = prev
    return _FlatTree(parent, children, payload, origin)


class _FLContext:
    """Two flat trees plus the pair cost for one query."""

    def __init__(self, f1: _FlatTree, f2: _FlatTree, cost_fn):
        self.f1 = f1
        self.f2 = f2
        self._cost_fn = cost_fn
        self._cost: dict[tuple, float] = {}
        self._maxcost: dict[tuple, float] = {}

    def cost(self, u: int, v: int) -> float:
        key = (u, v)
        got = self._cost.get(key)
        if got is None:
            got = self._cost[key] = self._cost_fn(u, v)
        return got

    def max_cost_subtree1(self, u: int, v: int) -> float:
        """Max pair cost of (subtree of u in T1) x {v}."""
        key = ("s1", u, v)
        got = self._maxcost.get(key)
        if got is None:
            got = max(self.cost(x, v) for x in self.f1.subtree(u))
            self._maxcost[key] = got
        return got

    def max_cost_subtree2(self, u: int, v: int) -> float:
        key = ("s2", u, v)
        got = self._maxcost.get(key)
        if got is None:
            got = max(self.cost(u, y) for y in self.f2.subtree(v))
            self._maxcost[key] = got
        return got


def _build_context(T1, T2, q: FLQuery) -> _FLContext:
    if q.variant == "merge":
        if not (isinstance(T1, MergeTree) and isinstance(T2, MergeTree)):
            raise TreeError("merge variant needs merge trees")
        a, b = T1, T2
        if q.align_roots:
            a = _shift(T1, -T1.height[T1.tree.root])
            b = _shift(T2, -T2.height[T2.tree.root])
        H = augment_heights(a, b, q.eps)
        f1 = _flat_from_grid(GridTree(a, H))
        f2 = _flat_from_grid(GridTree(b, H))
        return _FLContext(f1, f2, lambda u, v: abs(f1.payload[u] - f2.payload[v]))
    if not (isinstance(T1, EmbeddedTree) and isinstance(T2, EmbeddedTree)):
        raise TreeError("euclidean variant needs embedded trees")
    f1 = _flat_from_embedded(T1, q.resolution)
    shift = (0.0, 0.0)
    if q.align_roots:
        r1 = T1.position(T1.tree.root)
        r2 = T2.position(T2.tree.root)
        shift = (r1[0] - r2[0], r1[1] - r2[1])
    f2 = _flat_from_embedded(T2, q.resolution)
    if shift != (0.0, 0.0):
        f2.payload = [(x + shift[0], y + shift[1]) for x, y in f2.payload]
    return _FLContext(f1, f2, lambda u, v: math.dist(f1.payload[u], f2.payload[v]))


def _shift(mt: MergeTree, offset: float) -> MergeTree:
    if offset == 0:
        return mt
    return MergeTree(mt.tree, {v: h + offset for v, h in mt.height.items()}, root_ray=mt.root_ray)


# --------------------------------------------------------------------------
# correspondence checking
# --------------------------------------------------------------------------


def _lca_closure(f: _FlatTree, vertices) -> set[int]:
    """Closure of a vertex set under pairwise lca."""
    out = set(vertices)
    frontier = list(out)
    while True:
        added = False
        items = sorted(out)
        for i, a in enumerate(items):
            for b in items[i + 1 :]:
                w = f.vlca(a, b)
                if w not in out:
                    out.add(w)
                    added = True
        if not added:
            return out


def _locate_vertex(flat: _FlatTree, source_tree, p: PointRef, what: str) -> int:
    """Map a point of the source tree onto its grid vertex, or fail."""
    for v in range(flat.n):
        if source_tree.same_point(flat.origin[v], p) if isinstance(source_tree, MergeTree) else _same_embedded_point(source_tree, flat.origin[v], p):
            return v
    raise TreeError(f"{what} point {p} is not on the required grid")


def _same_embedded_point(t: EmbeddedTree, a: PointRef, b: PointRef) -> bool:
    if a.kind == b.kind == "node":
        return a.node == b.node
    pa = t.point_position(a)
    pb = t.point_position(b)
    return math.dist(pa, pb) <= 1e-9 and (
        a.kind == "node" or b.kind == "node" or a.edge == b.edge
    )


def check_correspondence(T1, T2, R: Correspondence, q: FLQuery) -> tuple[bool, list[str]]:
    """Verify conditions (1)-(4) and the cost bound at grid granularity."""
    ctx = _build_context(T1, T2, q)
    f1, f2 = ctx.f1, ctx.f2
    try:
        pairs = sorted(
            {
                (_locate_vertex(f1, T1, a, "left"), _locate_vertex(f2, T2, b, "right"))
                for a, b in R.pairs
            }
        )
    except TreeError as e:
        return False, [str(e)]
    violations: list[str] = []
    left = {x for x, _ in pairs}
    right = {y for _, y in pairs}

    for x in range(f1.n):
        if x not in left:
            violations.append(f"condition 1: grid point {x} of T1 unmatched")
    for y in range(f2.n):
        if y not in right:
            violations.append(f"condition 1-i: grid point {y} of T2 unmatched")

    pair_set = set(pairs)
    for i, (x1, y1) in enumerate(pairs):
        for (x2, y2) in pairs[i + 1 :]:
            w = (f1.vlca(x1, x2), f2.vlca(y1, y2))
            if w not in pair_set:
                violations.append(f"condition 3: closure pair {w} of ({(x1,y1)},{(x2,y2)}) missing")

    by_left: dict[int, list[int]] = {}
    by_right: dict[int, list[int]] = {}
    for x, y in pairs:
        by_left.setdefault(x, []).append(y)
        by_right.setdefault(y, []).append(x)

    for (x1, y1) in pairs:
        for (x2, y2) in pairs:
            if (x1, y1) == (x2, y2):
                continue
            if not (f1.is_anc(x2, x1) and f2.is_anc(y2, y1)):
                continue
            seg_x = f1.chain_up(x1, x2)
            seg_y = set(f2.chain_up(y1, y2))
            for x in seg_x:
                if not any(y in seg_y for y in by_left.get(x, ())):
                    violations.append(
                        f"condition 2: point {x} between {x1} and {x2} has no match between {y1} and {y2}"
                    )
            for y in f2.chain_up(y1, y2):
                if not any(xx in set(seg_x) for xx in by_right.get(y, ())):
                    violations.append(
                        f"condition 2-i: point {y} between {y1} and {y2} has no match between {x1} and {x2}"
                    )

    leaf_set_2 = set(f2.leaves)
    for x in f1.leaves:
        ok = any(y in leaf_set_2 for y in by_left.get(x, ()))
        if not ok:
            anchor = f1.branch_anchor[x]
            if anchor is not None:
                partners = set(by_left.get(x, ())) & set(by_left.get(anchor, ()))
                ok = bool(partners)
            if not ok:
                violations.append(f"condition 4: leaf {x} of T1 pairs no leaf and has no shared partner")
    leaf_set_1 = set(f1.leaves)
    for y in f2.leaves:
        ok = any(x in leaf_set_1 for x in by_right.get(y, ()))
        if not ok:
            anchor = f2.branch_anchor[y]
            if anchor is not None:
                partners = set(by_right.get(y, ())) & set(by_right.get(anchor, ()))
                ok = bool(partners)
            if not ok:
                violations.append(f"condition 4-i: leaf {y} of T2 pairs no leaf and has no shared partner")

    worst = max((ctx.cost(x, y) for x, y in pairs), default=0.0)
    if worst > q.eps + HEIGHT_TOL:
        violations.append(f"cost: sup pair cost {worst} exceeds eps {q.eps}")

    return (not violations, violations)


# --------------------------------------------------------------------------
# synchronized-descent decision procedure
# --------------------------------------------------------------------------


class _DescentSearch:
    """Feasibility search over frontier states (F, y).

    A state holds the set F of T1 vertices currently matched to the T2
    vertex y.  Plans either descend into y's children (every child covered
    by walkers or collapsed onto a frontier vertex) or keep y and advance
    only the T1 side.  Stalled subtrees pair entirely with one opposite
    point, which is how the definition's "stopped man" shows up on grids.
    """

    def __init__(self, ctx: _FLContext, eps: float):
        self.ctx = ctx
        self.eps = eps + HEIGHT_TOL
        self.f1 = ctx.f1
        self.f2 = ctx.f2
        self.memo: dict = {}
        self.plan: dict = {}
        self._sig1_cache: dict = {}
        # identical sibling subtrees collapse under the symmetry breaks, so
        # the enumeration cap counts distinct branch shapes, not raw degree
        for f in (self.f1, self.f2):
            worst = max(
                len({(f.shape_signature(c)) for c in f.children[v]}) for v in range(f.n)
            )
            if worst > MAX_DEGREE:
                raise CapacityError(
                    f"{worst} distinct branch shapes at one vertex exceed the plan cap {MAX_DEGREE}"
                )

    # ---- stall validity ------------------------------------------------

    def stall1_ok(self, cx: int, y: int, F: frozenset) -> bool:
        """Subtree of cx in T1 collapses onto internal vertex y."""
        if self.ctx.max_cost_subtree1(cx, y) > self.eps:
            return False
        inside = set(self.f1.subtree(cx))
        for z in inside:
            if self.f1.children[z]:
                continue
            anchor = self.f1.branch_anchor[z]
            if anchor is None or (anchor not in inside and anchor not in F):
                return False
        return True

    def stall2_ok(self, cy: int, x: int, y: int) -> bool:
        """Subtree of cy in T2 collapses onto frontier vertex x (at y)."""
        if self.ctx.max_cost_subtree2(x, cy) > self.eps:
            return False
        if not self.f1.children[x]:
            return True  # x is a leaf: leaves of cy pair a leaf directly
        inside = set(self.f2.subtree(cy))
        for m in inside:
            if self.f2.children[m]:
                continue
            anchor = self.f2.branch_anchor[m]
            if anchor is None or (anchor not in inside and anchor != y):
                return False
        return True

    def retire_ok(self, x: int, y: int, F: frozenset) -> bool:
        """A T1 leaf stops at internal y."""
        if self.f1.children[x]:
            return False
        anchor = self.f1.branch_anchor[x]
        return anchor is not None and anchor in F

    # ---- state machinery -------------------------------------------------

    def entry_ok(self, F: frozenset, y: int) -> bool:
        for x in F:
            if self.ctx.cost(x, y) > self.eps:
                return False
        for w in _lca_closure(self.f1, F):
            if self.ctx.cost(w, y) > self.eps:
                return False
        return True

    def canon_key(self, F: frozenset, y: int):
        """States whose frontiers agree as class-count multisets are
        interchangeable: class members share parent and subtree shape, so
        every cost and lca the search consults is identical."""
        tally: dict = {}
        for x in F:
            k = self._sig1(x)
            tally[k] = tally.get(k, 0) + 1
        return (y, tuple(sorted(tally.items())))

    def feasible(self, F: frozenset, y: int) -> bool:
        key = self.canon_key(F, y)
        got = self.memo.get(key)
        if got is not None:
            return got
        self.memo[key] = False  # provisional; states cannot self-recurse
        ok = self._solve(F, y)
        self.memo[key] = ok
        return ok

    def _solve(self, F: frozenset, y: int) -> bool:
        if not self.entry_ok(F, y):
            return False
        CY = self.f2.children[y]
        if not CY:
            # T2 exhausted below y: every frontier subtree collapses here;
            # y is a leaf so condition 4 is met by the leaf-leaf pairs.
            ok = all(self.ctx.max_cost_subtree1(x, y) <= self.eps for x in F)
            if ok:
                self.plan[(F, y)] = ("leaf_collapse",)
            return ok
        plan = self._descend_plan(F, y)
        if plan is not None:
            self.plan[(F, y)] = ("descend", plan[0], plan[1])
            return True
        for newF, collapsed in self._stay_plans(F, y):
            if self.feasible(newF, y):
                self.plan[(F, y)] = ("stay", newF, collapsed, y)
                return True
        return False

    # ---- plan enumeration ------------------------------------------------

    def _front_options(self, x: int, y: int, F: frozenset, CY):
        """Options for one frontier vertex in a descend plan.

        ("expand",)     dispatch the children now (x leaves the frontier;
                        splits below x closure-force pairs only at x's own
                        level, which the state entry already priced);
        ("move", cy)    keep walking into one child, subtree intact;
        ("retire",)     a leaf stops next to its anchored partner.
        """
        if self.f1.children[x]:
            yield ("expand",)
        for cy in CY:
            if self.ctx.cost(x, cy) <= self.eps:
                yield ("move", cy)
        if self.retire_ok(x, y, F):
            yield ("retire",)

    def _sig1(self, v: int):
        # interchangeability needs equal subtrees under the same parent
        got = self._sig1_cache.get(v)
        if got is None:
            got = self._sig1_cache[v] = (self.f1.parent[v], self.f1.shape_signature(v))
        return got

    def _descend_plan(self, F: frozenset, y: int):
        """First feasible descend plan (child states, collapses), or None."""
        CY = sorted(self.f2.children[y], key=lambda cy: (self.f2.shape_signature(cy), cy))
        fronts = sorted(F)
        front_sigs = [self._sig1(x) for x in fronts]
        option_lists = [list(self._front_options(x, y, F, CY)) for x in fronts]
        for combo in _product_dedup(option_lists, front_sigs):
            moved: dict[int, list[int]] = {cy: [] for cy in CY}
            pending: list[int] = []
            for x, choice in zip(fronts, combo):
                if choice[0] == "move":
                    moved[choice[1]].append(x)
                elif choice[0] == "expand":
                    pending.extend(self.f1.children[x])
            plan = self._pack_bins(CY, moved, pending, y, F)
            if plan is not None:
                return plan
        return None

    def _pack_bins(self, CY, moved, pending, y, F):
        """Pack pending items into the target bins, or None when impossible.

        Items of one interchangeability class (same parent and subtree
        shape) are drawn canonically, so a bin's content is just a count
        vector over classes, and each bin's group is feasibility-checked
        the moment it is formed.  Unpackable (bin index, consumed counts)
        suffixes are memoized, keeping the search polynomial in the count
        space rather than exponential in items.  Leftover items stall at y.
        """
        classes: dict = {}
        for cx in pending:
            classes.setdefault(self._sig1(cx), []).append(cx)
        class_keys = sorted(classes)
        members = [sorted(classes[k]) for k in class_keys]
        counts = [len(m) for m in members]
        nclasses = len(class_keys)
        reach = [[self.ctx.cost(m[0], cy) <= self.eps for cy in CY] for m in members]
        stallable = [self.stall1_ok(m[0], y, F) for m in members]
        states: list = []
        collapsed: list = []
        dead: set = set()

        def vectors(bin_idx, taken):
            out = [()]
            for i in range(nclasses):
                top = counts[i] - taken[i] if reach[i][bin_idx] else 0
                out = [vec + (c,) for vec in out for c in range(top + 1)]
            return out

        def rec(bin_idx, taken) -> bool:
            if bin_idx == len(CY):
                if any(counts[i] - taken[i] and not stallable[i] for i in range(nclasses)):
                    return False
                for i in range(nclasses):
                    collapsed.extend(("t1", cx, y) for cx in members[i][taken[i] :])
                return True
            key = (bin_idx, taken)
            if key in dead:
                return False
            cy = CY[bin_idx]
            base = moved[cy]
            for vec in vectors(bin_idx, taken):
                group = list(base)
                for i, c in enumerate(vec):
                    group.extend(members[i][taken[i] : taken[i] + c])
                if not group:
                    anchor = next((x for x in sorted(F) if self.stall2_ok(cy, x, y)), None)
                    if anchor is None:
                        continue
                    collapsed.append(("t2", cy, anchor))
                    if rec(bin_idx + 1, taken):
                        return True
                    collapsed.pop()
                    continue
                if not self.feasible(frozenset(group), cy):
                    continue
                states.append((frozenset(group), cy))
                if rec(bin_idx + 1, tuple(t + c for t, c in zip(taken, vec))):
                    return True
                states.pop()
            dead.add(key)
            return False

        if rec(0, (0,) * nclasses):
            return (states, collapsed)
        return None

    def _stay_plans(self, F: frozenset, y: int):
        """Advance only the T1 side: some fronts expand in place."""
        fronts = sorted(F)
        front_sigs = [self._sig1(x) for x in fronts]
        per_front = []
        for x in fronts:
            opts = [("carry",)]
            if self.retire_ok(x, y, F):
                opts.append(("retire",))
            if self.f1.children[x]:
                opts.append(("expand",))
            per_front.append(opts)
        for combo in _product_dedup(per_front, front_sigs):
            if not any(kind[0] == "expand" for kind in combo):
                continue
            newF = set()
            pending = []
            for x, kind in zip(fronts, combo):
                if kind[0] == "carry":
                    newF.add(x)
                elif kind[0] == "expand":
                    pending.extend(self.f1.children[x])
            pending.sort(key=lambda cx: (self._sig1(cx), cx))
            rows = []
            for cx in pending:
                row = [("stay", None)] if self.ctx.cost(cx, y) <= self.eps else []
                if self.stall1_ok(cx, y, F):
                    row.append(("stall", None))
                if not row:
                    break
                rows.append(row)
            else:
                sig = [self._sig1(cx) for cx in pending]
                for choice in _product_dedup(rows, sig):
                    got = set(newF)
                    coll = []
                    for cx, (kind, _) in zip(pending, choice):
                        if kind == "stay":
                            got.add(cx)
                        else:
                            coll.append(("t1", cx, y))
                    if got:
                        yield (frozenset(got), coll)

    # ---- witness reconstruction -----------------------------------------

    def witness_pairs(self, F: frozenset, y: int) -> set[tuple[int, int]]:
        pairs: set[tuple[int, int]] = set()
        self._collect(F, y, pairs)
        return pairs

    def _collect(self, F: frozenset, y: int, pairs: set):
        for w in _lca_closure(self.f1, F):
            pairs.add((w, y))
        plan = self.plan.get((F, y))
        if plan is None:
            # feasibility was settled through an interchangeable state;
            # re-derive a concrete plan for this frontier
            found = self._solve(F, y)
            assert found, "replaying an infeasible state"
            plan = self.plan[(F, y)]
        if plan[0] == "leaf_collapse":
            for x in F:
                for z in self.f1.subtree(x):
                    pairs.add((z, y))
            return
        if plan[0] == "descend":
            _, states, collapsed = plan
            self._collect_collapsed(collapsed, pairs)
            for Fc, cy in states:
                self._collect(Fc, cy, pairs)
            return
        _, newF, collapsed, _y = plan
        self._collect_collapsed(collapsed, pairs)
        self._collect(newF, y, pairs)

    def _collect_collapsed(self, collapsed, pairs):
        for kind, v, anchor in collapsed:
            if kind == "t1":
                for z in self.f1.subtree(v):
                    pairs.add((z, anchor))
            else:
                for m in self.f2.subtree(v):
                    pairs.add((anchor, m))


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def _product_dedup(lists, signatures):
    """Product over option rows, skipping permutations of identical
    siblings: equal-signature items must pick non-decreasing options."""
    idx_lists = [list(range(len(row))) for row in lists]

    def rec(i, acc):
        if i == len(lists):
            yield tuple(lists[j][acc[j]] for j in range(len(acc)))
            return
        start = 0
        if i > 0 and signatures[i] == signatures[i - 1] and lists[i] == lists[i - 1]:
            start = acc[i - 1]
        for k in idx_lists[i]:
            if k < start:
                continue
            yield from rec(i + 1, acc + [k])

    yield from rec(0, [])


def _closure_pairs(f1: _FlatTree, f2: _FlatTree, pairs: set) -> set:
    """Complete a pair set under condition 3 to a fixpoint."""
    out = set(pairs)
    while True:
        add = set()
        items = sorted(out)
        for i, (x1, y1) in enumerate(items):
            for (x2, y2) in items[i + 1 :]:
                w = (f1.vlca(x1, x2), f2.vlca(y1, y2))
                if w not in out:
                    add.add(w)
        if not add:
            return out
        out |= add


def _complete_witness(ctx: _FLContext, pairs: set, eps: float) -> set:
    """Close a raw plan trace under conditions 2 and 3.

    The descent plans record the pairs they create directly; the closure
    and interval conditions can force further pairs between them.  Each
    interval gap is filled with the cheapest feasible partner, then the
    closure re-runs, until nothing is missing.
    """
    f1, f2 = ctx.f1, ctx.f2
    bound = eps + HEIGHT_TOL
    out = _closure_pairs(f1, f2, pairs)
    while True:
        by_left: dict[int, set] = {}
        by_right: dict[int, set] = {}
        for x, y in out:
            by_left.setdefault(x, set()).add(y)
            by_right.setdefault(y, set()).add(x)
        add = set()
        for (x1, y1) in out:
            for (x2, y2) in out:
                if (x1, y1) == (x2, y2):
                    continue
                if not (f1.is_anc(x2, x1) and f2.is_anc(y2, y1)):
                    continue
                seg_x = f1.chain_up(x1, x2)
                seg_y = f2.chain_up(y1, y2)
                seg_y_set = set(seg_y)
                for x in seg_x:
                    if by_left.get(x, set()) & seg_y_set:
                        continue
                    feas = [y for y in seg_y if ctx.cost(x, y) <= bound]
                    if feas:
                        add.add((x, min(feas, key=lambda y: (ctx.cost(x, y), y))))
                seg_x_set = set(seg_x)
                for y in seg_y:
                    if by_right.get(y, set()) & seg_x_set:
                        continue
                    feas = [x for x in seg_x if ctx.cost(x, y) <= bound]
                    if feas:
                        add.add((min(feas, key=lambda x: (ctx.cost(x, y), x)), y))
        if not add:
            return out
        out = _closure_pairs(f1, f2, out | add)


def decide_fl(T1, T2, q: FLQuery) -> tuple[bool, Correspondence | None]:
    """Decide whether a valid correspondence of cost <= q.eps exists.

    Returns a witness on success; the witness re-validates through
    ``check_correspondence`` at the same query.
    """
    ctx = _build_context(T1, T2, q)
    search = _DescentSearch(ctx, q.eps)
    start = (frozenset([ctx.f1.root]), ctx.f2.root)
    if not search.feasible(*start):
        return False, None
    pairs = _complete_witness(ctx, search.witness_pairs(*start), q.eps)
    witness = Correspondence(
        [(ctx.f1.origin[x], ctx.f2.origin[y]) for x, y in sorted(pairs)]
    )
    return True, witness


# --------------------------------------------------------------------------
# independent oracle: exhaustive pair-set search with propagation
# --------------------------------------------------------------------------


class _PairSolver:
    """Exact demand-driven search over subsets of the allowed pair grid.

    Candidate pairs are those of cost <= eps.  The search grows a chosen
    set: closure consequences of chosen pairs are forced (their lca pairs
    must also be chosen and allowed), and any unmet demand of conditions
    1, 2, or 4 branches over the pairs that could satisfy it.  Every valid
    correspondence contains, for each demand, at least one alternative, so
    following demands is complete; chosen sets only ever grow, so the
    search terminates.  Deliberately structured nothing like the descent
    search in ``decide_fl``.
    """

    def __init__(self, ctx: _FLContext, eps: float):
        self.ctx = ctx
        self.f1 = ctx.f1
        self.f2 = ctx.f2
        self.allowed = {
            (x, y)
            for x in range(self.f1.n)
            for y in range(self.f2.n)
            if ctx.cost(x, y) <= eps + HEIGHT_TOL
        }

    def solve(self) -> set | None:
        seed = (self.f1.root, self.f2.root)
        if seed not in self.allowed:
            return None
        return self._search(frozenset([seed]))

    def _close(self, chosen: frozenset) -> frozenset | None:
        """Force lca-closure; None when a forced pair is not allowed."""
        out = set(chosen)
        frontier = list(out)
        while frontier:
            new = []
            items = sorted(out)
            for p in frontier:
                for q in items:
                    w = (self.f1.vlca(p[0], q[0]), self.f2.vlca(p[1], q[1]))
                    if w not in out:
                        if w not in self.allowed:
                            return None
                        out.add(w)
                        new.append(w)
            frontier = new
        return frozenset(out)

    def _first_demand(self, chosen: frozenset):
        """The first unmet requirement, as a list of alternative pair-sets
        (choosing any one alternative may satisfy it)."""
        by_left: dict[int, set] = {}
        by_right: dict[int, set] = {}
        for x, y in chosen:
            by_left.setdefault(x, set()).add(y)
            by_right.setdefault(y, set()).add(x)
        # totality
        for x in range(self.f1.n):
            if x not in by_left:
                alts = [frozenset([(x, y)]) for y in range(self.f2.n) if (x, y) in self.allowed]
                return alts
        for y in range(self.f2.n):
            if y not in by_right:
                alts = [frozenset([(x, y)]) for x in range(self.f1.n) if (x, y) in self.allowed]
                return alts
        # interval condition between comparable chosen pairs
        for (x1, y1) in chosen:
            for (x2, y2) in chosen:
                if (x1, y1) == (x2, y2):
                    continue
                if not (self.f1.is_anc(x2, x1) and self.f2.is_anc(y2, y1)):
                    continue
                seg_x = self.f1.chain_up(x1, x2)
                seg_y = self.f2.chain_up(y1, y2)
                seg_y_set = set(seg_y)
                for x in seg_x:
                    if not (by_left.get(x, set()) & seg_y_set):
                        return [
                            frozenset([(x, y)]) for y in seg_y if (x, y) in self.allowed
                        ]
                seg_x_set = set(seg_x)
                for y in seg_y:
                    if not (by_right.get(y, set()) & seg_x_set):
                        return [
                            frozenset([(x, y)]) for x in seg_x if (x, y) in self.allowed
                        ]
        # leaf condition, either a leaf-leaf pair or a shared partner with
        # the nearest branching ancestor
        leaves2 = set(self.f2.leaves)
        for x in self.f1.leaves:
            got = by_left.get(x, set())
            if got & leaves2:
                continue
            anchor = self.f1.branch_anchor[x]
            if anchor is not None and (got & by_left.get(anchor, set())):
                continue
            alts = [frozenset([(x, y)]) for y in leaves2 if (x, y) in self.allowed]
            if anchor is not None:
                alts.extend(
                    frozenset([(x, y), (anchor, y)])
                    for y in range(self.f2.n)
                    if (x, y) in self.allowed and (anchor, y) in self.allowed
                )
            return alts
        leaves1 = set(self.f1.leaves)
        for y in self.f2.leaves:
            got = by_right.get(y, set())
            if got & leaves1:
                continue
            anchor = self.f2.branch_anchor[y]
            if anchor is not None and (got & by_right.get(anchor, set())):
                continue
            alts = [frozenset([(x, y)]) for x in leaves1 if (x, y) in self.allowed]
            if anchor is not None:
                alts.extend(
                    frozenset([(x, y), (x, anchor)])
                    for x in range(self.f1.n)
                    if (x, y) in self.allowed and (x, anchor) in self.allowed
                )
            return alts
        return None

    def _search(self, chosen: frozenset, seen: set | None = None) -> set | None:
        if seen is None:
            seen = set()
        closed = self._close(chosen)
        if closed is None or closed in seen:
            return None
        seen.add(closed)
        demand = self._first_demand(closed)
        if demand is None:
            return set(closed)
        for alt in demand:
            got = self._search(closed | alt, seen)
            if got is not None:
                return got
        return None


def _grid_cap() -> int:
    return int(os.environ.get("TREEMETRICS_MAX_GRID", "12"))


def brute_force_fl(T1, T2, q: FLQuery, max_grid: int | None = None) -> float:
    """Exact minimum sup-cost over all valid grid correspondences.

    Exhaustive subset search with propagation; refuses grids above the cap
    (default 12 points per tree, TREEMETRICS_MAX_GRID overrides).
    """
    cap = max_grid if max_grid is not None else _grid_cap()
    candidates = _candidate_eps(T1, T2, q)
    lo_ctx = _build_context(T1, T2, _with_eps(q, candidates[-1]))
    if lo_ctx.f1.n > cap or lo_ctx.f2.n > cap:
        raise CapacityError(
            f"augmented grids {lo_ctx.f1.n}x{lo_ctx.f2.n} exceed the brute-force cap {cap}"
        )
    for eps in candidates:
        ctx = _build_context(T1, T2, _with_eps(q, eps))
        if ctx.f1.n > cap or ctx.f2.n > cap:
            raise CapacityError("augmented grid exceeds the brute-force cap")
        if _PairSolver(ctx, eps).solve() is not None:
            return eps
    raise TreeError("no candidate eps admitted a correspondence")


def _with_eps(q: FLQuery, eps: float) -> FLQuery:
    return FLQuery(variant=q.variant, eps=eps, resolution=q.resolution, align_roots=q.align_roots)


def _candidate_eps(T1, T2, q: FLQuery) -> list[float]:
    if q.variant == "merge":
        a = T1 if not q.align_roots else _shift(T1, -T1.height[T1.tree.root])
        b = T2 if not q.align_roots else _shift(T2, -T2.height[T2.tree.root])
        h1 = sorted(set(a.node_heights()) | set(b.node_heights()))
        vals = {0.0}
        for i, x in enumerate(h1):
            for z in h1[i:]:
                vals.add(abs(z - x))
    else:
        ctx = _build_context(T1, T2, q)
        vals = {0.0}
        for u in range(ctx.f1.n):
            for v in range(ctx.f2.n):
                vals.add(ctx.cost(u, v))
    out = []
    for v in sorted(vals):
        if not out or v - out[-1] > HEIGHT_TOL:
            out.append(v)
    return out


def fl_distance(
    T1,
    T2,
    variant: str = "merge",
    resolution: float = 0.25,
    align_roots: bool | None = None,
) -> DistanceReport:
    """Minimal eps in the candidate set admitting a valid correspondence.

    Candidates are all pairwise height differences (merge variant) or all
    pairwise sample distances (euclidean).  The decision is monotone in
    eps, so the scan bisects; the witness correspondence is included.
    """
    q = FLQuery(variant=variant, eps=0.0, resolution=resolution, align_roots=align_roots)
    candidates = _candidate_eps(T1, T2, q)
    lo, hi = 0, len(candidates) - 1
    best = None
    ok_hi, witness_hi = decide_fl(T1, T2, _with_eps(q, candidates[hi]))
    if not ok_hi:
        raise TreeError("correspondence infeasible even at the largest candidate eps")
    best = (candidates[hi], witness_hi)
    while lo < hi:
        mid = (lo + hi) // 2
        ok, witness = decide_fl(T1, T2, _with_eps(q, candidates[mid]))
        if ok:
            best = (candidates[mid], witness)
            hi = mid
        else:
            lo = mid + 1
    value, witness = best
    return DistanceReport(
        metric=f"fl-{variant}",
        value=value,
        witness=witness.to_json() if witness else None,
        params={"variant": variant, "resolution": resolution, "align_roots": q.align_roots},
    )
