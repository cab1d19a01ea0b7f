"""Core tree data model: rooted trees, merge trees, embedded trees, points.

Conventions used throughout the package:

* Node ids are dense integers assigned at construction time.
* Every non-root node identifies one edge: the edge to its parent.  Points
  interior to an edge are addressed as ``PointRef(edge=child_id, t=...)``
  with ``t = 0`` at the child endpoint and ``t = 1`` at the parent endpoint.
* Merge-tree heights strictly increase toward the root; edge-interior
  heights are linear interpolations between the endpoints.
* The root of a merge tree may carry an unbounded upward ray.  Ray points
  are addressed by absolute height and are ancestors of every tree point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "TreeError",
    "Node",
    "RootedTree",
    "MergeTree",
    "EmbeddedTree",
    "PointRef",
    "node_point",
    "edge_point",
    "ray_point",
    "lca",
    "ancestor_at_offset",
]

HEIGHT_TOL = 1e-9


class TreeError(ValueError):
    """Raised for malformed trees, invalid points, or violated invariants."""


@dataclass
class Node:
    id: int
    parent: int | None
    children: list[int] = field(default_factory=list)
    label: str | None = None


class RootedTree:
    """An ordered rooted tree over dense integer node ids.

    Construction validates the structural invariants: exactly one root,
    mutually consistent parent/child links, no duplicate children, no
    cycles, and every node reachable from the root.
    """

    def __init__(self, nodes: list[Node]):
        self.nodes: dict[int, Node] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise TreeError(f"duplicate node id {n.id}")
            self.nodes[n.id] = n
        roots = [n.id for n in nodes if n.parent is None]
        if len(roots) != 1:
            raise TreeError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        for n in nodes:
            if len(set(n.children)) != len(n.children):
                raise TreeError(f"node {n.id} lists a duplicate child")
            for c in n.children:
                if c not in self.nodes:
                    raise TreeError(f"node {n.id} lists unknown child {c}")
                if self.nodes[c].parent != n.id:
                    raise TreeError(f"parent/child link mismatch at {n.id}->{c}")
            if n.parent is not None:
                if n.parent not in self.nodes:
                    raise TreeError(f"node {n.id} has unknown parent {n.parent}")
                if n.id not in self.nodes[n.parent].children:
                    raise TreeError(f"node {n.id} missing from parent's child list")
        # Reachability doubles as the cycle check: a parent map with one root
        # and all nodes reachable from it cannot contain a cycle.
        seen = set()
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v in seen:
                raise TreeError("cycle detected")
            seen.add(v)
            stack.extend(self.nodes[v].children)
        if len(seen) != len(self.nodes):
            raise TreeError("disconnected nodes present")
        self._depth: dict[int, int] = {}
        self._order: list[int] = []
        self._compute_orders()

    def _compute_orders(self):
        self._depth[self.root] = 0
        stack = [self.root]
        while stack:
            v = stack.pop()
            self._order.append(v)
            for c in self.nodes[v].children:
                self._depth[c] = self._depth[v] + 1
                stack.append(c)

    def parent(self, v: int) -> int | None:
        return self.nodes[v].parent

    def children(self, v: int) -> list[int]:
        return self.nodes[v].children

    def leaves(self) -> list[int]:
        return [v for v in sorted(self.nodes) if not self.nodes[v].children]

    def is_leaf(self, v: int) -> bool:
        return not self.nodes[v].children

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def preorder(self) -> list[int]:
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.nodes[v].children))
        return out

    def postorder(self) -> list[int]:
        out = []

        def walk(v):
            for c in self.nodes[v].children:
                walk(c)
            out.append(v)

        walk(self.root)
        return out

    def ancestors(self, v: int) -> list[int]:
        """Path from v up to and including the root."""
        out = [v]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return out

    def node_lca(self, u: int, v: int) -> int:
        au = set(self.ancestors(u))
        x = v
        while x not in au:
            x = self.nodes[x].parent
        return x

    def is_ancestor(self, a: int, v: int) -> bool:
        """True if node a is an ancestor of v (or equal)."""
        x = v
        while x is not None:
            if x == a:
                return True
            x = self.nodes[x].parent
        return False

    def subtree(self, v: int) -> list[int]:
        out = []
        stack = [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.nodes[x].children)
        return out

    def branching_ancestor(self, v: int) -> int | None:
        """Nearest strict ancestor with two or more children, if any."""
        x = self.nodes[v].parent
        while x is not None:
            if len(self.nodes[x].children) >= 2:
                return x
            x = self.nodes[x].parent
        return None


@dataclass(frozen=True)
class PointRef:
    """Address of a point of a tree.

    kind = "node": the node ``node``.
    kind = "edge": point on the edge above node ``edge`` at parameter
                   ``t`` in [0, 1] (0 = child endpoint, 1 = parent endpoint).
    kind = "ray":  point on the root ray at absolute height ``height``.
    """

    kind: str
    node: int | None = None
    edge: int | None = None
    t: float | None = None
    height: float | None = None

    def __post_init__(self):
        if self.kind not in ("node", "edge", "ray"):
            raise TreeError(f"bad point kind {self.kind!r}")
        if self.kind == "edge" and not (0.0 <= self.t <= 1.0):
            raise TreeError(f"edge parameter t={self.t} outside [0,1]")

    def to_json(self):
        if self.kind == "node":
            return {"node": self.node}
        if self.kind == "edge":
            return {"edge": self.edge, "t": self.t}
        return {"ray": self.height}

    @staticmethod
    def from_json(obj) -> "PointRef":
        if "node" in obj:
            return node_point(obj["node"])
        if "edge" in obj:
            return edge_point(obj["edge"], obj["t"])
        if "ray" in obj:
            return ray_point(obj["ray"])
        raise TreeError(f"unrecognized point reference {obj!r}")


def node_point(v: int) -> PointRef:
    return PointRef(kind="node", node=v)


def edge_point(child: int, t: float) -> PointRef:
    return PointRef(kind="edge", edge=child, t=t)


def ray_point(height: float) -> PointRef:
    return PointRef(kind="ray", height=height)


class MergeTree:
    """A rooted tree with a strictly monotone height function.

    ``height[v]`` is the (unitless) height of node v; for every child c of
    a node p, ``height[c] < height[p]``.  When ``root_ray`` is true the
    root edge extends upward without bound; the ray is represented lazily
    and points on it are addressed by absolute height.
    """

    def __init__(self, tree: RootedTree, height: dict[int, float], root_ray: bool = True):
        self.tree = tree
        self.height = dict(height)
        self.root_ray = root_ray
        for v in tree.node_ids():
            if v not in self.height:
                raise TreeError(f"node {v} has no height")
            h = self.height[v]
            if not (isinstance(h, (int, float)) and math.isfinite(h)):
                raise TreeError(f"node {v} has non-finite height {h!r}")
        for v in tree.node_ids():
            p = tree.parent(v)
            if p is not None and not self.height[v] < self.height[p]:
                raise TreeError(
                    f"monotonicity violated on edge {p}->{v}: "
                    f"child height {self.height[v]} >= parent height {self.height[p]}"
                )

    # ---- point-level height arithmetic -------------------------------

    def point_height(self, p: PointRef) -> float:
        if p.kind == "node":
            return self.height[p.node]
        if p.kind == "ray":
            return p.height
        lo = self.height[p.edge]
        hi = self.height[self.tree.parent(p.edge)]
        return lo + p.t * (hi - lo)

    def normalize(self, p: PointRef) -> PointRef:
        """Canonical form: edge endpoints become node points."""
        if p.kind == "edge":
            if p.t <= 0.0:
                return node_point(p.edge)
            if p.t >= 1.0:
                return node_point(self.tree.parent(p.edge))
        if p.kind == "ray" and abs(p.height - self.height[self.tree.root]) <= HEIGHT_TOL:
            return node_point(self.tree.root)
        return p

    def validate_point(self, p: PointRef):
        if p.kind == "node":
            if p.node not in self.tree.nodes:
                raise TreeError(f"unknown node {p.node}")
        elif p.kind == "edge":
            if p.edge not in self.tree.nodes or self.tree.parent(p.edge) is None:
                raise TreeError(f"unknown edge {p.edge}")
        else:
            if not self.root_ray:
                raise TreeError("ray point on a tree without a root ray")
            if p.height < self.height[self.tree.root] - HEIGHT_TOL:
                raise TreeError("ray point below the root")

    def point_on_edge_at_height(self, child: int, h: float) -> PointRef:
        """Point at absolute height h on the edge above ``child``."""
        lo = self.height[child]
        hi = self.height[self.tree.parent(child)]
        if not (lo - HEIGHT_TOL <= h <= hi + HEIGHT_TOL):
            raise TreeError(f"height {h} not on edge above {child}")
        t = 0.0 if hi == lo else (h - lo) / (hi - lo)
        return self.normalize(edge_point(child, min(1.0, max(0.0, t))))

    def base_node(self, p: PointRef) -> int:
        """Highest node at or below p (root for ray points)."""
        q = self.normalize(p)
        if q.kind == "node":
            return q.node
        if q.kind == "ray":
            return self.tree.root
        return q.edge

    def points_at_height(self, h: float) -> list[PointRef]:
        """All points of the tree (and ray) at absolute height h."""
        out = []
        rh = self.height[self.tree.root]
        if h > rh + HEIGHT_TOL:
            if self.root_ray:
                out.append(ray_point(h))
            return out
        for v in self.tree.node_ids():
            if abs(self.height[v] - h) <= HEIGHT_TOL:
                out.append(node_point(v))
            else:
                p = self.tree.parent(v)
                if p is not None and self.height[v] + HEIGHT_TOL < h < self.height[p] - HEIGHT_TOL:
                    out.append(self.point_on_edge_at_height(v, h))
        return out

    def leaves(self) -> list[int]:
        return self.tree.leaves()

    def node_heights(self) -> list[float]:
        return [self.height[v] for v in self.tree.node_ids()]

    def is_point_ancestor(self, a: PointRef, p: PointRef) -> bool:
        """True if point a is an ancestor of point p (or the same point)."""
        a = self.normalize(a)
        p = self.normalize(p)
        ha, hp = self.point_height(a), self.point_height(p)
        if ha < hp - HEIGHT_TOL:
            return False
        if a.kind == "ray":
            return True
        if p.kind == "ray":
            # a is at or above p's height yet is a tree point: only possible
            # when both sit at the root height.
            return abs(ha - hp) <= HEIGHT_TOL and a.kind == "node" and a.node == self.tree.root
        base_a = self.base_node(a)
        base_p = self.base_node(p)
        if a.kind == "edge":
            # a interior to an edge: p must sit on the same edge below it,
            # or inside the subtree hanging from the edge's child endpoint.
            if base_p == base_a and p.kind == "edge":
                return p.t <= a.t + HEIGHT_TOL
            if p.kind == "node" and p.node == base_a:
                return True
            return self.tree.is_ancestor(base_a, base_p) and base_a != base_p
        if p.kind == "edge":
            # a node is above an edge-interior point iff it is at or above
            # the edge's upper endpoint.
            return self.tree.is_ancestor(base_a, self.tree.parent(base_p))
        return self.tree.is_ancestor(base_a, base_p)

    def point_lca(self, x: PointRef, y: PointRef) -> PointRef:
        """Lowest common ancestor of two points (the paper's x1 ~ x2)."""
        x = self.normalize(x)
        y = self.normalize(y)
        if self.is_point_ancestor(x, y):
            return x
        if self.is_point_ancestor(y, x):
            return y
        if x.kind == "ray" or y.kind == "ray":
            # Rays are totally ordered above the root, so one of the two
            # ancestor checks above must have fired.
            return ray_point(max(self.point_height(x), self.point_height(y)))
        w = self.tree.node_lca(self.base_node(x), self.base_node(y))
        return node_point(w)

    def ancestor_at_height(self, p: PointRef, h: float) -> PointRef:
        """The unique ancestor point of p at absolute height h."""
        hp = self.point_height(p)
        if h < hp - HEIGHT_TOL:
            raise TreeError(f"target height {h} below point height {hp}")
        rh = self.height[self.tree.root]
        if h > rh + HEIGHT_TOL:
            if not self.root_ray:
                raise TreeError("offset rises above a root with no root ray")
            return ray_point(h)
        p = self.normalize(p)
        if p.kind == "ray":
            return ray_point(h)
        if p.kind == "edge" and h <= self.point_height(node_point(self.tree.parent(p.edge))) + HEIGHT_TOL:
            return self.point_on_edge_at_height(p.edge, h)
        v = self.base_node(p)
        while True:
            par = self.tree.parent(v)
            if abs(self.height[v] - h) <= HEIGHT_TOL:
                return node_point(v)
            if par is None:
                return node_point(v)
            if self.height[v] < h < self.height[par]:
                return self.point_on_edge_at_height(v, h)
            if abs(self.height[par] - h) <= HEIGHT_TOL:
                return node_point(par)
            v = par

    def same_point(self, a: PointRef, b: PointRef) -> bool:
        a = self.normalize(a)
        b = self.normalize(b)
        if a.kind != b.kind:
            return False
        if a.kind == "node":
            return a.node == b.node
        if a.kind == "ray":
            return abs(a.height - b.height) <= HEIGHT_TOL
        return a.edge == b.edge and abs(self.point_height(a) - self.point_height(b)) <= HEIGHT_TOL


class EmbeddedTree:
    """A rooted tree whose edges are polylines in the plane.

    ``geometry[child]`` is the polyline of the edge from the parent of
    ``child`` down to ``child`` (first vertex at the parent's position,
    last at the child's).  The root carries a single-point polyline fixing
    its position.  Polylines of consecutive edges share endpoint
    coordinates and every edge polyline has positive total length.
    """

    def __init__(self, tree: RootedTree, geometry: dict[int, list[tuple[float, float]]]):
        self.tree = tree
        self.geometry = {v: [(float(x), float(y)) for x, y in pts] for v, pts in geometry.items()}
        for v in tree.node_ids():
            if v not in self.geometry:
                raise TreeError(f"node {v} has no geometry")
        root_poly = self.geometry[tree.root]
        if len(root_poly) < 1:
            raise TreeError("root needs a position")
        for v in tree.node_ids():
            if v == tree.root:
                continue
            poly = self.geometry[v]
            if len(poly) < 2:
                raise TreeError(f"edge above {v} needs at least 2 polyline points")
            if self._polyline_length(poly) <= 0.0:
                raise TreeError(f"edge above {v} has zero length")
            pstart = self.position(tree.parent(v))
            if math.dist(poly[0], pstart) > 1e-9:
                raise TreeError(f"edge above {v} does not start at its parent's position")

    @staticmethod
    def _polyline_length(poly) -> float:
        return sum(math.dist(a, b) for a, b in zip(poly, poly[1:]))

    def position(self, v: int) -> tuple[float, float]:
        if v == self.tree.root:
            return self.geometry[v][0]
        return self.geometry[v][-1]

    def edge_length(self, child: int) -> float:
        return self._polyline_length(self.geometry[child])

    def point_position(self, p: PointRef) -> tuple[float, float]:
        """Position of an edge/node point; t measures arclength from the child."""
        if p.kind == "node":
            return self.position(p.node)
        if p.kind != "edge":
            raise TreeError("embedded trees have no root ray geometry")
        poly = self.geometry[p.edge]
        total = self._polyline_length(poly)
        # t=0 at the child (end of polyline), t=1 at the parent (start).
        target = (1.0 - p.t) * total
        acc = 0.0
        for a, b in zip(poly, poly[1:]):
            seg = math.dist(a, b)
            if acc + seg >= target - 1e-12:
                r = 0.0 if seg == 0 else (target - acc) / seg
                return (a[0] + r * (b[0] - a[0]), a[1] + r * (b[1] - a[1]))
            acc += seg
        return poly[-1]


# ---- free-function operations over points ----------------------------


def lca(mt: MergeTree, x: PointRef, y: PointRef) -> PointRef:
    """Lowest common ancestor of two points of a merge tree.

    lca(x, x) = x; for incomparable points this is the nearest node above
    both.  Raises TreeError on invalid point references.
    """
    mt.validate_point(x)
    mt.validate_point(y)
    return mt.point_lca(x, y)


def ancestor_at_offset(mt: MergeTree, x: PointRef, delta: float) -> PointRef:
    """The ancestor of x exactly ``delta`` higher in the height function.

    With delta = 0 this is x itself.  If the target height exceeds the
    root, the result lies on the root ray (requires ``root_ray``).
    """
    if delta < 0:
        raise TreeError(f"offset must be nonnegative, got {delta}")
    mt.validate_point(x)
    return mt.ancestor_at_height(x, mt.point_height(x) + delta)
