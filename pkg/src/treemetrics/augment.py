"""Tree augmentation: subdividing merge trees at shared critical heights.

``augment(T1, T2, eps)`` subdivides both trees so that every height in

    H = {node heights of both trees} ∪ {those heights + eps, those - eps}

that crosses an edge becomes a degree-2 vertex.  The resulting vertex set
is the *grid* on which map assignments and correspondences are witnessed.

``GridTree`` is the internal working form: flat arrays over grid vertices
plus locators back into the original tree.  Grid *points* are pairs
``(anchor_vertex, height)`` where the anchor is the highest grid vertex at
or below the point; the root anchors ray points.
"""

from __future__ import annotations

import bisect

from .model import (
    HEIGHT_TOL,
    MergeTree,
    Node,
    PointRef,
    RootedTree,
    TreeError,
    node_point,
)

__all__ = ["augment", "augment_heights", "subdivide_at_heights", "GridTree"]


def _dedup_sorted(values, tol=HEIGHT_TOL):
    out = []
    for v in sorted(values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def augment_heights(T1: MergeTree, T2: MergeTree, eps: float) -> list[float]:
    """The shared critical-height set H for a pair of trees at scale eps."""
    base = set(T1.node_heights()) | set(T2.node_heights())
    full = set(base)
    if eps > 0:
        for h in base:
            full.add(h + eps)
            full.add(h - eps)
    return _dedup_sorted(full)


def crossing_heights(lo: float, hi: float, heights: list[float]) -> list[float]:
    """Heights strictly inside (lo, hi), the subdivision points of one edge."""
    i = bisect.bisect_right(heights, lo + HEIGHT_TOL)
    out = []
    while i < len(heights) and heights[i] < hi - HEIGHT_TOL:
        out.append(heights[i])
        i += 1
    return out


def subdivide_at_heights(mt: MergeTree, heights: list[float]) -> MergeTree:
    """Insert a degree-2 vertex wherever a height in ``heights`` crosses an edge."""
    return GridTree(mt, heights).to_merge_tree()


def augment(T1: MergeTree, T2: MergeTree, eps: float) -> tuple[MergeTree, MergeTree]:
    """Subdivide both trees at the shared height set H (see module docs)."""
    if eps < 0:
        raise TreeError(f"eps must be nonnegative, got {eps}")
    H = augment_heights(T1, T2, eps)
    return subdivide_at_heights(T1, H), subdivide_at_heights(T2, H)


class GridTree:
    """Flat-array view of a merge tree subdivided at a height set.

    Vertices 0..n-1 cover the original nodes plus one vertex per crossing
    height per edge.  ``origin[v]`` addresses vertex v as a point of the
    source tree, so grid data can always be mapped back.
    """

    def __init__(self, mt: MergeTree, heights: list[float]):
        heights = _dedup_sorted(heights)
        self.source = mt
        self.h: list[float] = []
        self.parent: list[int | None] = []
        self.children: list[list[int]] = []
        self.origin: list[PointRef] = []
        self.vertex_of_node: dict[int, int] = {}
        self.edge_chain: dict[int, list[int]] = {}

        def new_vertex(h, origin, parent):
            v = len(self.h)
            self.h.append(h)
            self.parent.append(parent)
            self.children.append([])
            self.origin.append(origin)
            if parent is not None:
                self.children[parent].append(v)
            return v

        order = mt.tree.preorder()
        for node in order:
            p = mt.tree.parent(node)
            if p is None:
                self.vertex_of_node[node] = new_vertex(mt.height[node], node_point(node), None)
                continue
            chain_vertices = []
            top = self.vertex_of_node[p]
            cross = crossing_heights(mt.height[node], mt.height[p], heights)
            prev = top
            for ch in reversed(cross):
                prev = new_vertex(ch, mt.point_on_edge_at_height(node, ch), prev)
                chain_vertices.append(prev)
            v = new_vertex(mt.height[node], node_point(node), prev)
            self.vertex_of_node[node] = v
            # bottom-to-top chain of vertices strictly inside the edge
            self.edge_chain[node] = list(reversed(chain_vertices))

        self.n = len(self.h)
        self.root = self.vertex_of_node[mt.tree.root]
        self.leaf_vertices = [self.vertex_of_node[v] for v in mt.tree.leaves()]
        self.depth = [0] * self.n
        for v in range(self.n):
            if self.parent[v] is not None:
                self.depth[v] = self.depth[self.parent[v]] + 1
        self._lca_cache: dict[tuple[int, int], int] = {}

    # ---- structure ----------------------------------------------------

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    def vertex_lca(self, u: int, v: int) -> int:
        if u == v:
            return u
        key = (u, v) if u < v else (v, u)
        got = self._lca_cache.get(key)
        if got is not None:
            return got
        a, b = u, v
        while a != b:
            if self.depth[a] < self.depth[b]:
                b = self.parent[b]
            else:
                a = self.parent[a]
        self._lca_cache[key] = a
        return a

    def is_vertex_ancestor(self, a: int, v: int) -> bool:
        return self.vertex_lca(a, v) == a

    def subtree_vertices(self, v: int) -> list[int]:
        out = []
        stack = [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children[x])
        return out

    def chain_to_root(self, v: int) -> list[int]:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    def leaves_under(self, v: int) -> list[int]:
        return [x for x in self.subtree_vertices(v) if self.is_leaf(x)]

    # ---- grid points: (anchor_vertex, height) --------------------------

    def point_of_vertex(self, v: int):
        return (v, self.h[v])

    def valid_point(self, p) -> bool:
        v, h = p
        if abs(h - self.h[v]) <= HEIGHT_TOL:
            return True
        par = self.parent[v]
        if par is None:
            return self.source.root_ray and h > self.h[v]
        return self.h[v] < h < self.h[par] + HEIGHT_TOL

    def anc_point(self, p, target_h: float):
        """Ancestor point at the given absolute height (may be on the ray)."""
        v, h = p
        if target_h < h - HEIGHT_TOL:
            raise TreeError("ancestor target below the point")
        while self.parent[v] is not None and self.h[self.parent[v]] <= target_h + HEIGHT_TOL:
            v = self.parent[v]
        if self.parent[v] is None and target_h > self.h[v] + HEIGHT_TOL and not self.source.root_ray:
            raise TreeError("ancestor rises above a root with no ray")
        if abs(self.h[v] - target_h) <= HEIGHT_TOL:
            return (v, self.h[v])
        return (v, target_h)

    def canon_point(self, p):
        """Snap the anchor upward when the height sits on a higher vertex."""
        v, h = p
        return self.anc_point((v, self.h[v]), h)

    def lca_point(self, p, q):
        p = self.canon_point(p)
        q = self.canon_point(q)
        v1, h1 = p
        v2, h2 = q
        if v1 == v2:
            return (v1, max(h1, h2))
        w = self.vertex_lca(v1, v2)
        # A point anchored at a strict vertex-ancestor is automatically the
        # higher of the two (monotone heights), hence the lca.
        if w == v1:
            return p
        if w == v2:
            return q
        return (w, self.h[w])

    def point_is_ancestor(self, p, q) -> bool:
        """True if point p is an ancestor of point q (or equal)."""
        p = self.canon_point(p)
        q = self.canon_point(q)
        if p[1] < q[1] - HEIGHT_TOL:
            return False
        if p[0] == q[0]:
            return True
        return self.is_vertex_ancestor(p[0], q[0])

    def same_grid_point(self, p, q) -> bool:
        p = self.canon_point(p)
        q = self.canon_point(q)
        return p[0] == q[0] and abs(p[1] - q[1]) <= HEIGHT_TOL

    def points_at_height(self, h: float) -> list:
        """All points of the grid tree (plus the ray) at absolute height h."""
        out = []
        if h > self.h[self.root] + HEIGHT_TOL:
            if self.source.root_ray:
                out.append((self.root, h))
            return out
        for v in range(self.n):
            if abs(self.h[v] - h) <= HEIGHT_TOL:
                out.append((v, self.h[v]))
            else:
                par = self.parent[v]
                if par is not None and self.h[v] + HEIGHT_TOL < h < self.h[par] - HEIGHT_TOL:
                    out.append((v, h))
        return out

    # ---- conversions ---------------------------------------------------

    def to_point_ref(self, p) -> PointRef:
        v, h = p
        base = self.origin[v]
        return self.source.ancestor_at_height(base, h)

    def locate(self, p: PointRef):
        """GridPoint for a point of the source tree."""
        p = self.source.normalize(p)
        if p.kind == "node":
            return self.point_of_vertex(self.vertex_of_node[p.node])
        if p.kind == "ray":
            return (self.root, p.height)
        h = self.source.point_height(p)
        chain = [self.vertex_of_node[p.edge]] + self.edge_chain.get(p.edge, [])
        anchor = chain[0]
        for v in chain:
            if self.h[v] <= h + HEIGHT_TOL:
                anchor = v
        if abs(self.h[anchor] - h) <= HEIGHT_TOL:
            return (anchor, self.h[anchor])
        return (anchor, h)

    def to_merge_tree(self) -> MergeTree:
        nodes = []
        for v in range(self.n):
            label = None
            o = self.origin[v]
            if o.kind == "node":
                label = self.source.tree.nodes[o.node].label
            nodes.append(Node(id=v, parent=self.parent[v], children=list(self.children[v]), label=label))
        return MergeTree(RootedTree(nodes), {v: self.h[v] for v in range(self.n)}, root_ray=self.source.root_ray)
