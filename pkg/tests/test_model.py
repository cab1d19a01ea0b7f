"""Tree core: structure invariants, point arithmetic, lca, ancestor walks."""

import math
import random

import pytest

from treemetrics import (
    MergeTree,
    Node,
    RootedTree,
    TreeError,
    ancestor_at_offset,
    edge_point,
    lca,
    node_point,
    parse_tree,
)


def path_tree(heights):
    """Chain tree: node 0 is the root, each next node hangs below."""
    nodes = [Node(id=0, parent=None)]
    for i in range(1, len(heights)):
        nodes.append(Node(id=i, parent=i - 1))
        nodes[i - 1].children.append(i)
    return MergeTree(RootedTree(nodes), {i: h for i, h in enumerate(heights)})


def two_leaf_tree(root_h=0.0, split_h=-1.0, leaf_a=-3.0, leaf_b=-2.0):
    nodes = [
        Node(id=0, parent=None, children=[1]),
        Node(id=1, parent=0, children=[2, 3]),
        Node(id=2, parent=1),
        Node(id=3, parent=1),
    ]
    return MergeTree(RootedTree(nodes), {0: root_h, 1: split_h, 2: leaf_a, 3: leaf_b})


class TestRootedTreeInvariants:
    def test_two_roots_rejected(self):
        with pytest.raises(TreeError):
            RootedTree([Node(id=0, parent=None), Node(id=1, parent=None)])

    def test_cycle_rejected(self):
        with pytest.raises(TreeError):
            RootedTree(
                [
                    Node(id=0, parent=None, children=[1]),
                    Node(id=1, parent=2, children=[2]),
                    Node(id=2, parent=1, children=[1]),
                ]
            )

    def test_duplicate_child_rejected(self):
        with pytest.raises(TreeError):
            RootedTree([Node(id=0, parent=None, children=[1, 1]), Node(id=1, parent=0)])

    def test_inconsistent_links_rejected(self):
        with pytest.raises(TreeError):
            RootedTree([Node(id=0, parent=None, children=[1]), Node(id=1, parent=None)])


class TestMergeTreeInvariants:
    def test_monotonicity_enforced(self):
        nodes = [Node(id=0, parent=None, children=[1]), Node(id=1, parent=0)]
        with pytest.raises(TreeError, match="monotonicity"):
            MergeTree(RootedTree(nodes), {0: 0.0, 1: 5.0})

    def test_single_node(self):
        mt = parse_tree('{"nodes": [{"id": 0, "parent": null, "height": 0.0, "label": "a"}]}')
        assert isinstance(mt, MergeTree)
        assert mt.tree.node_ids() == [0]
        assert mt.height[0] == 0.0

    def test_edge_interior_heights_interpolate(self):
        mt = path_tree([0.0, -10.0])
        p = edge_point(1, 0.25)
        assert mt.point_height(p) == pytest.approx(-7.5)


class TestLca:
    def test_lca_same_leaf(self):
        mt = two_leaf_tree()
        p = node_point(2)
        assert mt.same_point(lca(mt, p, p), p)

    def test_lca_two_children_of_root(self):
        mt = two_leaf_tree()
        got = lca(mt, node_point(2), node_point(3))
        assert mt.same_point(got, node_point(1))

    def test_lca_comparable_points(self):
        mt = path_tree([0.0, -4.0, -8.0])
        a = edge_point(1, 0.5)  # height -2
        b = node_point(2)
        assert mt.same_point(lca(mt, a, b), a)

    def test_lca_matches_path_intersection_oracle(self):
        # Naive oracle: intersect full ancestor vertex paths, then refine
        # using point-ancestor checks on the two candidates' edges.
        rng = random.Random(7)
        from treemetrics.random_trees import random_merge_tree

        for trial in range(100):
            mt = random_merge_tree(rng, leaves=rng.randint(1, 5))
            ids = mt.tree.node_ids()
            x = node_point(rng.choice(ids))
            y = node_point(rng.choice(ids))
            got = lca(mt, x, y)
            w = oracle_node_lca(mt, x.node, y.node)
            assert mt.same_point(got, node_point(w))

    def test_lca_edge_points_distinct_branches(self):
        mt = two_leaf_tree()
        a = edge_point(2, 0.5)
        b = edge_point(3, 0.5)
        assert mt.same_point(lca(mt, a, b), node_point(1))


def oracle_node_lca(mt, u, v):
    au = mt.tree.ancestors(u)
    av = set(mt.tree.ancestors(v))
    for x in au:
        if x in av:
            return x
    raise AssertionError("no common ancestor")


class TestAncestorAtOffset:
    def test_zero_offset_is_identity(self):
        mt = two_leaf_tree()
        p = edge_point(2, 0.5)
        assert mt.same_point(ancestor_at_offset(mt, p, 0.0), p)

    def test_leaf_to_root_exact(self):
        mt = path_tree([0.0, -3.0])
        got = ancestor_at_offset(mt, node_point(1), 3.0)
        assert mt.same_point(got, node_point(0))

    def test_above_root_goes_to_ray(self):
        mt = path_tree([0.0, -3.0])
        got = ancestor_at_offset(mt, node_point(1), 5.0)
        assert got.kind == "ray"
        assert got.height == pytest.approx(2.0)

    def test_above_root_without_ray_errors(self):
        nodes = [Node(id=0, parent=None, children=[1]), Node(id=1, parent=0)]
        mt = MergeTree(RootedTree(nodes), {0: 0.0, 1: -3.0}, root_ray=False)
        with pytest.raises(TreeError):
            ancestor_at_offset(mt, node_point(1), 5.0)

    def test_matches_edge_walking_oracle(self):
        rng = random.Random(13)
        from treemetrics.random_trees import random_merge_tree

        for trial in range(100):
            mt = random_merge_tree(rng, leaves=rng.randint(1, 5))
            v = rng.choice(mt.tree.node_ids())
            delta = rng.choice([0.0, 0.5, 1.0, 2.5, 10.0])
            got = ancestor_at_offset(mt, node_point(v), delta)
            want = oracle_walk_up(mt, v, delta)
            assert mt.same_point(got, want)


def oracle_walk_up(mt, v, delta):
    """Step edge by edge until the offset is spent."""
    target = mt.height[v] + delta
    x = v
    while True:
        p = mt.tree.parent(x)
        if p is None:
            if target > mt.height[x] + 1e-9:
                from treemetrics import ray_point

                return ray_point(target)
            return node_point(x)
        if target <= mt.height[p] + 1e-9:
            return mt.point_on_edge_at_height(x, min(target, mt.height[p]))
        x = p


class TestPointOrder:
    def test_edge_point_ancestor_of_child_subtree(self):
        mt = two_leaf_tree()
        mid = edge_point(1, 0.5)
        assert mt.is_point_ancestor(mid, node_point(2))
        assert mt.is_point_ancestor(mid, node_point(1))
        assert not mt.is_point_ancestor(mid, node_point(0))
        assert not mt.is_point_ancestor(node_point(2), mid)

    def test_ray_is_ancestor_of_everything(self):
        mt = two_leaf_tree()
        from treemetrics import ray_point

        assert mt.is_point_ancestor(ray_point(4.0), node_point(2))
        assert mt.is_point_ancestor(ray_point(4.0), edge_point(3, 0.7))

    def test_points_at_height_on_two_branches(self):
        mt = two_leaf_tree()
        pts = mt.points_at_height(-1.5)
        assert len(pts) == 2
        hs = sorted(mt.point_height(p) for p in pts)
        assert hs == pytest.approx([-1.5, -1.5])
