"""Augmentation: critical-height subdivision and the grid view."""

import random

import pytest

from treemetrics import MergeTree, Node, RootedTree, augment, node_point
from treemetrics.augment import GridTree, crossing_heights, subdivide_at_heights
from treemetrics.random_trees import random_merge_tree

from test_model import path_tree, two_leaf_tree


class TestEdgeSubdivision:
    def test_single_edge_against_offset_heights(self):
        # One edge spanning [0, 10]; the other tree contributes node heights
        # {3, 7}; at eps = 1 their offsets add {2, 4, 6, 8}.
        heights = sorted({3.0, 7.0} | {2.0, 4.0, 6.0, 8.0})
        got = crossing_heights(0.0, 10.0, heights)
        assert got == [2.0, 3.0, 4.0, 6.0, 7.0, 8.0]

    def test_endpoints_do_not_subdivide(self):
        assert crossing_heights(0.0, 10.0, [0.0, 10.0]) == []


class TestAugment:
    def test_eps_zero_identical_heights_no_new_vertices(self):
        # no node height of either tree crosses an edge interior
        a = path_tree([0.0, -1.0, -2.0])
        b = path_tree([0.0, -1.0, -2.0])
        a2, b2 = augment(a, b, 0.0)
        assert len(a2.tree.node_ids()) == len(a.tree.node_ids())
        assert len(b2.tree.node_ids()) == len(b.tree.node_ids())

    def test_cross_tree_heights_appear(self):
        a = path_tree([0.0, -10.0])
        b = path_tree([0.0, -3.0, -7.0])
        a2, _ = augment(a, b, 1.0)
        hs = sorted(a2.node_heights())
        # every crossing height from {0,-3,-7,-10} +/- 1 inside (-10, 0)
        for expected in [-9.0, -8.0, -7.0, -6.0, -4.0, -3.0, -2.0, -1.0]:
            assert any(abs(h - expected) < 1e-9 for h in hs), expected

    def test_leaf_set_and_lca_heights_preserved(self):
        rng = random.Random(43)
        from treemetrics.augment import augment_heights

        for trial in range(100):
            t1 = random_merge_tree(rng, leaves=rng.randint(1, 5))
            t2 = random_merge_tree(rng, leaves=rng.randint(1, 5))
            eps = rng.choice([0.0, 0.5, 1.0, 2.0])
            a2, _ = augment(t1, t2, eps)
            assert sorted(t1.height[v] for v in t1.leaves()) == pytest.approx(
                sorted(a2.height[v] for v in a2.leaves())
            )
            assert len(t1.leaves()) == len(a2.leaves())
            # pairwise leaf lca heights survive subdivision; the grid's
            # vertex map ties original leaves to augmented vertices exactly
            g = GridTree(t1, augment_heights(t1, t2, eps))
            l1 = t1.leaves()
            for i in range(len(l1)):
                for j in range(i + 1, len(l1)):
                    want = t1.point_height(t1.point_lca(node_point(l1[i]), node_point(l1[j])))
                    w = g.vertex_lca(g.vertex_of_node[l1[i]], g.vertex_of_node[l1[j]])
                    assert g.h[w] == pytest.approx(want)

    def test_subdivision_keeps_monotonicity(self):
        mt = path_tree([0.0, -5.0])
        out = subdivide_at_heights(mt, [-1.0, -2.0, -3.0])
        assert isinstance(out, MergeTree)
        assert len(out.tree.node_ids()) == 5


class TestGridTree:
    def test_grid_points_at_height(self):
        mt = two_leaf_tree()  # root 0, split -1, leaves -3/-2
        g = GridTree(mt, [-1.5])
        pts = g.points_at_height(-1.5)
        assert len(pts) == 2
        for p in pts:
            assert g.valid_point(p)

    def test_locate_round_trip(self):
        rng = random.Random(47)
        for trial in range(60):
            mt = random_merge_tree(rng, leaves=rng.randint(1, 5))
            g = GridTree(mt, sorted({h + 0.5 for h in mt.node_heights()}))
            for v in mt.tree.node_ids():
                gp = g.locate(node_point(v))
                back = g.to_point_ref(gp)
                assert mt.same_point(back, node_point(v))

    def test_lca_point_on_grid_matches_tree_lca(self):
        rng = random.Random(53)
        for trial in range(60):
            mt = random_merge_tree(rng, leaves=rng.randint(2, 5))
            g = GridTree(mt, [])
            ids = mt.tree.node_ids()
            u, v = rng.choice(ids), rng.choice(ids)
            got = g.lca_point(g.locate(node_point(u)), g.locate(node_point(v)))
            want = mt.point_lca(node_point(u), node_point(v))
            assert mt.same_point(g.to_point_ref(got), want)

    def test_anc_point_walks_to_ray(self):
        mt = path_tree([0.0, -4.0])
        g = GridTree(mt, [-2.0])
        p = g.locate(node_point(1))
        up = g.anc_point(p, 3.0)
        assert up[0] == g.root
        assert up[1] == pytest.approx(3.0)
