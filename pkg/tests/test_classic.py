"""Classic metrics: edit, alignment, Hausdorff, curve Frechet."""

import itertools
import math
import random

import pytest

from treemetrics import EditCosts, Node, RootedTree
from treemetrics.classic_metrics import (
    CapacityError,
    alignment_distance,
    curve_frechet,
    discrete_frechet,
    edit_distance,
    hausdorff_distance,
    sample_polyline,
)
from treemetrics.random_trees import random_labeled_tree
from treemetrics.io import parse_tree


def leaf_tree(label):
    return RootedTree([Node(id=0, parent=None, label=label)])


def build(spec):
    """spec = (label, [child specs]); returns a RootedTree."""
    nodes = []

    def walk(s, parent):
        nid = len(nodes)
        nodes.append(Node(id=nid, parent=parent, label=s[0]))
        for c in s[1]:
            cid = walk(c, nid)
            nodes[nid].children.append(cid)
        return nid

    walk(spec, None)
    return RootedTree(nodes)


# --------------------------------------------------------------------------
# Tai-mapping oracle: exhaustive enumeration of valid edit mappings.
# Valid whenever relabel <= insert + delete, which all tested costs satisfy.
# --------------------------------------------------------------------------


def tai_mapping_edit(t1, t2, costs):
    pre1 = t1.preorder()
    pre2 = t2.preorder()
    pos1 = {v: i for i, v in enumerate(pre1)}
    pos2 = {v: i for i, v in enumerate(pre2)}

    def compatible(pairs, i, j):
        for (i2, j2) in pairs:
            anc1 = t1.is_ancestor(i, i2) or t1.is_ancestor(i2, i)
            anc2 = t2.is_ancestor(j, j2) or t2.is_ancestor(j2, j)
            if anc1 != anc2:
                return False
            if t1.is_ancestor(i, i2) != t2.is_ancestor(j, j2):
                return False
            if not anc1:
                if (pos1[i] < pos1[i2]) != (pos2[j] < pos2[j2]):
                    return False
        return True

    best = [math.inf]

    def relabel_cost(i, j):
        a = t1.nodes[i].label or ""
        b = t2.nodes[j].label or ""
        return 0.0 if a == b else costs.relabel

    def search(k, pairs, used2, acc):
        if acc >= best[0]:
            return
        if k == len(pre1):
            total = acc + costs.insert * (len(pre2) - len(used2))
            best[0] = min(best[0], total)
            return
        i = pre1[k]
        # delete i
        search(k + 1, pairs, used2, acc + costs.delete)
        for j in pre2:
            if j in used2 or not compatible(pairs, i, j):
                continue
            search(k + 1, pairs + [(i, j)], used2 | {j}, acc + relabel_cost(i, j))

    search(0, [], set(), 0.0)
    return best[0]


class TestEditDistance:
    def test_identical_trees_zero(self):
        t = build(("a", [("b", []), ("c", [("d", [])])]))
        assert edit_distance(t, t).value == 0

    def test_single_node_relabel(self):
        rep = edit_distance(leaf_tree("a"), leaf_tree("b"))
        assert rep.value == 1
        assert rep.witness == [{"op": "relabel", "node": 0, "to": "b", "cost": 1.0}]

    def test_insert_only(self):
        t1 = leaf_tree("a")
        t2 = build(("a", [("b", []), ("c", [])]))
        assert edit_distance(t1, t2).value == 2

    def test_script_costs_sum_to_value(self):
        rng = random.Random(3)
        for trial in range(50):
            t1 = random_labeled_tree(rng, 6)
            t2 = random_labeled_tree(rng, 6)
            rep = edit_distance(t1, t2)
            assert sum(step["cost"] for step in rep.witness) == pytest.approx(rep.value)

    @pytest.mark.parametrize("costs", [EditCosts(), EditCosts(0.5, 1, 1), EditCosts(1.5, 1, 1)])
    def test_matches_exhaustive_mapping_oracle(self, costs):
        rng = random.Random(11)
        for trial in range(40):
            t1 = random_labeled_tree(rng, 6)
            t2 = random_labeled_tree(rng, 6)
            got = edit_distance(t1, t2, costs).value
            want = tai_mapping_edit(t1, t2, costs)
            assert got == pytest.approx(want), (trial, got, want)

    def test_symmetric_when_insert_equals_delete(self):
        rng = random.Random(17)
        for trial in range(40):
            t1 = random_labeled_tree(rng, 6)
            t2 = random_labeled_tree(rng, 6)
            assert edit_distance(t1, t2).value == pytest.approx(edit_distance(t2, t1).value)


class TestAlignmentDistance:
    def test_identical_trees_zero(self):
        t = build(("a", [("b", []), ("c", [])]))
        assert alignment_distance(t, t).value == 0

    def test_single_nodes_equal_zero(self):
        assert alignment_distance(leaf_tree("a"), leaf_tree("a")).value == 0

    def test_alignment_at_least_edit(self):
        rng = random.Random(23)
        for trial in range(300):
            t1 = random_labeled_tree(rng, 6)
            t2 = random_labeled_tree(rng, 6)
            a = alignment_distance(t1, t2).value
            e = edit_distance(t1, t2).value
            assert a >= e - 1e-12, (trial, a, e)

    def test_alignment_can_exceed_edit(self):
        # regrouping conflict: x groups {a,b} in T1, y groups {b,c} in T2.
        # Edit deletes x and inserts y (cost 2); an aligned supertree cannot
        # hold both groupings and pays 4.
        t1 = build(("r", [("x", [("a", []), ("b", [])]), ("c", [])]))
        t2 = build(("r", [("a", []), ("y", [("b", []), ("c", [])])]))
        assert edit_distance(t1, t2).value == 2
        assert alignment_distance(t1, t2).value == 4

    def test_symmetric_with_symmetric_costs(self):
        rng = random.Random(31)
        for trial in range(40):
            t1 = random_labeled_tree(rng, 6)
            t2 = random_labeled_tree(rng, 6)
            assert alignment_distance(t1, t2).value == pytest.approx(
                alignment_distance(t2, t1).value
            )

    def test_degree_bound_enforced(self):
        wide = build(("a", [(str(i), []) for i in range(13)]))
        with pytest.raises(CapacityError):
            alignment_distance(wide, leaf_tree("a"))


def embedded_segment(x0, y0, x1, y1):
    text = (
        '{"nodes": ['
        f'{{"id": 0, "parent": null, "geometry": [[{x0}, {y0}]]}},'
        f'{{"id": 1, "parent": 0, "geometry": [[{x0}, {y0}], [{x1}, {y1}]]}}]}}'
    )
    return parse_tree(text)


class TestHausdorff:
    def test_identical_embeddings_zero(self):
        t = embedded_segment(0, 0, 1, 0)
        assert hausdorff_distance(t, t, resolution=0.1).value == 0

    def test_parallel_unit_segments(self):
        a = embedded_segment(0, 0, 1, 0)
        b = embedded_segment(0, 0.5, 1, 0.5)
        rep = hausdorff_distance(a, b, resolution=0.05)
        assert abs(rep.value - 0.5) <= 0.05

    def test_symmetry(self):
        a = embedded_segment(0, 0, 2, 1)
        b = embedded_segment(0, 1, 2, 0)
        r1 = hausdorff_distance(a, b, resolution=0.05).value
        r2 = hausdorff_distance(b, a, resolution=0.05).value
        assert r1 == pytest.approx(r2)


class TestCurveFrechet:
    def test_equal_polylines_zero(self):
        p = [(0, 0), (1, 0), (2, 1)]
        assert curve_frechet(p, p, resolution=0.1) == 0

    def test_parallel_segments_offset(self):
        p = [(0, 0), (1, 0)]
        q = [(0, 0.7), (1, 0.7)]
        assert curve_frechet(p, q, resolution=0.05) == pytest.approx(0.7, abs=1e-9)

    def test_frechet_at_least_hausdorff(self):
        rng = random.Random(37)
        for trial in range(30):
            p = [(rng.uniform(0, 3), rng.uniform(0, 3)) for _ in range(4)]
            q = [(rng.uniform(0, 3), rng.uniform(0, 3)) for _ in range(4)]
            fr = curve_frechet(p, q, resolution=0.2)
            ha = directed_set_hausdorff(p, q, 0.2)
            assert fr >= ha - 1e-9

    def test_refinement_convergence(self):
        rng = random.Random(41)
        for trial in range(20):
            p = [(rng.uniform(0, 2), rng.uniform(0, 2)) for _ in range(rng.randint(2, 5))]
            q = [(rng.uniform(0, 2), rng.uniform(0, 2)) for _ in range(rng.randint(2, 5))]
            coarse = curve_frechet(p, q, resolution=0.5)
            fine = curve_frechet(p, q, resolution=0.05)
            assert abs(coarse - fine) <= 0.5 + 1e-9

    def test_retreating_polyline_distinguished(self):
        # out-and-back vs straight: Hausdorff tiny, Frechet large
        p = [(0, 0), (10, 0)]
        q = [(0, 0), (10, 0), (0, 0)]
        assert curve_frechet(p, q, resolution=0.5) == pytest.approx(10.0, abs=1e-9)


def directed_set_hausdorff(p, q, resolution):
    import numpy as np

    a = np.asarray(sample_polyline(p, resolution))
    b = np.asarray(sample_polyline(q, resolution))
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    return max(float(d.min(axis=1).max()), float(d.min(axis=0).max()))
