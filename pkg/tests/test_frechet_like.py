"""Frechet-like distance: correspondence checks, decision, oracle parity."""

import random

import pytest

from treemetrics import (
    Correspondence,
    FLQuery,
    MergeTree,
    Node,
    RootedTree,
    brute_force_fl,
    check_correspondence,
    curve_frechet,
    decide_fl,
    fl_distance,
    node_point,
)
from treemetrics.random_trees import random_merge_tree, random_path_embedded_tree

from test_model import path_tree, two_leaf_tree


def tiny_random_pair(rng, max_leaves=3, height_range=(-3, 0)):
    t1 = random_merge_tree(rng, leaves=rng.randint(1, max_leaves), height_range=height_range)
    t2 = random_merge_tree(rng, leaves=rng.randint(1, max_leaves), height_range=height_range)
    return t1, t2


def grid_sizes(t1, t2, eps):
    from treemetrics.frechet_like import FLQuery, _build_context

    ctx = _build_context(t1, t2, FLQuery(variant="merge", eps=eps))
    return ctx.f1.n, ctx.f2.n


class TestCheckCorrespondence:
    def test_identity_diagonal_valid(self):
        mt = two_leaf_tree()
        q = FLQuery(variant="merge", eps=0.0)
        ok, witness = decide_fl(mt, mt, q)
        assert ok
        passed, violations = check_correspondence(mt, mt, witness, q)
        assert passed, violations

    def test_missing_grid_point_is_totality_violation(self):
        mt = path_tree([0.0, -1.0])
        q = FLQuery(variant="merge", eps=0.0)
        R = Correspondence([(node_point(0), node_point(0))])
        ok, violations = check_correspondence(mt, mt, R, q)
        assert not ok
        assert any("condition 1" in v for v in violations)

    def test_cost_violation_reported(self):
        mt = path_tree([0.0, -1.0])
        q = FLQuery(variant="merge", eps=0.0)
        R = Correspondence(
            [
                (node_point(0), node_point(0)),
                (node_point(1), node_point(1)),
                (node_point(1), node_point(0)),
            ]
        )
        ok, violations = check_correspondence(mt, mt, R, q)
        assert not ok
        assert any(v.startswith("cost") for v in violations)


class TestDecideFl:
    def test_identical_trees_eps_zero(self):
        mt = two_leaf_tree()
        ok, witness = decide_fl(mt, mt, FLQuery(variant="merge", eps=0.0))
        assert ok
        assert witness is not None

    def test_depth_mismatch_needs_eps(self):
        t1 = path_tree([0.0, -1.0])
        t2 = path_tree([0.0, -3.0])
        assert not decide_fl(t1, t2, FLQuery(variant="merge", eps=1.0))[0]
        ok, witness = decide_fl(t1, t2, FLQuery(variant="merge", eps=2.0))
        assert ok
        passed, violations = check_correspondence(t1, t2, witness, FLQuery(variant="merge", eps=2.0))
        assert passed, violations

    def test_monotone_in_eps(self):
        rng = random.Random(83)
        for trial in range(40):
            t1, t2 = tiny_random_pair(rng)
            from treemetrics.frechet_like import _candidate_eps

            ladder = _candidate_eps(t1, t2, FLQuery(variant="merge"))
            results = [decide_fl(t1, t2, FLQuery(variant="merge", eps=e))[0] for e in ladder]
            assert True in results
            first = results.index(True)
            assert all(results[first:]), (trial, ladder, results)


class TestBruteForce:
    def test_identical_two_point_trees(self):
        mt = path_tree([0.0, -1.0])
        assert brute_force_fl(mt, mt, FLQuery(variant="merge")) == 0.0

    def test_single_edges_one_vs_three(self):
        t1 = path_tree([0.0, -1.0])
        t2 = path_tree([0.0, -3.0])
        assert brute_force_fl(t1, t2, FLQuery(variant="merge")) == pytest.approx(2.0)

    def test_grid_cap_enforced(self):
        from treemetrics.classic_metrics import CapacityError

        rng = random.Random(5)
        t1 = random_merge_tree(rng, leaves=6, height_range=(-9, 0))
        t2 = random_merge_tree(rng, leaves=6, height_range=(-9, 0))
        with pytest.raises(CapacityError):
            brute_force_fl(t1, t2, FLQuery(variant="merge"), max_grid=5)


class TestOracleParity:
    def test_decide_matches_brute_force(self):
        rng = random.Random(89)
        tested = 0
        trial = 0
        while tested < 60 and trial < 4000:
            trial += 1
            t1, t2 = tiny_random_pair(rng)
            from treemetrics.frechet_like import _candidate_eps

            cands = _candidate_eps(t1, t2, FLQuery(variant="merge"))
            n1, n2 = grid_sizes(t1, t2, cands[-1])
            if n1 > 12 or n2 > 12:
                continue
            want = brute_force_fl(t1, t2, FLQuery(variant="merge"))
            got = fl_distance(t1, t2, variant="merge")
            assert got.value == pytest.approx(want), (trial, got.value, want)
            # every eps decision matches too
            for e in cands:
                q = FLQuery(variant="merge", eps=e)
                dec, witness = decide_fl(t1, t2, q)
                from treemetrics.frechet_like import _PairSolver, _build_context

                ctx = _build_context(t1, t2, q)
                brute = _PairSolver(ctx, e).solve() is not None
                assert dec == brute, (trial, e)
                if dec:
                    passed, violations = check_correspondence(t1, t2, witness, q)
                    assert passed, (trial, e, violations)
            tested += 1
        assert tested == 60

    def test_symmetry_of_value(self):
        rng = random.Random(97)
        for trial in range(30):
            t1, t2 = tiny_random_pair(rng)
            a = fl_distance(t1, t2, variant="merge").value
            b = fl_distance(t2, t1, variant="merge").value
            assert a == pytest.approx(b), trial


class TestFlDistance:
    def test_self_distance_zero(self):
        rng = random.Random(101)
        for trial in range(20):
            mt = random_merge_tree(rng, leaves=rng.randint(1, 4))
            assert fl_distance(mt, mt, variant="merge").value == 0.0

    def test_witness_revalidates_at_reported_eps(self):
        rng = random.Random(103)
        for trial in range(25):
            t1, t2 = tiny_random_pair(rng, max_leaves=4, height_range=(-4, 0))
            rep = fl_distance(t1, t2, variant="merge")
            witness = Correspondence.from_json(rep.witness)
            q = FLQuery(variant="merge", eps=rep.value)
            passed, violations = check_correspondence(t1, t2, witness, q)
            assert passed, (trial, rep.value, violations)

    def test_path_trees_reduce_to_curve_frechet(self):
        rng = random.Random(107)
        for trial in range(25):
            e1 = random_path_embedded_tree(rng, segments=rng.randint(1, 4))
            e2 = random_path_embedded_tree(rng, segments=rng.randint(1, 4))
            res = 0.5
            rep = fl_distance(e1, e2, variant="euclidean", resolution=res)
            p = e1.geometry[1]
            qq = e2.geometry[1]
            want = curve_frechet(p, qq, resolution=res)
            assert abs(rep.value - want) <= res + 1e-9, (trial, rep.value, want)
