"""Parsing, serialization, and round-trip properties."""

import random

import pytest

from treemetrics import (
    EmbeddedTree,
    MergeTree,
    ParseError,
    canonicalize,
    parse_tree,
    serialize_tree,
)
from treemetrics.random_trees import random_merge_tree


class TestJsonFormat:
    def test_minimal_merge_tree(self):
        mt = parse_tree('{"nodes": [{"id": 0, "parent": null, "height": 0, "label": "a"}]}')
        assert isinstance(mt, MergeTree)

    def test_monotonicity_error_reports_edge(self):
        text = (
            '{"nodes": [{"id": 0, "parent": null, "height": 0},'
            ' {"id": 1, "parent": 0, "height": 5}]}'
        )
        with pytest.raises(Exception, match="0->1"):
            parse_tree(text)

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError, match="position"):
            parse_tree('{"nodes": [}')

    def test_unknown_parent_rejected(self):
        with pytest.raises(ParseError, match="unknown parent"):
            parse_tree('{"nodes": [{"id": 0, "parent": 9, "height": 0}]}')

    def test_embedded_tree_parses(self):
        text = (
            '{"nodes": ['
            '{"id": 0, "parent": null, "geometry": [[0, 0]]},'
            '{"id": 1, "parent": 0, "geometry": [[0, 0], [1, 0], [1, -2]]}]}'
        )
        t = parse_tree(text)
        assert isinstance(t, EmbeddedTree)
        assert t.edge_length(1) == pytest.approx(3.0)

    def test_geometry_discontinuity_rejected(self):
        text = (
            '{"nodes": ['
            '{"id": 0, "parent": null, "geometry": [[0, 0]]},'
            '{"id": 1, "parent": 0, "geometry": [[5, 5], [1, 0]]}]}'
        )
        with pytest.raises(Exception, match="start at its parent"):
            parse_tree(text)


class TestNewickFormat:
    def test_nested_heights(self):
        mt = parse_tree("((a:-3,b:-2):-1)root:0", format="newick_ext")
        assert isinstance(mt, MergeTree)
        assert sorted(mt.node_heights()) == [-3, -2, -1, 0]
        labels = {mt.tree.nodes[v].label for v in mt.tree.node_ids()}
        assert {"a", "b", "root"} <= labels

    def test_missing_height_rejected(self):
        with pytest.raises(ParseError, match="height"):
            parse_tree("(a:-1,b)r:0", format="newick_ext")

    def test_unbalanced_paren_rejected(self):
        with pytest.raises(ParseError):
            parse_tree("((a:-1:0", format="newick_ext")

    def test_newick_round_trip(self):
        src = "((a:-3,b:-2):-1)root:0;"
        mt = parse_tree(src, format="newick_ext")
        again = parse_tree(serialize_tree(mt, format="newick_ext"), format="newick_ext")
        assert serialize_tree(mt) == serialize_tree(again)


class TestRoundTrip:
    def test_random_trees_round_trip(self):
        rng = random.Random(29)
        for trial in range(100):
            mt = random_merge_tree(rng, leaves=rng.randint(1, 6))
            text = serialize_tree(mt)
            back = parse_tree(text)
            assert serialize_tree(back) == text
            assert structural_signature(canonicalize(mt)) == structural_signature(back)

    def test_canonical_is_idempotent(self):
        rng = random.Random(31)
        mt = random_merge_tree(rng, leaves=4)
        c1 = canonicalize(mt)
        c2 = canonicalize(c1)
        assert serialize_tree(c1) == serialize_tree(c2)


def structural_signature(mt):
    """Shape + heights + labels, independent of node numbering."""

    def sig(v):
        n = mt.tree.nodes[v]
        return (mt.height[v], n.label, tuple(sig(c) for c in n.children))

    return sig(mt.tree.root)
