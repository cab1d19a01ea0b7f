"""Parsing and serialization of merge trees and embedded trees.

Two interchange formats:

* JSON: ``{"nodes": [{"id": int, "parent": int|null, "height": float,
  "label": str?, "geometry": [[x, y], ...]?}, ...]}``.  Heights are
  required for merge trees, per-edge polylines for embedded trees (the
  root's geometry is its single-point position).
* Extended Newick: standard nesting with a ``:h`` suffix giving the
  absolute node height, e.g. ``((a:-3,b:-2):-1)root:0``.

Serialization is canonical: node ids are renumbered densely in preorder,
so ``serialize(parse(x))`` is a fixed point up to renumbering.
"""

from __future__ import annotations

import json

from .model import EmbeddedTree, MergeTree, Node, RootedTree, TreeError

__all__ = ["ParseError", "parse_tree", "serialize_tree", "canonicalize"]


class ParseError(TreeError):
    """Raised on malformed input; carries a position when known."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


def parse_tree(text: str, format: str = "json") -> MergeTree | EmbeddedTree:
    """Parse a tree in the given format ("json" or "newick_ext").

    JSON input yields an EmbeddedTree when geometry is present on all
    nodes, otherwise a MergeTree (heights required).  Newick input always
    yields a MergeTree.
    """
    if format == "json":
        return _parse_json(text)
    if format == "newick_ext":
        return _parse_newick(text)
    raise ParseError(f"unknown format {format!r}")


def _parse_json(text: str) -> MergeTree | EmbeddedTree:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", position=e.pos) from e
    if not isinstance(obj, dict) or "nodes" not in obj:
        raise ParseError('expected an object with a "nodes" list')
    recs = obj["nodes"]
    if not isinstance(recs, list) or not recs:
        raise ParseError('"nodes" must be a non-empty list')
    nodes = []
    by_id: dict[int, dict] = {}
    for i, rec in enumerate(recs):
        if "id" not in rec:
            raise ParseError(f"node record {i} lacks an id")
        by_id[rec["id"]] = rec
        nodes.append(Node(id=rec["id"], parent=rec.get("parent"), label=rec.get("label")))
    for n in nodes:
        if n.parent is not None:
            if n.parent not in by_id:
                raise ParseError(f"node {n.id} references unknown parent {n.parent}")
    # Children in listed order.
    node_map = {n.id: n for n in nodes}
    for n in nodes:
        if n.parent is not None:
            node_map[n.parent].children.append(n.id)
    tree = RootedTree(nodes)
    has_geometry = all("geometry" in by_id[v] for v in tree.node_ids())
    if has_geometry:
        geometry = {v: [tuple(pt) for pt in by_id[v]["geometry"]] for v in tree.node_ids()}
        return EmbeddedTree(tree, geometry)
    missing = [v for v in tree.node_ids() if "height" not in by_id[v]]
    if missing:
        raise ParseError(f"nodes {missing} lack heights (and not all nodes carry geometry)")
    height = {v: float(by_id[v]["height"]) for v in tree.node_ids()}
    root_ray = bool(obj.get("root_ray", True))
    return MergeTree(tree, height, root_ray=root_ray)


# ---- extended Newick ---------------------------------------------------


def _parse_newick(text: str) -> MergeTree:
    parser = _NewickParser(text)
    root_spec = parser.parse()
    nodes: list[Node] = []
    height: dict[int, float] = {}

    def build(spec, parent_id):
        nid = len(nodes)
        label, h, children = spec
        if h is None:
            raise ParseError(f"node {label or nid} lacks a :height suffix")
        nodes.append(Node(id=nid, parent=parent_id, label=label))
        height[nid] = h
        for c in children:
            cid = build(c, nid)
            nodes[nid].children.append(cid)
        return nid

    build(root_spec, None)
    return MergeTree(RootedTree(nodes), height)


class _NewickParser:
    """Recursive-descent parser for ``(child,child,...)label:height``."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self):
        spec = self._subtree()
        self._skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == ";":
            self.pos += 1
            self._skip_ws()
        if self.pos != len(self.text):
            raise ParseError("trailing characters after tree", position=self.pos)
        return spec

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _subtree(self):
        self._skip_ws()
        children = []
        if self.pos < len(self.text) and self.text[self.pos] == "(":
            self.pos += 1
            children.append(self._subtree())
            self._skip_ws()
            while self.pos < len(self.text) and self.text[self.pos] == ",":
                self.pos += 1
                children.append(self._subtree())
                self._skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != ")":
                raise ParseError("expected ')'", position=self.pos)
            self.pos += 1
        label = self._label()
        h = None
        self._skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == ":":
            self.pos += 1
            h = self._number()
        return (label, h, children)

    def _label(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in "():,;" and not self.text[self.pos].isspace():
            self.pos += 1
        return self.text[start:self.pos] or None

    def _number(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos] in "+-.eE" or self.text[self.pos].isdigit()):
            self.pos += 1
        token = self.text[start:self.pos]
        try:
            return float(token)
        except ValueError:
            raise ParseError(f"bad number {token!r}", position=start) from None


# ---- serialization -----------------------------------------------------


def canonicalize(t: MergeTree | EmbeddedTree) -> MergeTree | EmbeddedTree:
    """Renumber node ids densely in preorder, preserving children order."""
    tree = t.tree
    order = tree.preorder()
    remap = {old: new for new, old in enumerate(order)}
    nodes = []
    for old in order:
        n = tree.nodes[old]
        nodes.append(
            Node(
                id=remap[old],
                parent=None if n.parent is None else remap[n.parent],
                children=[remap[c] for c in n.children],
                label=n.label,
            )
        )
    new_tree = RootedTree(nodes)
    if isinstance(t, MergeTree):
        return MergeTree(new_tree, {remap[v]: t.height[v] for v in tree.node_ids()}, root_ray=t.root_ray)
    return EmbeddedTree(new_tree, {remap[v]: t.geometry[v] for v in tree.node_ids()})


def serialize_tree(t: MergeTree | EmbeddedTree, format: str = "json") -> str:
    if format == "json":
        return _serialize_json(canonicalize(t))
    if format == "newick_ext":
        if not isinstance(t, MergeTree):
            raise TreeError("newick serialization requires a merge tree")
        return _serialize_newick(canonicalize(t))
    raise TreeError(f"unknown format {format!r}")


def _serialize_json(t: MergeTree | EmbeddedTree) -> str:
    recs = []
    for v in t.tree.node_ids():
        n = t.tree.nodes[v]
        rec: dict = {"id": v, "parent": n.parent}
        if n.label is not None:
            rec["label"] = n.label
        if isinstance(t, MergeTree):
            rec["height"] = t.height[v]
        else:
            rec["geometry"] = [list(pt) for pt in t.geometry[v]]
        recs.append(rec)
    obj: dict = {"nodes": recs}
    if isinstance(t, MergeTree) and not t.root_ray:
        obj["root_ray"] = False
    return json.dumps(obj, indent=2, sort_keys=True)


def _serialize_newick(t: MergeTree) -> str:
    def emit(v):
        n = t.tree.nodes[v]
        inner = ""
        if n.children:
            inner = "(" + ",".join(emit(c) for c in n.children) + ")"
        label = n.label or ""
        return f"{inner}{label}:{t.height[v]:g}"

    return emit(t.tree.root) + ";"
