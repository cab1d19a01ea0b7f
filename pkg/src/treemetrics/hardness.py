"""Partition oracle and the reduction gadget behind the 1-vs-3 gap.

UNRESTRICTED-PARTITION asks whether a multiset of positive integers splits
into k multisets of equal sums.  ``build_gadget`` turns an instance into a
pair of merge trees whose merge-variant Frechet-like distance is intended
to land at or below 1 exactly on yes instances and at or above 3 on no
instances; ``verify_gap`` computes both sides and reports whether the gap
held.

Gadget reconstruction (the published figures are not available in text):

    T1: root at 0, trunk down to a hub at -B; one anchor per element at
        depth eta below the hub; element i hangs a_i parallel teeth of
        length A from its anchor.
    T2: same root/trunk/hub; k part anchors at depth eta; each part hangs
        ceil(S) teeth of length A, S = sum(X)/k.

Cheap pairs (cost <= eta = 1/2): trunk onto trunk, anchors onto anchors,
teeth pointwise onto teeth, hub onto part anchors (the closure pair forced
when a part hosts several elements).  Expensive mismatches (cost >= A/2):
absorbing an unmatched tooth, sharing a tooth leaf, or crossing teeth
between parts.  Tooth counts therefore must balance per part, which is
where the sums enter.

Known limitation, verified by the gap sweep: element integrity is not
enforceable in this cost model, so no-instances whose total IS divisible
by k (splitting an element would balance the parts) can still admit cheap
correspondences.  See the test suite and the gap reports for how this
surfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .classic_metrics import CapacityError
from .frechet_like import fl_distance
from .model import MergeTree, Node, RootedTree, TreeError

__all__ = [
    "PartitionInstance",
    "PartitionWitness",
    "GadgetInstance",
    "solve_partition",
    "build_gadget",
    "verify_gap",
]

ANCHOR_DEPTH = 0.5
MAX_ELEMENTS_EXACT = 15


@dataclass
class PartitionInstance:
    """A multiset of positive integers and a number of parts.

    Strict mode enforces the published input form n = 3k; relaxed mode
    allows any n >= k.
    """

    X: list[int]
    k: int
    strict: bool = True

    def __post_init__(self):
        self.X = sorted(int(a) for a in self.X)
        if not self.X or any(a < 1 for a in self.X):
            raise TreeError("instance needs positive integers")
        if self.k < 1:
            raise TreeError("need at least one part")
        n = len(self.X)
        if self.strict and n != 3 * self.k:
            raise TreeError(f"strict mode needs n = 3k, got n={n}, k={self.k}")
        if n < self.k:
            raise TreeError(f"cannot split {n} elements into {self.k} nonempty parts")

    @property
    def total(self) -> int:
        return sum(self.X)


@dataclass
class PartitionWitness:
    parts: list[list[int]]

    def sums(self) -> list[int]:
        return [sum(p) for p in self.parts]

    def validates(self, instance: PartitionInstance) -> bool:
        pool = sorted(a for part in self.parts for a in part)
        if pool != sorted(instance.X) or len(self.parts) != instance.k:
            return False
        target = instance.total / instance.k
        return all(abs(s - target) < 1e-9 for s in self.sums())


def solve_partition(instance: PartitionInstance) -> PartitionWitness | None:
    """Exact equal-sum k-partition by backtracking, or None.

    Elements are placed largest-first into bins capped at the target sum;
    equal-looking bins are deduplicated.  Instances above
    MAX_ELEMENTS_EXACT are refused.
    """
    if len(instance.X) > MAX_ELEMENTS_EXACT:
        raise CapacityError(f"exact search capped at {MAX_ELEMENTS_EXACT} elements")
    k = instance.k
    if instance.total % k != 0:
        return None
    target = instance.total // k
    items = sorted(instance.X, reverse=True)
    if items[0] > target:
        return None
    bins = [0] * k
    parts: list[list[int]] = [[] for _ in range(k)]

    def place(i: int) -> bool:
        if i == len(items):
            return all(b == target for b in bins)
        seen = set()
        for j in range(k):
            if bins[j] in seen:
                continue
            seen.add(bins[j])
            if bins[j] + items[i] > target:
                continue
            bins[j] += items[i]
            parts[j].append(items[i])
            if place(i + 1):
                return True
            bins[j] -= items[i]
            parts[j].pop()
        return False

    if not place(0):
        return None
    witness = PartitionWitness([sorted(p) for p in parts])
    assert witness.validates(instance)
    return witness


@dataclass
class GadgetInstance:
    instance: PartitionInstance
    A: float
    B: float
    T1: MergeTree = field(repr=False, default=None)
    T2: MergeTree = field(repr=False, default=None)

    def to_json(self):
        from .io import serialize_tree
        import json

        return {
            "X": list(self.instance.X),
            "k": self.instance.k,
            "A": self.A,
            "B": self.B,
            "T1": json.loads(serialize_tree(self.T1)),
            "T2": json.loads(serialize_tree(self.T2)),
        }


def _comb_tree(tooth_counts: list[int], A: float, B: float) -> MergeTree:
    """Root, trunk to the hub, one shallow anchor per entry, teeth below."""
    nodes = [Node(id=0, parent=None, label="root"), Node(id=1, parent=0, label="hub")]
    nodes[0].children.append(1)
    height = {0: 0.0, 1: -B}
    for idx, count in enumerate(tooth_counts):
        anchor = len(nodes)
        nodes.append(Node(id=anchor, parent=1, label=f"anchor{idx}"))
        nodes[1].children.append(anchor)
        height[anchor] = -B - ANCHOR_DEPTH
        for _ in range(count):
            tooth = len(nodes)
            nodes.append(Node(id=tooth, parent=anchor))
            nodes[anchor].children.append(tooth)
            height[tooth] = -B - ANCHOR_DEPTH - A
    return MergeTree(RootedTree(nodes), height)


def build_gadget(instance: PartitionInstance, A: float | None = None, B: float | None = None) -> GadgetInstance:
    """The two reduction trees for a partition instance.

    Defaults A = B = 10 * sum(X).  A and B must exceed 3 times the height
    span of the element sub-gadgets (teeth length), or mis-matchings could
    cost less than the gap demands.
    """
    total = instance.total
    if A is None:
        A = 10.0 * total
    if B is None:
        B = 10.0 * total
    span = 3.0 * (ANCHOR_DEPTH * 2)
    if A < 6.0 or B < 6.0 or A < span or B < span:
        raise TreeError(f"A={A}, B={B} too small for the element scale (need >= 6)")
    teeth_per_part = math.ceil(total / instance.k)
    T1 = _comb_tree(list(instance.X), A, B)
    T2 = _comb_tree([teeth_per_part] * instance.k, A, B)
    return GadgetInstance(instance=instance, A=A, B=B, T1=T1, T2=T2)


def verify_gap(instance: PartitionInstance, A: float | None = None, B: float | None = None) -> dict:
    """Run the partition oracle and the Frechet-like distance on the gadget.

    gap_respected = (yes -> fl <= 1) and (no -> fl >= 3).
    """
    witness = solve_partition(instance)
    gadget = build_gadget(instance, A, B)
    if len(instance.X) > 6:
        raise CapacityError("gap verification capped at 6 elements at desk scale")
    report = fl_distance(gadget.T1, gadget.T2, variant="merge")
    fl = report.value
    is_yes = witness is not None
    if is_yes:
        respected = fl <= 1.0 + 1e-9
    else:
        respected = fl >= 3.0 - 1e-9
    return {
        "X": list(instance.X),
        "k": instance.k,
        "A": gadget.A,
        "B": gadget.B,
        "partition": witness.parts if witness else None,
        "fl": fl,
        "gap_respected": bool(respected),
    }
