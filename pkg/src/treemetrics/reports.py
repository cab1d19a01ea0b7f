"""Result container shared by every distance operation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class DistanceReport:
    """A computed distance with its parameters and optional witness.

    ``witness`` is metric-specific JSON-serializable data (a correspondence
    pair list, a map assignment, an edit script) that re-validates to
    ``value`` through the metric's own checker.
    """

    metric: str
    value: float
    witness: object = None
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"metric": self.metric, "value": self.value, "witness": self.witness, "params": self.params},
            indent=2,
            sort_keys=True,
        )


@dataclass
class EditCosts:
    """Unit-style operation costs for edit and alignment distances."""

    relabel: float = 1.0
    insert: float = 1.0
    delete: float = 1.0

    def __post_init__(self):
        if min(self.relabel, self.insert, self.delete) < 0:
            raise ValueError("edit costs must be nonnegative")
