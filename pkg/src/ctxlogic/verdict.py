"""Result type shared by the backends, the search and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

HOLDS = frozenset({"valid", "satisfiable", "equivalent", "lhs_implies_rhs"})
REFUTED = frozenset(
    {"not_valid", "unsatisfiable", "refuted", "rhs_implies_lhs", "incomparable"}
)
OUTCOMES = HOLDS | REFUTED | {"unknown"}


@dataclass
class Verdict:
    """Outcome of a check.

    ``model`` holds the raw counterexample or witness (a valuation dict, a
    :class:`~ctxlogic.kripke.Lasso` or a
    :class:`~ctxlogic.kripke.KripkeStructure`); ``instantiation`` is set when
    the counterexample came from the refutation search.
    """

    outcome: str
    method: str | None = None
    backend: str | None = None
    model: Any = None
    instantiation: dict | None = None
    stats: dict = field(default_factory=dict)
    detail: str = ""

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")

    @property
    def is_valid(self) -> bool:
        return self.outcome == "valid"
