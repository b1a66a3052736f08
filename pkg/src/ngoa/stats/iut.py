"""Intersection-union combination of per-metric non-inferiority tests."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .noninferiority import NON_INFERIOR, NOT_DEMONSTRATED, TestResult


@dataclass(frozen=True)
class IutResult:
    components: tuple[TestResult, ...]
    decision: str

    @property
    def non_inferior(self) -> bool:
        return self.decision == NON_INFERIOR

    def to_dict(self) -> dict:
        return {"decision": self.decision,
                "components": [c.to_dict() for c in self.components]}


def iut_decision(components: Sequence[TestResult]) -> IutResult:
    """Overall non-inferior only when every component is; no alpha splitting."""
    if not components:
        raise ValueError("iut_decision needs at least one component test")
    ok = all(c.decision == NON_INFERIOR for c in components)
    return IutResult(tuple(components), NON_INFERIOR if ok else NOT_DEMONSTRATED)
