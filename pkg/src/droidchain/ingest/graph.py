from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from src.droidchain.ingest.signatures import MethodSig


class Origin(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    HYBRID = "hybrid"


Edge = tuple[MethodSig, MethodSig]


@dataclass
class CallGraph:
    """Weighted caller -> callee multigraph; counts are the invocation multipliers."""

    app_id: str
    origin: Origin
    edges: Counter = field(default_factory=Counter)
    warnings: int = 0

    def add(self, caller: MethodSig, callee: MethodSig, count: int = 1) -> None:
        self.edges[(caller, callee)] += count

    @property
    def nodes(self) -> set[MethodSig]:
        out: set[MethodSig] = set()
        for caller, callee in self.edges:
            out.add(caller)
            out.add(callee)
        return out

    @property
    def total(self) -> int:
        return sum(self.edges.values())
