from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass, field

from src.droidchain.abstraction.labels import (
    FAMILY_LABELS,
    OBFUSCATED,
    SELF_DEFINED,
    AbstractionMode,
    Label,
    LabelKind,
    family_of,
)
from src.droidchain.abstraction.packages import PackageList
from src.droidchain.ingest.graph import CallGraph, Origin
from src.droidchain.ingest.signatures import MethodSig


@dataclass
class AbstractedGraph:
    app_id: str
    origin: Origin
    mode: AbstractionMode
    edges: Counter = field(default_factory=Counter)

    @property
    def states(self) -> set[Label]:
        out: set[Label] = set()
        for src, dst in self.edges:
            out.add(src)
            out.add(dst)
        return out

    @property
    def total(self) -> int:
        return sum(self.edges.values())


def is_obfuscated(class_fqn: str, max_median: float = 2.0) -> bool:
    """Machine-mangled names: median dot-segment length at or below ``max_median``."""
    lengths = [len(part) for part in class_fqn.split(".")]
    return statistics.median(lengths) <= max_median


def abstract_call(sig: MethodSig, mode: AbstractionMode, pkgs: PackageList) -> Label:
    matched = pkgs.match(sig.class_fqn)
    if matched is not None:
        if mode is AbstractionMode.PACKAGE:
            return Label(matched, LabelKind.PACKAGE)
        family = family_of(matched)
        if family is not None:
            return family
    if is_obfuscated(sig.class_fqn, pkgs.obfuscation_max_median):
        return OBFUSCATED
    return SELF_DEFINED


def abstract_graph(g: CallGraph, mode: AbstractionMode, pkgs: PackageList) -> AbstractedGraph:
    mode = AbstractionMode.parse(mode)
    cache: dict[MethodSig, Label] = {}

    def label(sig: MethodSig) -> Label:
        hit = cache.get(sig)
        if hit is None:
            hit = cache[sig] = abstract_call(sig, mode, pkgs)
        return hit

    out = AbstractedGraph(app_id=g.app_id, origin=g.origin, mode=mode)
    for (caller, callee), count in g.edges.items():
        out.edges[(label(caller), label(callee))] += count
    return out


def state_space(mode: AbstractionMode, pkgs: PackageList) -> list[Label]:
    mode = AbstractionMode.parse(mode)
    if mode is AbstractionMode.FAMILY:
        return [*FAMILY_LABELS, OBFUSCATED, SELF_DEFINED]
    return [*(Label(entry, LabelKind.PACKAGE) for entry in pkgs.lexicographic()), OBFUSCATED, SELF_DEFINED]
