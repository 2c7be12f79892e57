from __future__ import annotations

from collections import Counter
from typing import Sequence, TypeVar, Union

from src.droidchain.abstraction.abstractor import AbstractedGraph
from src.droidchain.errors import AppIdMismatch, MixedNamespace, ModeMismatch
from src.droidchain.ingest.graph import CallGraph, Origin

G = TypeVar("G", CallGraph, AbstractedGraph)
AnyGraph = Union[CallGraph, AbstractedGraph]


def _common_origin(graphs: Sequence[AnyGraph]) -> Origin:
    origins = {g.origin for g in graphs}
    return origins.pop() if len(origins) == 1 else Origin.HYBRID


def aggregate(graphs: Sequence[G]) -> G:
    """Pointwise sum of edge maps (multipliers of repeated runs add up)."""
    if not graphs:
        raise ValueError("aggregate needs at least one graph")
    kinds = {type(g) for g in graphs}
    if len(kinds) != 1:
        raise MixedNamespace("cannot aggregate raw and abstracted graphs together")
    app_ids = {g.app_id for g in graphs}
    if len(app_ids) != 1:
        raise AppIdMismatch(f"graphs belong to different apps: {sorted(app_ids)}")

    edges: Counter = Counter()
    for g in graphs:
        edges.update(g.edges)
    first = graphs[0]
    origin = _common_origin(graphs)
    if isinstance(first, AbstractedGraph):
        modes = {g.mode for g in graphs}
        if len(modes) != 1:
            raise MixedNamespace(f"graphs abstracted under different modes: {sorted(m.value for m in modes)}")
        return AbstractedGraph(app_id=first.app_id, origin=origin, mode=first.mode, edges=edges)
    return CallGraph(
        app_id=first.app_id,
        origin=origin,
        edges=edges,
        warnings=sum(g.warnings for g in graphs),
    )


def merge_hybrid(static_g: AbstractedGraph, dynamic_g: AbstractedGraph) -> AbstractedGraph:
    if static_g.mode != dynamic_g.mode:
        raise ModeMismatch(f"static mode={static_g.mode.value} dynamic mode={dynamic_g.mode.value}")
    if static_g.app_id != dynamic_g.app_id:
        raise AppIdMismatch(f"static app_id={static_g.app_id} dynamic app_id={dynamic_g.app_id}")
    if static_g.origin is not Origin.STATIC or dynamic_g.origin is not Origin.DYNAMIC:
        raise ModeMismatch(
            f"merge_hybrid expects static+dynamic graphs, got {static_g.origin.value}+{dynamic_g.origin.value}"
        )
    edges: Counter = Counter(static_g.edges)
    edges.update(dynamic_g.edges)
    return AbstractedGraph(app_id=static_g.app_id, origin=Origin.HYBRID, mode=static_g.mode, edges=edges)
