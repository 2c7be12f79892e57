from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.droidchain.abstraction.abstractor import AbstractedGraph
from src.droidchain.abstraction.labels import Label
from src.droidchain.errors import UnknownState


@dataclass(frozen=True)
class MarkovChain:
    states: tuple[Label, ...]
    P: np.ndarray
    app_id: str = ""


@dataclass(frozen=True)
class FeatureVector:
    app_id: str
    values: np.ndarray

    def __len__(self) -> int:
        return int(self.values.shape[0])


def to_markov(g: AbstractedGraph, space: Sequence[Label]) -> MarkovChain:
    """Row-normalized transition counts; unobserved source rows stay zero."""
    states = tuple(space)
    index = {label: i for i, label in enumerate(states)}
    counts = np.zeros((len(states), len(states)), dtype=np.float64)
    for (src, dst), count in g.edges.items():
        i = index.get(src)
        if i is None:
            raise UnknownState(src)
        j = index.get(dst)
        if j is None:
            raise UnknownState(dst)
        counts[i, j] += count
    totals = counts.sum(axis=1, keepdims=True)
    P = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    return MarkovChain(states=states, P=P, app_id=g.app_id)


def features(mc: MarkovChain) -> FeatureVector:
    """Row-major flattening; the same state order gives aligned columns corpus-wide."""
    return FeatureVector(app_id=mc.app_id, values=mc.P.reshape(-1).copy())


def feature_names(space: Sequence[Label]) -> list[str]:
    return [f"{src.name}>{dst.name}" for src in space for dst in space]
