from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from src.droidchain.errors import KTooLarge, MissingVector
from src.droidchain.forest.metrics import Prediction


class Group(str, Enum):
    TP = "TP"
    FP = "FP"
    TN = "TN"
    FN = "FN"


@dataclass
class PresenceStats:
    group: Group
    per_app_counts: list[int] = field(default_factory=list)
    mean: float = 0.0
    stddev: float = 0.0
    cdf: list[tuple[int, float]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.per_app_counts

    def to_dict(self) -> dict:
        return {
            "group": self.group.value,
            "n": len(self.per_app_counts),
            "empty": self.empty,
            "mean": self.mean,
            "stddev": self.stddev,
            "per_app_counts": list(self.per_app_counts),
            "cdf": [[x, f] for x, f in self.cdf],
        }


def top_k_presence(values: Sequence[float] | np.ndarray, ranking: Sequence[int], k: int = 100) -> int:
    """How many of the k most important features are strictly positive in ``values``."""
    vec = np.asarray(values, dtype=np.float64).reshape(-1)
    if k > vec.shape[0] or k > len(ranking):
        raise KTooLarge(f"k={k} exceeds {min(vec.shape[0], len(ranking))} features")
    top = np.asarray(list(ranking[:k]), dtype=np.int64)
    return int((vec[top] > 0).sum())


def empirical_cdf(values: Iterable[float]) -> list[tuple[float, float]]:
    """``(x, F(x))`` at each distinct observed value."""
    data = np.sort(np.asarray(list(values), dtype=np.float64))
    if data.size == 0:
        return []
    xs, counts = np.unique(data, return_counts=True)
    cum = np.cumsum(counts) / data.size
    return [(float(x), float(f)) for x, f in zip(xs, cum)]


def integer_cdf(counts: Sequence[int], k: int) -> list[tuple[int, float]]:
    """Step CDF evaluated at every integer 0..k."""
    if not counts:
        return []
    arr = np.asarray(counts, dtype=np.int64)
    return [(x, float((arr <= x).sum()) / arr.size) for x in range(k + 1)]


def presence_stats(group: Group, counts: Sequence[int], k: int) -> PresenceStats:
    if not counts:
        return PresenceStats(group=group)
    arr = np.asarray(counts, dtype=np.float64)
    return PresenceStats(
        group=group,
        per_app_counts=list(counts),
        mean=float(arr.mean()),
        stddev=float(arr.std(ddof=0)),
        cdf=integer_cdf(counts, k),
    )


def misclassification_report(
    predictions: Iterable[Prediction],
    vectors: Mapping[str, Sequence[float] | np.ndarray],
    ranking: Sequence[int],
    k: int = 100,
) -> dict[Group, PresenceStats]:
    grouped: dict[Group, list[int]] = {g: [] for g in Group}
    for pred in predictions:
        vec = vectors.get(pred.app_id)
        if vec is None:
            raise MissingVector(pred.app_id)
        grouped[Group(pred.outcome)].append(top_k_presence(vec, ranking, k))
    return {g: presence_stats(g, counts, k) for g, counts in grouped.items()}


@dataclass
class OverlapReport:
    runs: list[str]
    false_positives: dict[str, list[str]]
    false_negatives: dict[str, list[str]]
    common_false_positives: list[str]
    common_false_negatives: list[str]
    # (wrong_run, right_run) -> apps misclassified in the first, correct in the second
    fixed_by: dict[tuple[str, str], list[str]]

    def to_dict(self) -> dict:
        return {
            "runs": list(self.runs),
            "false_positives": {k: list(v) for k, v in self.false_positives.items()},
            "false_negatives": {k: list(v) for k, v in self.false_negatives.items()},
            "common_false_positives": list(self.common_false_positives),
            "common_false_negatives": list(self.common_false_negatives),
            "fixed_by": [
                {"misclassified_in": wrong, "correct_in": right, "app_ids": list(ids)}
                for (wrong, right), ids in sorted(self.fixed_by.items())
            ],
        }


def misclassification_overlap(runs: Mapping[str, Iterable[Prediction]]) -> OverlapReport:
    """FP/FN sets per run and how they intersect, on apps classified by every run."""
    by_run = {name: {p.app_id: p for p in preds} for name, preds in runs.items()}
    names = list(by_run)
    shared: Optional[set[str]] = None
    for preds in by_run.values():
        shared = set(preds) if shared is None else shared & set(preds)
    shared = shared or set()

    def wrong(name: str, outcome: str) -> set[str]:
        return {app for app in shared if by_run[name][app].outcome == outcome}

    fps = {name: wrong(name, "FP") for name in names}
    fns = {name: wrong(name, "FN") for name in names}
    fixed: dict[tuple[str, str], list[str]] = {}
    for a in names:
        for b in names:
            if a == b:
                continue
            moved = (fps[a] | fns[a]) - (fps[b] | fns[b])
            fixed[(a, b)] = sorted(moved)
    return OverlapReport(
        runs=names,
        false_positives={n: sorted(v) for n, v in fps.items()},
        false_negatives={n: sorted(v) for n, v in fns.items()},
        common_false_positives=sorted(set.intersection(*fps.values())) if fps else [],
        common_false_negatives=sorted(set.intersection(*fns.values())) if fns else [],
        fixed_by=fixed,
    )
