from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from src.droidchain.ingest.manifest import SampleLabel

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Prediction:
    app_id: str
    true_label: SampleLabel
    predicted_label: SampleLabel
    score: float
    fold: Optional[int] = None

    @property
    def outcome(self) -> str:
        """TP / FP / TN / FN with malware as the positive class."""
        if self.predicted_label.positive:
            return "TP" if self.true_label.positive else "FP"
        return "FN" if self.true_label.positive else "TN"

    def to_dict(self) -> dict[str, Any]:
        return {
            "app_id": self.app_id,
            "true_label": self.true_label.value,
            "predicted_label": self.predicted_label.value,
            "score": self.score,
            "fold": self.fold,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Prediction":
        return cls(
            app_id=str(raw["app_id"]),
            true_label=SampleLabel(raw["true_label"]),
            predicted_label=SampleLabel(raw["predicted_label"]),
            score=float(raw["score"]),
            fold=raw.get("fold"),
        )


@dataclass
class MetricsReport:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f_measure: float
    undefined: list[str] = field(default_factory=list)
    per_sample: list[Prediction] = field(default_factory=list)
    per_fold: list["MetricsReport"] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.undefined)

    def to_dict(self, include_samples: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "undefined": list(self.undefined),
        }
        if include_samples:
            out["per_sample"] = [p.to_dict() for p in self.per_sample]
            out["per_fold"] = [fold.to_dict(include_samples=False) for fold in self.per_fold]
        return out


def metrics(tp: int, fp: int, tn: int, fn: int) -> MetricsReport:
    """Precision/recall/F-measure; undefined ratios are 0 and named in ``undefined``."""
    if min(tp, fp, tn, fn) < 0:
        raise ValueError("confusion counts must be non-negative")
    undefined: list[str] = []
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        undefined.append("precision")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        undefined.append("recall")
    if precision + recall > 0:
        f_measure = 2 * precision * recall / (precision + recall)
    else:
        f_measure = 0.0
        undefined.append("f_measure")
    return MetricsReport(
        tp=tp, fp=fp, tn=tn, fn=fn,
        precision=precision, recall=recall, f_measure=f_measure,
        undefined=undefined,
    )


def metrics_from_predictions(predictions: Iterable[Prediction]) -> MetricsReport:
    preds = list(predictions)
    counts = {"TP": 0, "FP": 0, "TN": 0, "FN": 0}
    for p in preds:
        counts[p.outcome] += 1
    report = metrics(counts["TP"], counts["FP"], counts["TN"], counts["FN"])
    report.per_sample = preds
    return report
