from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from src.droidchain.errors import DuplicateAppId, IOFailure, SchemaMismatch, UnknownLabel
from src.droidchain.ingest.manifest import SampleLabel

LOG = logging.getLogger(__name__)

ID_COLUMNS = ["app_id", "label"]
FLOAT_FORMAT = "%.12g"


@dataclass
class FeatureMatrix:
    """One row per app, columns named ``src>dst`` in row-major state order."""

    columns: list[str]
    app_ids: list[str] = field(default_factory=list)
    labels: list[SampleLabel] = field(default_factory=list)
    X: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __len__(self) -> int:
        return len(self.app_ids)

    @property
    def targets(self) -> np.ndarray:
        return np.asarray([1 if label.positive else 0 for label in self.labels], dtype=np.int64)

    def vectors(self) -> dict[str, np.ndarray]:
        return {app_id: self.X[i] for i, app_id in enumerate(self.app_ids)}

    def counts(self) -> dict[str, int]:
        out = {label.value: 0 for label in SampleLabel}
        for label in self.labels:
            out[label.value] += 1
        return out


def build_matrix(columns: list[str], rows: list[tuple[str, SampleLabel, np.ndarray]]) -> FeatureMatrix:
    width = len(columns)
    X = np.zeros((len(rows), width), dtype=np.float64)
    for i, (_, _, values) in enumerate(rows):
        X[i] = values
    return FeatureMatrix(
        columns=list(columns),
        app_ids=[app_id for app_id, _, _ in rows],
        labels=[label for _, label, _ in rows],
        X=X,
    )


def write_feature_csv(fm: FeatureMatrix, path: Path | str) -> Path:
    p = Path(path)
    frame = pd.DataFrame(fm.X, columns=fm.columns)
    frame.insert(0, "label", [label.value for label in fm.labels])
    frame.insert(0, "app_id", fm.app_ids)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(p, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise IOFailure(f"cannot write feature CSV {p}: {exc}") from exc
    LOG.info("Features written rows=%s columns=%s path=%s", len(fm), len(fm.columns), p)
    return p


def read_feature_csv(path: Path | str) -> FeatureMatrix:
    p = Path(path)
    if not p.exists():
        raise IOFailure(f"feature CSV not found: {p}")
    try:
        frame = pd.read_csv(p, dtype={"app_id": str, "label": str}, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaMismatch(f"cannot parse feature CSV {p}: {exc}") from exc
    if list(frame.columns[:2]) != ID_COLUMNS:
        raise SchemaMismatch(f"feature CSV {p} must start with columns {ID_COLUMNS}")
    columns = [str(c) for c in frame.columns[2:]]
    bad = [c for c in columns if ">" not in c]
    if bad:
        raise SchemaMismatch(f"feature CSV {p} has non-transition columns: {bad[:5]}")

    app_ids = [str(a) for a in frame["app_id"]]
    seen: set[str] = set()
    for app_id in app_ids:
        if app_id in seen:
            raise DuplicateAppId(app_id)
        seen.add(app_id)
    labels: list[SampleLabel] = []
    for app_id, raw in zip(app_ids, frame["label"]):
        try:
            labels.append(SampleLabel(str(raw).strip().lower()))
        except ValueError as exc:
            raise UnknownLabel(str(raw), app_id) from exc
    try:
        X = frame[columns].to_numpy(dtype=np.float64)
    except ValueError as exc:
        raise SchemaMismatch(f"feature CSV {p} has non-numeric values: {exc}") from exc
    return FeatureMatrix(columns=columns, app_ids=app_ids, labels=labels, X=X.reshape(len(app_ids), len(columns)))
