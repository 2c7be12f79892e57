from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np
from sklearn.model_selection import StratifiedKFold

from src.droidchain.errors import ConfigError, DimensionMismatch, TooFewSamples
from src.droidchain.forest.ensemble import as_matrix, as_targets, predict, train
from src.droidchain.forest.metrics import MetricsReport, Prediction, metrics_from_predictions
from src.droidchain.ingest.manifest import SampleLabel

LOG = logging.getLogger(__name__)

_U64 = (1 << 64) - 1
_U32 = (1 << 32) - 1
_FOLD_STREAM = 0x5F01D


def derive_seed(seed: int, *stream: int) -> int:
    return int(np.random.SeedSequence([seed & _U64, *stream]).generate_state(1, dtype=np.uint64)[0])


def stratified_folds(y, k: int, seed: int) -> list[np.ndarray]:
    """Test indices of each of the k folds; per-class counts differ by at most one across folds."""
    targets = as_targets(y)
    if k < 2:
        raise ConfigError(f"k_folds must be >= 2, got {k}")
    smallest = min(int((targets == cls).sum()) for cls in (0, 1))
    if smallest < k:
        raise TooFewSamples(f"each class needs at least k={k} samples, smallest class has {smallest}")
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=derive_seed(seed, _FOLD_STREAM) & _U32)
    placeholder = np.zeros((targets.shape[0], 1))
    return [np.sort(test_idx).astype(np.int64) for _, test_idx in splitter.split(placeholder, targets)]


def cross_validate(
    X,
    y,
    k: int = 10,
    seed: int = 42,
    n_trees: int = 51,
    max_depth: int = 8,
    *,
    app_ids: Optional[Sequence[str]] = None,
    jobs: int = 1,
) -> MetricsReport:
    matrix = as_matrix(X)
    targets = as_targets(y)
    if matrix.shape[0] != targets.shape[0]:
        raise DimensionMismatch(f"{matrix.shape[0]} rows but {targets.shape[0]} labels")
    ids = list(app_ids) if app_ids is not None else [str(i) for i in range(matrix.shape[0])]
    if len(ids) != matrix.shape[0]:
        raise DimensionMismatch(f"{len(ids)} app ids for {matrix.shape[0]} rows")
    n_benign = int((targets == 0).sum())
    n_malware = int((targets == 1).sum())
    if min(n_benign, n_malware) < k:
        raise TooFewSamples(f"each class needs at least k={k} samples, got benign={n_benign} malware={n_malware}")

    folds = stratified_folds(targets, k, seed)
    predictions: list[Prediction] = []
    per_fold: list[MetricsReport] = []
    for fold_no, test_idx in enumerate(folds):
        train_mask = np.ones(matrix.shape[0], dtype=bool)
        train_mask[test_idx] = False
        model = train(
            matrix[train_mask],
            targets[train_mask],
            n_trees=n_trees,
            max_depth=max_depth,
            seed=derive_seed(seed, fold_no),
            jobs=jobs,
        )
        fold_preds = []
        for i in test_idx:
            vote = predict(model, matrix[i])
            fold_preds.append(
                Prediction(
                    app_id=ids[i],
                    true_label=SampleLabel.MALWARE if targets[i] else SampleLabel.BENIGN,
                    predicted_label=vote.label,
                    score=vote.score,
                    fold=fold_no,
                )
            )
        fold_report = metrics_from_predictions(fold_preds)
        LOG.info("Fold done fold=%s size=%s f_measure=%.4f", fold_no, len(fold_preds), fold_report.f_measure)
        per_fold.append(fold_report)
        predictions.extend(fold_preds)

    order = {app_id: i for i, app_id in enumerate(ids)}
    predictions.sort(key=lambda p: order[p.app_id])
    report = metrics_from_predictions(predictions)
    report.per_fold = per_fold
    return report
