from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from src.droidchain.errors import ConfigError, DimensionMismatch, RaggedMatrix, SingleClassTraining
from src.droidchain.forest.tree import (
    MALWARE,
    TreeBuilder,
    TreeNode,
    default_max_features,
    leaf_for,
)
from src.droidchain.ingest.manifest import SampleLabel

LOG = logging.getLogger(__name__)

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RandomForestModel:
    n_trees: int
    max_depth: int
    seed: int
    n_features: int
    max_features: int
    bootstrap: bool
    trees: tuple[TreeNode, ...]
    importances: np.ndarray


@dataclass(frozen=True)
class Vote:
    label: SampleLabel
    score: float
    malware_votes: int


def as_matrix(X) -> np.ndarray:
    if isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise RaggedMatrix(f"feature matrix must be 2-D, got shape {X.shape}")
        return X.astype(np.float64, copy=False)
    rows = [list(row) for row in X]
    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise RaggedMatrix(f"rows have different lengths: {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), widths.pop() if widths else 0)


def as_targets(y) -> np.ndarray:
    out = []
    for item in y:
        if isinstance(item, SampleLabel):
            out.append(MALWARE if item.positive else 0)
        elif isinstance(item, str):
            out.append(MALWARE if SampleLabel(item.strip().lower()).positive else 0)
        else:
            out.append(MALWARE if int(item) else 0)
    return np.asarray(out, dtype=np.int64)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Counter-style stream per (seed, tree) so parallel training stays schedule-independent."""
    return np.random.default_rng([seed & _U64, tree_index])


def bootstrap_indices(seed: int, tree_index: int, n: int) -> np.ndarray:
    return tree_rng(seed, tree_index).integers(0, n, size=n)


def oob_indices(seed: int, tree_index: int, n: int) -> np.ndarray:
    drawn = np.zeros(n, dtype=bool)
    drawn[bootstrap_indices(seed, tree_index, n)] = True
    return np.flatnonzero(~drawn)


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    seed: int,
    tree_index: int,
    max_depth: int,
    max_features: int,
    bootstrap: bool,
) -> tuple[TreeNode, np.ndarray]:
    rng = tree_rng(seed, tree_index)
    n = X.shape[0]
    rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
    builder = TreeBuilder(X=X, y=y, max_depth=max_depth, max_features=max_features, rng=rng)
    root = builder.build(rows)
    imp = builder.importances
    total = imp.sum()
    return root, (imp / total if total > 0 else imp)


def train(
    X,
    y,
    n_trees: int,
    max_depth: int,
    seed: int,
    *,
    bootstrap: bool = True,
    max_features: Optional[int] = None,
    jobs: int = 1,
) -> RandomForestModel:
    if n_trees < 1:
        raise ConfigError(f"n_trees must be >= 1, got {n_trees}")
    if max_depth < 1:
        raise ConfigError(f"max_depth must be >= 1, got {max_depth}")
    if max_features is not None and max_features < 1:
        raise ConfigError(f"max_features must be >= 1, got {max_features}")
    matrix = as_matrix(X)
    targets = as_targets(y)
    if matrix.shape[0] != targets.shape[0]:
        raise DimensionMismatch(f"{matrix.shape[0]} rows but {targets.shape[0]} labels")
    if matrix.shape[0] < 2 or len(set(targets.tolist())) < 2:
        raise SingleClassTraining("training needs at least two samples covering both classes")
    d = matrix.shape[1]
    m = max_features or default_max_features(d)

    grown = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(_grow_tree)(
            matrix,
            targets,
            seed=seed,
            tree_index=t,
            max_depth=max_depth,
            max_features=m,
            bootstrap=bootstrap,
        )
        for t in range(n_trees)
    )
    trees = tuple(root for root, _ in grown)
    importances = np.mean([imp for _, imp in grown], axis=0) if grown else np.zeros(d)
    total = importances.sum()
    if total > 0:
        importances = importances / total
    LOG.debug("Forest trained trees=%s depth=%s features=%s max_features=%s", n_trees, max_depth, d, m)
    return RandomForestModel(
        n_trees=n_trees,
        max_depth=max_depth,
        seed=seed,
        n_features=d,
        max_features=m,
        bootstrap=bootstrap,
        trees=trees,
        importances=importances,
    )


def predict(model: RandomForestModel, x: Sequence[float]) -> Vote:
    vec = np.asarray(x, dtype=np.float64).reshape(-1)
    if vec.shape[0] != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {vec.shape[0]}")
    if not model.trees:
        raise ConfigError("forest has no trees")
    votes = sum(1 for tree in model.trees if leaf_for(tree, vec).vote == MALWARE)
    # strict majority; an exact tie stays benign
    label = SampleLabel.MALWARE if 2 * votes > len(model.trees) else SampleLabel.BENIGN
    return Vote(label=label, score=votes / len(model.trees), malware_votes=votes)


def predict_many(model: RandomForestModel, X) -> list[Vote]:
    matrix = as_matrix(X)
    return [predict(model, row) for row in matrix]


def importance_ranking(model: RandomForestModel) -> list[int]:
    """Feature indices by descending importance, ties by ascending index."""
    imp = model.importances
    return sorted(range(imp.shape[0]), key=lambda i: (-float(imp[i]), i))
