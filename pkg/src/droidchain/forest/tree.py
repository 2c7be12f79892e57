from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

BENIGN, MALWARE = 0, 1


@dataclass
class TreeNode:
    """Split node when ``feature`` is set, leaf otherwise. ``counts`` = [benign, malware]."""

    counts: tuple[int, int]
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def vote(self) -> int:
        benign, malware = self.counts
        return MALWARE if malware > benign else BENIGN


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    child_impurity: float


def gini(n_malware: int, n: int) -> float:
    if n == 0:
        return 0.0
    p = n_malware / n
    return 2.0 * p * (1.0 - p)


def split_scores(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weighted child Gini for every midpoint threshold of one feature column.

    Returns ``(scores, thresholds, valid)`` aligned with the sorted positions
    ``0..n-2``; ``valid`` is False where consecutive sorted values are equal.
    """
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ys = y[order]
    n = xs.shape[0]
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    m_left = np.cumsum(ys)[:-1].astype(np.float64)
    m_right = float(ys.sum()) - m_left
    p_left = m_left / n_left
    p_right = m_right / n_right
    scores = (n_left * 2.0 * p_left * (1.0 - p_left) + n_right * 2.0 * p_right * (1.0 - p_right)) / n
    lo = xs[:-1]
    hi = xs[1:]
    thresholds = (lo + hi) / 2.0
    # midpoint of adjacent floats can round up onto the upper value
    thresholds = np.where(thresholds >= hi, lo, thresholds)
    return scores, thresholds, lo < hi


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    candidates: np.ndarray,
    max_features: int,
) -> Optional[Split]:
    """Score the first ``max_features`` drawn ``candidates``, constant ones included.

    When none of those splits the node, keep walking ``candidates`` until one does.
    """
    best: Optional[Split] = None
    yn = y[rows]
    batch = max(max_features, 64)
    for start in range(0, candidates.shape[0], batch):
        chunk = candidates[start:start + batch]
        if start < max_features:
            drawn = max_features - start
        elif best is not None:
            return best
        else:
            drawn = 0
        sub = X[np.ix_(rows, chunk)]
        varies = sub.max(axis=0) > sub.min(axis=0)
        for pos, f in enumerate(chunk):
            if pos >= drawn and best is not None:
                return best
            if not varies[pos]:
                continue
            scores, thresholds, valid = split_scores(X[rows, f], yn)
            masked = np.where(valid, scores, np.inf)
            i = int(np.argmin(masked))
            if best is None or masked[i] < best.child_impurity:
                best = Split(feature=int(f), threshold=float(thresholds[i]), child_impurity=float(masked[i]))
    return best


@dataclass
class TreeBuilder:
    X: np.ndarray
    y: np.ndarray
    max_depth: int
    max_features: int
    rng: np.random.Generator
    importances: np.ndarray = field(init=False)
    n_root: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.importances = np.zeros(self.X.shape[1], dtype=np.float64)

    def build(self, rows: np.ndarray) -> TreeNode:
        self.n_root = rows.shape[0]
        return self._grow(rows, depth=0)

    def _grow(self, rows: np.ndarray, depth: int) -> TreeNode:
        n = int(rows.shape[0])
        n_malware = int(self.y[rows].sum())
        node = TreeNode(counts=(n - n_malware, n_malware))
        impurity = gini(n_malware, n)
        if depth >= self.max_depth or n < 2 or impurity == 0.0:
            return node
        candidates = self.rng.permutation(self.X.shape[1])
        split = best_split(self.X, self.y, rows, candidates, self.max_features)
        if split is None:
            return node
        go_left = self.X[rows, split.feature] <= split.threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        self.importances[split.feature] += (n / self.n_root) * max(impurity - split.child_impurity, 0.0)
        node.feature = split.feature
        node.threshold = split.threshold
        node.left = self._grow(left_rows, depth + 1)
        node.right = self._grow(right_rows, depth + 1)
        return node


def default_max_features(n_features: int) -> int:
    return max(1, math.ceil(math.sqrt(n_features)))


def leaf_for(node: TreeNode, x: np.ndarray) -> TreeNode:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node


def tree_depth(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def split_features(node: TreeNode) -> list[int]:
    if node.is_leaf:
        return []
    return [node.feature, *split_features(node.left), *split_features(node.right)]
