from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from src.droidchain.errors import IOFailure, SchemaMismatch
from src.droidchain.forest.ensemble import RandomForestModel
from src.droidchain.forest.metrics import SCHEMA_VERSION, Prediction
from src.droidchain.forest.tree import TreeNode


def _node_to_dict(node: TreeNode) -> dict[str, Any]:
    out: dict[str, Any] = {"counts": list(node.counts)}
    if not node.is_leaf:
        out["feature"] = node.feature
        out["threshold"] = node.threshold
        out["left"] = _node_to_dict(node.left)
        out["right"] = _node_to_dict(node.right)
    return out


def _node_from_dict(raw: dict[str, Any]) -> TreeNode:
    counts = tuple(int(c) for c in raw["counts"])
    node = TreeNode(counts=(counts[0], counts[1]))
    if "feature" in raw:
        node.feature = int(raw["feature"])
        node.threshold = float(raw["threshold"])
        node.left = _node_from_dict(raw["left"])
        node.right = _node_from_dict(raw["right"])
    return node


def model_to_dict(model: RandomForestModel, extra: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "n_trees": model.n_trees,
            "max_depth": model.max_depth,
            "seed": model.seed,
            "n_features": model.n_features,
            "max_features": model.max_features,
            "bootstrap": model.bootstrap,
        },
        "run": extra or {},
        "importances": [float(v) for v in model.importances],
        "trees": [_node_to_dict(tree) for tree in model.trees],
    }


def model_from_dict(payload: dict[str, Any]) -> RandomForestModel:
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"model schema_version={payload.get('schema_version')} expected={SCHEMA_VERSION}")
    try:
        cfg = payload["config"]
        return RandomForestModel(
            n_trees=int(cfg["n_trees"]),
            max_depth=int(cfg["max_depth"]),
            seed=int(cfg["seed"]),
            n_features=int(cfg["n_features"]),
            max_features=int(cfg["max_features"]),
            bootstrap=bool(cfg["bootstrap"]),
            trees=tuple(_node_from_dict(t) for t in payload["trees"]),
            importances=np.asarray(payload["importances"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"malformed model document: {exc}") from exc


def dump_json(payload: dict[str, Any], path: Path | str) -> Path:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {p}: {exc}") from exc
    return p


def load_json(path: Path | str) -> dict[str, Any]:
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise IOFailure(f"file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{p} is not valid JSON: {exc}") from exc


def dump_model(model: RandomForestModel, path: Path | str, extra: dict[str, Any] | None = None) -> Path:
    return dump_json(model_to_dict(model, extra), path)


def load_model(path: Path | str) -> RandomForestModel:
    return model_from_dict(load_json(path))


def load_metrics(path: Path | str) -> dict[str, Any]:
    """Metrics JSON written by the cv step, schema-checked."""
    payload = load_json(path)
    if not isinstance(payload, dict) or payload.get("schema_version") != SCHEMA_VERSION:
        found = payload.get("schema_version") if isinstance(payload, dict) else None
        raise SchemaMismatch(f"{path}: metrics schema_version={found} expected={SCHEMA_VERSION}")
    if "metrics" not in payload or "run" not in payload:
        raise SchemaMismatch(f"{path}: metrics file lacks 'run' or 'metrics'")
    return payload


def predictions_from_metrics(payload: dict[str, Any]) -> list[Prediction]:
    try:
        return [Prediction.from_dict(raw) for raw in payload["metrics"].get("per_sample", [])]
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaMismatch(f"malformed per-sample predictions: {exc}") from exc
