from __future__ import annotations

import argparse
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import pandas as pd

from src.droidchain.abstraction.labels import FAMILY_LABELS, AbstractionMode
from src.droidchain.chain.feature_matrix import FLOAT_FORMAT, FeatureMatrix, read_feature_csv
from src.droidchain.config import LOG_LEVEL, RunConfig
from src.droidchain.errors import IOFailure, ModeMismatch, SchemaMismatch
from src.droidchain.forest.ensemble import RandomForestModel, importance_ranking, train
from src.droidchain.forest.metrics import SCHEMA_VERSION, MetricsReport
from src.droidchain.forest.model_io import dump_json, dump_model
from src.droidchain.forest.validation import cross_validate
from src.droidchain.jobs.options import add_run_options, config_from_args, guarded
from src.droidchain.logging import setup

LOG = logging.getLogger(__name__)

METRICS_JSON = "metrics.json"
MODEL_JSON = "model.json"
RANKING_CSV = "ranking.csv"
PREDICTIONS_CSV = "predictions.csv"


@dataclass
class CvRun:
    report: MetricsReport
    model: RandomForestModel
    ranking: list[int]
    out_dir: Path


def check_columns(fm: FeatureMatrix, cfg: RunConfig) -> None:
    """Feature count must be a square state space; family mode fixes its size."""
    n = len(fm.columns)
    side = math.isqrt(n)
    if side * side != n:
        raise SchemaMismatch(f"{n} feature columns do not form a square state space")
    family_side = len(FAMILY_LABELS) + 2
    if cfg.mode is AbstractionMode.FAMILY and side != family_side:
        raise ModeMismatch(f"family mode expects {family_side} states, the features have {side}")


def run_info(cfg: RunConfig, fm: FeatureMatrix) -> dict[str, Any]:
    return {
        "analysis": cfg.analysis.value,
        "mode": cfg.mode.value,
        "stimulator": cfg.stimulator,
        "seed": cfg.seed,
        "n_trees": cfg.n_trees,
        "max_depth": cfg.max_depth,
        "k_folds": cfg.k_folds,
        "n_samples": len(fm),
        "n_features": len(fm.columns),
        "class_counts": fm.counts(),
    }


def run_cv(features_path: Path | str, cfg: RunConfig, out_dir: Path | str) -> CvRun:
    out = Path(out_dir)
    fm = read_feature_csv(features_path)
    check_columns(fm, cfg)
    LOG.info(
        "Cross-validating samples=%s features=%s k=%s trees=%s depth=%s seed=%s",
        len(fm), len(fm.columns), cfg.k_folds, cfg.n_trees, cfg.max_depth, cfg.seed,
    )
    report = cross_validate(
        fm.X,
        fm.targets,
        k=cfg.k_folds,
        seed=cfg.seed,
        n_trees=cfg.n_trees,
        max_depth=cfg.max_depth,
        app_ids=fm.app_ids,
        jobs=cfg.jobs,
    )
    model = train(fm.X, fm.targets, n_trees=cfg.n_trees, max_depth=cfg.max_depth, seed=cfg.seed, jobs=cfg.jobs)
    ranking = importance_ranking(model)
    info = run_info(cfg, fm)

    dump_json({"schema_version": SCHEMA_VERSION, "run": info, "metrics": report.to_dict()}, out / METRICS_JSON)
    dump_model(model, out / MODEL_JSON, extra={**info, "columns": fm.columns})
    ranking_frame = pd.DataFrame(
        {
            "rank": range(1, len(ranking) + 1),
            "feature_index": ranking,
            "feature": [fm.columns[i] for i in ranking],
            "importance": [float(model.importances[i]) for i in ranking],
        }
    )
    predictions = pd.DataFrame(
        [{**p.to_dict(), "outcome": p.outcome} for p in report.per_sample],
        columns=["app_id", "true_label", "predicted_label", "score", "fold", "outcome"],
    )
    try:
        ranking_frame.to_csv(out / RANKING_CSV, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        predictions.to_csv(out / PREDICTIONS_CSV, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise IOFailure(f"cannot write CV outputs under {out}: {exc}") from exc

    LOG.info(
        "CV done tp=%s fp=%s tn=%s fn=%s precision=%.4f recall=%.4f f_measure=%.4f",
        report.tp, report.fp, report.tn, report.fn, report.precision, report.recall, report.f_measure,
    )
    if report.flagged:
        LOG.warning("Undefined metrics reported as 0: %s", report.undefined)
    return CvRun(report=report, model=model, ranking=ranking, out_dir=out)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("features", type=Path, help="features.csv from the features step")
    parser.add_argument("--out-dir", type=Path, required=True)
    add_run_options(parser)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Stratified k-fold Random Forest evaluation")
    add_arguments(parser)
    return parser


def run_from_args(args: argparse.Namespace) -> CvRun:
    return run_cv(args.features, config_from_args(args), args.out_dir)


def main(argv: Optional[list[str]] = None) -> int:
    setup(LOG_LEVEL)
    args = build_arg_parser().parse_args(argv)
    return guarded(lambda: run_from_args(args))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
