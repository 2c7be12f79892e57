from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.droidchain.abstraction.packages import PackageList
from src.droidchain.analysis.coverage import (
    CoverageReport,
    code_coverage,
    common_dynamic_only,
    dynamic_load_ratio,
    infer_app_packages,
    mean_and_pooled,
)
from src.droidchain.analysis.presence import Group, PresenceStats, empirical_cdf, misclassification_report
from src.droidchain.chain.feature_matrix import FLOAT_FORMAT, read_feature_csv
from src.droidchain.config import LOG_LEVEL, RunConfig
from src.droidchain.errors import DimensionMismatch, DroidChainError, IOFailure, NoCandidate
from src.droidchain.forest.ensemble import importance_ranking
from src.droidchain.forest.metrics import Prediction
from src.droidchain.forest.model_io import dump_json, load_metrics, load_model, predictions_from_metrics
from src.droidchain.ingest.edge_list import read_edge_list_file
from src.droidchain.ingest.manifest import AppRecord, SampleLabel, load_manifest
from src.droidchain.ingest.method_sets import graph_methods, read_class_set, read_method_set
from src.droidchain.ingest.signatures import MethodSig
from src.droidchain.ingest.traces import event_methods, read_trace_events
from src.droidchain.jobs.options import add_run_options, config_from_args, guarded, package_list_for
from src.droidchain.logging import setup
from src.droidchain.report.composer import render_cdf_svg

LOG = logging.getLogger(__name__)

COVERAGE_CSV = "coverage.csv"
DYNAMIC_LOAD_CSV = "dynamic_load.csv"
COVERAGE_CDF_CSV = "coverage_cdf.csv"
COVERAGE_CDF_SVG = "coverage_cdf.svg"
PRESENCE_JSON = "presence.json"
PRESENCE_CDF_CSV = "presence_cdf.csv"
PRESENCE_CDF_SVG = "presence_cdf.svg"
SUMMARY_JSON = "analysis_summary.json"

COVERAGE_COLUMNS = [
    "app_id",
    "label",
    "app_package",
    "triggered",
    "total_static",
    "percent",
    "empty_static",
    "outcome",
    "reason",
]


@dataclass(frozen=True)
class AppAnalysis:
    app_id: str
    label: SampleLabel
    coverage: Optional[CoverageReport] = None
    dynamic: frozenset[MethodSig] = frozenset()
    static: frozenset[MethodSig] = frozenset()
    load_ratio: Optional[float] = None
    reason: str = ""


@dataclass
class AnalysisRun:
    apps: list[AppAnalysis]
    presence: dict[Group, PresenceStats] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    out_dir: Optional[Path] = None


def _static_methods(record: AppRecord) -> Optional[frozenset[MethodSig]]:
    if record.static_method_set_path is not None:
        return read_method_set(record.static_method_set_path)
    if record.static_graph_path is not None:
        return graph_methods(read_edge_list_file(record.static_graph_path, record.app_id))
    return None


def analyze_app(record: AppRecord, pkgs: PackageList) -> AppAnalysis:
    """Coverage and dynamic-loading numbers for one app; problems end up in ``reason``."""
    base = {"app_id": record.app_id, "label": record.label}
    if not record.trace_paths:
        return AppAnalysis(**base, reason="missing traces")
    try:
        dynamic = frozenset().union(*(event_methods(read_trace_events(p)) for p in record.trace_paths))
        static = _static_methods(record)
        if static is None:
            return AppAnalysis(**base, dynamic=dynamic, reason="missing static method set")
        components = read_class_set(record.component_classes_path) if record.component_classes_path else frozenset()
    except DroidChainError as exc:
        return AppAnalysis(**base, reason=f"{type(exc).__name__}: {exc}")

    ratio = dynamic_load_ratio(dynamic, static)
    try:
        packages = infer_app_packages(
            static,
            record.declared_package,
            sorted(components),
            pkgs=pkgs,
            dynamic_methods=dynamic,
            app_id=record.app_id,
        )
    except NoCandidate:
        return AppAnalysis(**base, dynamic=dynamic, static=static, load_ratio=ratio, reason="no candidate app package")
    report = code_coverage(packages, dynamic, static, app_id=record.app_id)
    reason = "empty static set" if report.empty_static else ""
    return AppAnalysis(**base, coverage=report, dynamic=dynamic, static=static, load_ratio=ratio, reason=reason)


def _cdf_frame(series: dict[str, list[tuple[float, float]]]) -> pd.DataFrame:
    rows = [{"series": name, "x": x, "cdf": f} for name, cdf in series.items() for x, f in cdf]
    return pd.DataFrame(rows, columns=["series", "x", "cdf"])


def coverage_series(apps: list[AppAnalysis], outcomes: dict[str, str]) -> dict[str, list[tuple[float, float]]]:
    """Coverage CDFs overall, per label and, with predictions, per correct/misclassified."""
    usable = [a for a in apps if a.coverage is not None and not a.coverage.empty_static]
    series = {"all": empirical_cdf(a.coverage.percent for a in usable)}
    for label in SampleLabel:
        series[label.value] = empirical_cdf(a.coverage.percent for a in usable if a.label is label)
    if outcomes:
        correct = [a.coverage.percent for a in usable if outcomes.get(a.app_id) in ("TP", "TN")]
        wrong = [a.coverage.percent for a in usable if outcomes.get(a.app_id) in ("FP", "FN")]
        series["correct"] = empirical_cdf(correct)
        series["misclassified"] = empirical_cdf(wrong)
    return series


def presence_analysis(
    features_path: Path,
    model_path: Path,
    metrics_path: Path,
    k: int,
) -> tuple[dict[Group, PresenceStats], list[Prediction]]:
    fm = read_feature_csv(features_path)
    model = load_model(model_path)
    if model.n_features != len(fm.columns):
        raise DimensionMismatch(f"model has {model.n_features} features, {features_path} has {len(fm.columns)}")
    predictions = predictions_from_metrics(load_metrics(metrics_path))
    report = misclassification_report(predictions, fm.vectors(), importance_ranking(model), k)
    return report, predictions


def _mean(values: list[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def run_analyze(
    manifest_path: Path | str,
    cfg: RunConfig,
    out_dir: Path | str,
    *,
    features_path: Optional[Path] = None,
    model_path: Optional[Path] = None,
    metrics_path: Optional[Path] = None,
) -> AnalysisRun:
    out = Path(out_dir)
    manifest = load_manifest(manifest_path)
    pkgs = package_list_for(cfg)
    apps: list[AppAnalysis] = list(
        Parallel(n_jobs=cfg.jobs, prefer="threads")(delayed(analyze_app)(record, pkgs) for record in manifest)
    )
    for app in apps:
        if app.reason:
            LOG.warning("Coverage issue app_id=%s reason=%s", app.app_id, app.reason)

    presence: dict[Group, PresenceStats] = {}
    outcomes: dict[str, str] = {}
    if features_path and model_path and metrics_path:
        presence, predictions = presence_analysis(features_path, model_path, metrics_path, cfg.top_k)
        outcomes = {p.app_id: p.outcome for p in predictions}
    else:
        LOG.info("Presence analysis skipped: features, model and metrics are all needed")

    coverage_rows = [
        {
            "app_id": a.app_id,
            "label": a.label.value,
            "app_package": a.coverage.app_package if a.coverage else "",
            "triggered": a.coverage.triggered if a.coverage else 0,
            "total_static": a.coverage.total_static if a.coverage else 0,
            "percent": a.coverage.percent if a.coverage else None,
            "empty_static": bool(a.coverage.empty_static) if a.coverage else False,
            "outcome": outcomes.get(a.app_id, ""),
            "reason": a.reason,
        }
        for a in apps
    ]
    load_rows = [
        {
            "app_id": a.app_id,
            "label": a.label.value,
            "dynamic_methods": len(a.dynamic),
            "dynamic_only": len(a.dynamic - a.static),
            "ratio": a.load_ratio,
        }
        for a in apps
        if a.load_ratio is not None
    ]
    reports = [a.coverage for a in apps if a.coverage is not None]
    mean_cov, pooled_cov = mean_and_pooled(reports)
    with_static = [(a.dynamic, a.static) for a in apps if a.load_ratio is not None]
    summary: dict[str, Any] = {
        "apps": len(apps),
        "coverage_apps": sum(1 for r in reports if not r.empty_static),
        "empty_static": sorted(r.app_id for r in reports if r.empty_static),
        "coverage_mean_percent": mean_cov,
        "coverage_pooled_percent": pooled_cov,
        "dynamic_load_mean_percent": _mean([a.load_ratio for a in apps if a.load_ratio is not None]),
        "common_dynamic_only_percent": common_dynamic_only(with_static),
        "skipped": [{"app_id": a.app_id, "reason": a.reason} for a in apps if a.coverage is None],
        "top_k": cfg.top_k,
        "presence": {g.value: stats.to_dict() for g, stats in presence.items()},
    }

    cov_series = coverage_series(apps, outcomes)
    try:
        out.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(coverage_rows, columns=COVERAGE_COLUMNS).to_csv(
            out / COVERAGE_CSV, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
        pd.DataFrame(load_rows, columns=["app_id", "label", "dynamic_methods", "dynamic_only", "ratio"]).to_csv(
            out / DYNAMIC_LOAD_CSV, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
        _cdf_frame(cov_series).to_csv(out / COVERAGE_CDF_CSV, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        (out / COVERAGE_CDF_SVG).write_text(
            render_cdf_svg(cov_series, "Code coverage", "% of app methods triggered", x_max=100.0),
            encoding="utf-8",
        )
        if presence:
            dump_json(summary["presence"], out / PRESENCE_JSON)
            pres_series = {g.value: [(float(x), f) for x, f in stats.cdf] for g, stats in presence.items()}
            _cdf_frame(pres_series).to_csv(
                out / PRESENCE_CDF_CSV, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
            )
            (out / PRESENCE_CDF_SVG).write_text(
                render_cdf_svg(pres_series, f"Top-{cfg.top_k} feature presence", "features present", x_max=float(cfg.top_k)),
                encoding="utf-8",
            )
        dump_json(summary, out / SUMMARY_JSON)
    except OSError as exc:
        raise IOFailure(f"cannot write analysis outputs under {out}: {exc}") from exc

    LOG.info(
        "Analysis done apps=%s coverage_mean=%s coverage_pooled=%s out=%s",
        len(apps), mean_cov, pooled_cov, out,
    )
    return AnalysisRun(apps=apps, presence=presence, summary=summary, out_dir=out)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("manifest", type=Path)
    parser.add_argument("--out-dir", type=Path, required=True)
    parser.add_argument("--features", type=Path, default=None, help="features.csv for presence analysis")
    parser.add_argument("--model", type=Path, default=None, help="model.json from the cv step")
    parser.add_argument("--metrics", type=Path, default=None, help="metrics.json from the cv step")
    add_run_options(parser)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Coverage, dynamic-loading and top-k presence reports")
    add_arguments(parser)
    return parser


def run_from_args(args: argparse.Namespace) -> AnalysisRun:
    return run_analyze(
        args.manifest,
        config_from_args(args),
        args.out_dir,
        features_path=args.features,
        model_path=args.model,
        metrics_path=args.metrics,
    )


def main(argv: Optional[list[str]] = None) -> int:
    setup(LOG_LEVEL)
    args = build_arg_parser().parse_args(argv)
    return guarded(lambda: run_from_args(args))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
