from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.droidchain.abstraction.abstractor import AbstractedGraph, abstract_graph, state_space
from src.droidchain.abstraction.labels import AbstractionMode, Label
from src.droidchain.abstraction.packages import PackageList
from src.droidchain.chain.feature_matrix import FeatureMatrix, build_matrix, write_feature_csv
from src.droidchain.chain.graph_ops import aggregate, merge_hybrid
from src.droidchain.chain.markov import feature_names, features, to_markov
from src.droidchain.config import LOG_LEVEL, Analysis, RunConfig
from src.droidchain.errors import DroidChainError, IOFailure
from src.droidchain.forest.model_io import dump_json
from src.droidchain.ingest.edge_list import read_edge_list_file
from src.droidchain.ingest.manifest import AppRecord, SampleLabel, load_manifest
from src.droidchain.ingest.traces import read_trace_file
from src.droidchain.jobs.options import add_run_options, config_from_args, guarded, package_list_for
from src.droidchain.logging import setup
from src.droidchain.report.composer import render_run_summary

LOG = logging.getLogger(__name__)

FEATURES_CSV = "features.csv"
SKIPPED_CSV = "skipped.csv"
SUMMARY_JSON = "summary.json"
SUMMARY_TXT = "summary.txt"


@dataclass(frozen=True)
class SkipEntry:
    app_id: str
    label: SampleLabel
    reason: str


@dataclass
class FeatureRun:
    matrix: FeatureMatrix
    skipped: list[SkipEntry] = field(default_factory=list)
    accounting: list[dict] = field(default_factory=list)
    out_dir: Optional[Path] = None


def missing_artifacts(record: AppRecord, analysis: Analysis) -> Optional[str]:
    has_static = record.static_graph_path is not None
    has_traces = bool(record.trace_paths)
    if analysis is Analysis.STATIC and not has_static:
        return "missing static graph"
    if analysis is Analysis.DYNAMIC and not has_traces:
        return "missing traces"
    if analysis is Analysis.HYBRID and not (has_static and has_traces):
        return "hybrid needs both a static graph and traces"
    return None


def app_graph(record: AppRecord, analysis: Analysis, mode: AbstractionMode, pkgs: PackageList) -> AbstractedGraph:
    """Abstracted graph of one app for the chosen analysis; trace runs are summed first."""
    static_g = dynamic_g = None
    if analysis in (Analysis.STATIC, Analysis.HYBRID):
        raw = read_edge_list_file(record.static_graph_path, record.app_id)
        static_g = abstract_graph(raw, mode, pkgs)
    if analysis in (Analysis.DYNAMIC, Analysis.HYBRID):
        runs = [read_trace_file(path, record.app_id) for path in record.trace_paths]
        raw = aggregate(runs)
        if raw.warnings:
            LOG.debug("Trace warnings app_id=%s count=%s", record.app_id, raw.warnings)
        dynamic_g = abstract_graph(raw, mode, pkgs)
    if analysis is Analysis.HYBRID:
        return merge_hybrid(static_g, dynamic_g)
    return static_g if static_g is not None else dynamic_g


def _extract(
    record: AppRecord,
    cfg: RunConfig,
    pkgs: PackageList,
    space: Sequence[Label],
) -> tuple[Optional[np.ndarray], str]:
    missing = missing_artifacts(record, cfg.analysis)
    if missing:
        return None, missing
    try:
        graph = app_graph(record, cfg.analysis, cfg.mode, pkgs)
        return features(to_markov(graph, space)).values, ""
    except DroidChainError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def dataset_accounting(records: Sequence[AppRecord], skipped: Sequence[SkipEntry]) -> list[dict]:
    rows = []
    for label in SampleLabel:
        listed = sum(1 for r in records if r.label is label)
        dropped = sum(1 for s in skipped if s.label is label)
        rows.append({"label": label.value, "listed": listed, "usable": listed - dropped, "skipped": dropped})
    return rows


def run_features(manifest_path: Path | str, cfg: RunConfig, out_dir: Path | str) -> FeatureRun:
    manifest = load_manifest(manifest_path)
    pkgs = package_list_for(cfg)
    space = state_space(cfg.mode, pkgs)
    columns = feature_names(space)
    LOG.info(
        "Extracting features apps=%s analysis=%s mode=%s states=%s jobs=%s",
        len(manifest), cfg.analysis.value, cfg.mode.value, len(space), cfg.jobs,
    )

    results = Parallel(n_jobs=cfg.jobs, prefer="threads")(
        delayed(_extract)(record, cfg, pkgs, space) for record in manifest
    )
    rows = []
    skipped: list[SkipEntry] = []
    for record, (values, reason) in zip(manifest, results):
        if values is None:
            LOG.warning("Skipping app_id=%s reason=%s", record.app_id, reason)
            skipped.append(SkipEntry(app_id=record.app_id, label=record.label, reason=reason))
            continue
        rows.append((record.app_id, record.label, values))

    run = FeatureRun(
        matrix=build_matrix(columns, rows),
        skipped=skipped,
        accounting=dataset_accounting(manifest.records, skipped),
        out_dir=Path(out_dir),
    )
    write_feature_run(run, cfg, n_states=len(space))
    return run


def write_feature_run(run: FeatureRun, cfg: RunConfig, n_states: int) -> None:
    out = run.out_dir
    write_feature_csv(run.matrix, out / FEATURES_CSV)
    skipped = pd.DataFrame(
        [{"app_id": s.app_id, "label": s.label.value, "reason": s.reason} for s in run.skipped],
        columns=["app_id", "label", "reason"],
    )
    summary = {
        "analysis": cfg.analysis.value,
        "mode": cfg.mode.value,
        "stimulator": cfg.stimulator,
        "n_states": n_states,
        "n_features": len(run.matrix.columns),
        "accounting": run.accounting,
        "skipped": skipped.to_dict(orient="records"),
    }
    try:
        skipped.to_csv(out / SKIPPED_CSV, index=False, lineterminator="\n")
        dump_json(summary, out / SUMMARY_JSON)
        (out / SUMMARY_TXT).write_text(render_run_summary(summary), encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write run summary under {out}: {exc}") from exc
    LOG.info("Feature run done rows=%s skipped=%s out=%s", len(run.matrix), len(run.skipped), out)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("manifest", type=Path, help="Dataset manifest CSV")
    parser.add_argument("--out-dir", type=Path, required=True, help="Directory for features.csv and reports")
    add_run_options(parser)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Build Markov-chain feature vectors for every app in a manifest")
    add_arguments(parser)
    return parser


def run_from_args(args: argparse.Namespace) -> FeatureRun:
    return run_features(args.manifest, config_from_args(args), args.out_dir)


def main(argv: Optional[list[str]] = None) -> int:
    setup(LOG_LEVEL)
    args = build_arg_parser().parse_args(argv)
    return guarded(lambda: run_from_args(args))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
