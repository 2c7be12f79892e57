from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import pytest

from src.droidchain.analysis.presence import Group
from src.droidchain.config import resolve_run_config
from src.droidchain.errors import ModeMismatch, TooFewSamples
from src.droidchain.ingest.manifest import DatasetManifest, load_manifest, write_manifest
from src.droidchain.jobs import cli
from src.droidchain.jobs.analyze import (
    COVERAGE_CDF_CSV,
    COVERAGE_CDF_SVG,
    COVERAGE_CSV,
    DYNAMIC_LOAD_CSV,
    PRESENCE_CDF_CSV,
    PRESENCE_CDF_SVG,
    PRESENCE_JSON,
    SUMMARY_JSON as ANALYSIS_SUMMARY_JSON,
    run_analyze,
)
from src.droidchain.jobs.compare import COMPARISON_CSV, COMPARISON_TXT, OVERLAP_JSON, run_compare
from src.droidchain.jobs.cross_validate import METRICS_JSON, MODEL_JSON, run_cv
from src.droidchain.jobs.extract_features import FEATURES_CSV, SKIPPED_CSV, SUMMARY_JSON, run_features
from src.droidchain.synth.generator import generate_corpus
from src.droidchain.synth.profiles import DEFAULT_BENIGN, DEFAULT_MALWARE

ARTIFACTS = [
    FEATURES_CSV,
    SKIPPED_CSV,
    SUMMARY_JSON,
    "summary.txt",
    METRICS_JSON,
    MODEL_JSON,
    "ranking.csv",
    "predictions.csv",
]
ANALYSIS_ARTIFACTS = [
    COVERAGE_CSV,
    DYNAMIC_LOAD_CSV,
    COVERAGE_CDF_CSV,
    COVERAGE_CDF_SVG,
    PRESENCE_JSON,
    PRESENCE_CDF_CSV,
    PRESENCE_CDF_SVG,
    ANALYSIS_SUMMARY_JSON,
]


def cfg(**overrides):
    return resolve_run_config({"seed": 42, "jobs": 1, **overrides})


def make_corpus(out: Path, n_benign: int, n_malware: int, seed: int = 42, **profile) -> Path:
    benign = DEFAULT_BENIGN.with_overrides(**profile) if profile else DEFAULT_BENIGN
    malware = DEFAULT_MALWARE.with_overrides(**profile) if profile else DEFAULT_MALWARE
    generate_corpus(n_benign, n_malware, benign, malware, seed, out)
    return out / "manifest.csv"


@pytest.fixture
def three_apps(tmp_path) -> Path:
    make_corpus(tmp_path / "corpus", 2, 1)
    manifest = load_manifest(tmp_path / "corpus" / "manifest.csv")
    records = list(manifest.records)
    records[1] = replace(records[1], trace_paths=())
    return write_manifest(DatasetManifest(records=records), tmp_path / "corpus" / "manifest_gap.csv")


def test_dynamic_features_skip_app_without_traces(three_apps, tmp_path):
    run = run_features(three_apps, cfg(analysis="dynamic"), tmp_path / "out")
    assert run.matrix.app_ids == ["benign_0000", "malware_0000"]
    assert [s.app_id for s in run.skipped] == ["benign_0001"]
    assert run.skipped[0].reason == "missing traces"
    accounting = {row["label"]: row for row in run.accounting}
    assert accounting["benign"] == {"label": "benign", "listed": 2, "usable": 1, "skipped": 1}
    header = (tmp_path / "out" / FEATURES_CSV).read_text(encoding="utf-8").splitlines()[0].split(",")
    assert len(header) == 123
    assert header[:2] == ["app_id", "label"]


def test_hybrid_needs_both_views(three_apps, tmp_path):
    run = run_features(three_apps, cfg(analysis="hybrid"), tmp_path / "out")
    assert len(run.matrix) == 2
    assert "both" in run.skipped[0].reason
    static_run = run_features(three_apps, cfg(analysis="static"), tmp_path / "static")
    assert len(static_run.matrix) == 3


def test_package_mode_width(three_apps, tmp_path, pkgs):
    run = run_features(three_apps, cfg(analysis="static", mode="package"), tmp_path / "out")
    assert len(run.matrix.columns) == (len(pkgs) + 2) ** 2


@pytest.mark.parametrize("noise, floor", [(0.0, 0.99), (0.3, 0.90)])
def test_end_to_end_cross_validation(tmp_path, noise, floor):
    manifest = make_corpus(tmp_path / "corpus", 200, 200, noise=noise)
    run_cfg = cfg()
    run_features(manifest, run_cfg, tmp_path / "run")
    result = run_cv(tmp_path / "run" / FEATURES_CSV, run_cfg, tmp_path / "run")
    assert len(result.report.per_sample) == 400
    assert result.report.f_measure >= floor
    payload = json.loads((tmp_path / "run" / METRICS_JSON).read_text(encoding="utf-8"))
    assert payload["run"]["n_trees"] == 51
    assert len(payload["metrics"]["per_fold"]) == 10


def test_outputs_do_not_depend_on_jobs(tmp_path):
    manifest = make_corpus(tmp_path / "corpus", 15, 15, dynamic_only_fraction=0.1)
    for jobs in (1, 8):
        root = tmp_path / f"jobs{jobs}"
        metrics = []
        for analysis in ("hybrid", "static"):
            run_cfg = cfg(jobs=jobs, k_folds=5, top_k=20, analysis=analysis)
            out = root / analysis
            run_features(manifest, run_cfg, out)
            run_cv(out / FEATURES_CSV, run_cfg, out)
            metrics.append(out / METRICS_JSON)
        hybrid = root / "hybrid"
        run_analyze(
            manifest,
            cfg(jobs=jobs, k_folds=5, top_k=20),
            root / "analysis",
            features_path=hybrid / FEATURES_CSV,
            model_path=hybrid / MODEL_JSON,
            metrics_path=hybrid / METRICS_JSON,
        )
        run_compare(metrics, root / "comparison")

    produced = [f"{analysis}/{name}" for analysis in ("hybrid", "static") for name in ARTIFACTS]
    produced += [f"analysis/{name}" for name in ANALYSIS_ARTIFACTS]
    produced += [f"comparison/{name}" for name in (COMPARISON_CSV, COMPARISON_TXT, OVERLAP_JSON)]
    for name in produced:
        assert (tmp_path / "jobs1" / name).read_bytes() == (tmp_path / "jobs8" / name).read_bytes(), name


def test_cv_rejects_small_classes(tmp_path):
    manifest = make_corpus(tmp_path / "corpus", 4, 4)
    run_features(manifest, cfg(), tmp_path / "out")
    with pytest.raises(TooFewSamples):
        run_cv(tmp_path / "out" / FEATURES_CSV, cfg(), tmp_path / "out")


def test_cv_detects_mode_mismatch(three_apps, tmp_path):
    run_features(three_apps, cfg(analysis="static", mode="package"), tmp_path / "out")
    with pytest.raises(ModeMismatch):
        run_cv(tmp_path / "out" / FEATURES_CSV, cfg(mode="family"), tmp_path / "out")


def test_analyze_reports(tmp_path):
    manifest = make_corpus(tmp_path / "corpus", 12, 12, dynamic_only_fraction=0.1)
    run_cfg = cfg(k_folds=4, top_k=20)
    run_dir = tmp_path / "run"
    run_features(manifest, run_cfg, run_dir)
    cv = run_cv(run_dir / FEATURES_CSV, run_cfg, run_dir)
    assert cv.report.fp == cv.report.fn == 0

    result = run_analyze(
        manifest,
        run_cfg,
        tmp_path / "analysis",
        features_path=run_dir / FEATURES_CSV,
        model_path=run_dir / MODEL_JSON,
        metrics_path=run_dir / METRICS_JSON,
    )
    for app in result.apps:
        assert not app.reason
        assert app.coverage.percent < 100.0
        assert app.load_ratio > 0.0
    assert result.presence[Group.FP].empty
    assert result.presence[Group.FN].empty
    assert len(result.presence[Group.TP].per_app_counts) == 12
    for name in ("coverage.csv", "dynamic_load.csv", "coverage_cdf.svg", "presence.json", "presence_cdf.svg"):
        assert (tmp_path / "analysis" / name).exists()
    summary = json.loads((tmp_path / "analysis" / "analysis_summary.json").read_text(encoding="utf-8"))
    assert summary["coverage_apps"] == 24
    assert summary["dynamic_load_mean_percent"] > 0


def test_analyze_without_model_skips_presence(three_apps, tmp_path):
    result = run_analyze(three_apps, cfg(), tmp_path / "analysis")
    assert not result.presence
    reasons = {app.app_id: app.reason for app in result.apps}
    assert reasons["benign_0001"] == "missing traces"
    assert not (tmp_path / "analysis" / "presence.json").exists()


def test_cli_exit_codes(tmp_path):
    corpus = tmp_path / "corpus"
    assert cli.main(["synth", "--out-dir", str(corpus), "--benign", "4", "--malware", "4", "--seed", "3"]) == 0
    assert cli.main(["features", str(corpus / "manifest.csv"), "--out-dir", str(tmp_path / "f")]) == 0
    assert cli.main(["cv", str(tmp_path / "f" / FEATURES_CSV), "--out-dir", str(tmp_path / "cv")]) == 1
    assert cli.main(["features", str(tmp_path / "absent.csv"), "--out-dir", str(tmp_path / "g")]) == 1
    assert cli.main(["synth", "--out-dir", str(corpus), "--jobs", "0"]) == 1
    with pytest.raises(SystemExit) as info:
        cli.main(["features", "--mode", "class"])
    assert info.value.code == 2
