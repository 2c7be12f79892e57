from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import pandas as pd

from src.droidchain.analysis.presence import OverlapReport, misclassification_overlap
from src.droidchain.chain.feature_matrix import FLOAT_FORMAT
from src.droidchain.config import LOG_LEVEL
from src.droidchain.errors import ConfigError, IOFailure
from src.droidchain.forest.model_io import dump_json, load_metrics, predictions_from_metrics
from src.droidchain.logging import setup
from src.droidchain.jobs.options import guarded
from src.droidchain.report.composer import render_comparison_text

LOG = logging.getLogger(__name__)

COMPARISON_CSV = "comparison.csv"
COMPARISON_TXT = "comparison.txt"
OVERLAP_JSON = "overlap.json"

COLUMNS = ["run", "analysis", "stimulator", "mode", "f_measure", "precision", "recall", "n", "tp", "fp", "tn", "fn"]


@dataclass
class Comparison:
    rows: list[dict[str, Any]]
    overlap: Optional[OverlapReport] = None


def _row(payload: dict[str, Any]) -> dict[str, Any]:
    run, m = payload["run"], payload["metrics"]
    return {
        "analysis": run.get("analysis", "-"),
        "stimulator": run.get("stimulator", "-"),
        "mode": run.get("mode", "-"),
        "f_measure": float(m["f_measure"]),
        "precision": float(m["precision"]),
        "recall": float(m["recall"]),
        "n": int(m["tp"]) + int(m["fp"]) + int(m["tn"]) + int(m["fn"]),
        "tp": int(m["tp"]),
        "fp": int(m["fp"]),
        "tn": int(m["tn"]),
        "fn": int(m["fn"]),
    }


def run_compare(metrics_paths: Sequence[Path | str], out_dir: Path | str) -> Comparison:
    """One row per (analysis, stimulator, mode) run, in the order given."""
    if not metrics_paths:
        raise ConfigError("compare needs at least one metrics file")
    out = Path(out_dir)
    rows: list[dict[str, Any]] = []
    runs = {}
    for path in metrics_paths:
        payload = load_metrics(path)
        row = _row(payload)
        name = f"{row['analysis']}-{row['stimulator']}-{row['mode']}"
        base, n = name, 2
        while name in runs:
            name = f"{base}#{n}"
            n += 1
        runs[name] = predictions_from_metrics(payload)
        rows.append({"run": name, **row})

    overlap = None
    if len(runs) >= 2 and all(runs.values()):
        overlap = misclassification_overlap(runs)
    try:
        out.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows, columns=COLUMNS).to_csv(
            out / COMPARISON_CSV, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
        (out / COMPARISON_TXT).write_text(render_comparison_text(rows), encoding="utf-8")
        if overlap is not None:
            dump_json(overlap.to_dict(), out / OVERLAP_JSON)
    except OSError as exc:
        raise IOFailure(f"cannot write comparison under {out}: {exc}") from exc
    LOG.info("Comparison written runs=%s out=%s", len(rows), out)
    return Comparison(rows=rows, overlap=overlap)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("metrics", type=Path, nargs="+", help="metrics.json files from cv runs")
    parser.add_argument("--out-dir", type=Path, required=True)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Tabulate F/P/R across cv runs")
    add_arguments(parser)
    return parser


def run_from_args(args: argparse.Namespace) -> Comparison:
    return run_compare(args.metrics, args.out_dir)


def main(argv: Optional[list[str]] = None) -> int:
    setup(LOG_LEVEL)
    args = build_arg_parser().parse_args(argv)
    return guarded(lambda: run_from_args(args))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
