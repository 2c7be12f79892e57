from __future__ import annotations
import argparse, logging
from pathlib import Path

from src.droidchain.config import LOG_LEVEL, Analysis, resolve_run_config
from src.droidchain.abstraction.labels import AbstractionMode
from src.droidchain.jobs.compare import run_compare
from src.droidchain.jobs.cross_validate import METRICS_JSON, run_cv
from src.droidchain.jobs.extract_features import FEATURES_CSV, run_features
from src.droidchain.jobs.options import guarded
from src.droidchain.logging import setup

LOG = logging.getLogger("run_comparison")

def sweep(manifest: Path, out_root: Path, seed: int | None, jobs: int | None, stimulator: str | None) -> None:
    metrics = []
    for analysis in Analysis:
        for mode in AbstractionMode:
            cfg = resolve_run_config(
                {"analysis": analysis, "mode": mode, "seed": seed, "jobs": jobs, "stimulator": stimulator}
            )
            run_dir = out_root / cfg.tag
            LOG.info("sweep run=%s", cfg.tag)
            run_features(manifest, cfg, run_dir)
            run_cv(run_dir / FEATURES_CSV, cfg, run_dir)
            metrics.append(run_dir / METRICS_JSON)
    run_compare(metrics, out_root / "comparison")

def main():
    setup(LOG_LEVEL)
    parser = argparse.ArgumentParser(description="features + cv for every analysis x mode, then compare")
    parser.add_argument("manifest", type=Path)
    parser.add_argument("--out-dir", type=Path, default=Path("runs"))
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--stimulator", default=None)
    args = parser.parse_args()
    return guarded(lambda: sweep(args.manifest, args.out_dir, args.seed, args.jobs, args.stimulator))

if __name__ == "__main__":
    raise SystemExit(main())
