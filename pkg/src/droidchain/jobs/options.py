from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Callable

from src.droidchain.abstraction.labels import AbstractionMode
from src.droidchain.abstraction.packages import PackageList, load_package_list
from src.droidchain.config import Analysis, RunConfig, resolve_run_config
from src.droidchain.errors import DroidChainError

LOG = logging.getLogger(__name__)

# argparse dest -> RunConfig field
_OVERRIDES = (
    "mode",
    "analysis",
    "package_list_path",
    "class_whitelist_path",
    "n_trees",
    "max_depth",
    "k_folds",
    "seed",
    "top_k",
    "jobs",
    "stimulator",
)


def add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON run config file")
    parser.add_argument("--mode", choices=[m.value for m in AbstractionMode], default=None)
    parser.add_argument("--analysis", choices=[a.value for a in Analysis], default=None)
    parser.add_argument("--package-list", dest="package_list_path", type=Path, default=None)
    parser.add_argument("--class-whitelist", dest="class_whitelist_path", type=Path, default=None)
    parser.add_argument("--trees", dest="n_trees", type=int, default=None, help="Forest size (mode default)")
    parser.add_argument("--depth", dest="max_depth", type=int, default=None, help="Tree depth (mode default)")
    parser.add_argument("--folds", dest="k_folds", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None, help="Falls back to DROIDCHAIN_SEED")
    parser.add_argument("--top-k", dest="top_k", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None, help="Worker threads; outputs do not depend on it")
    parser.add_argument("--stimulator", default=None, help="Tag for what drove the traces, e.g. monkey")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {name: getattr(args, name, None) for name in _OVERRIDES}
    return resolve_run_config(overrides, getattr(args, "config", None))


def package_list_for(cfg: RunConfig) -> PackageList:
    return load_package_list(
        cfg.package_list_path,
        class_whitelist=cfg.class_whitelist_path,
        obfuscation_max_median=cfg.obfuscation_max_median,
    )


def guarded(action: Callable[[], object]) -> int:
    """Run ``action``; domain errors become exit code 1."""
    try:
        action()
    except DroidChainError as exc:
        LOG.error("%s: %s", type(exc).__name__, exc)
        return 1
    return 0
