from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

from dotenv import load_dotenv

from src.droidchain.abstraction.labels import AbstractionMode
from src.droidchain.errors import ConfigError

load_dotenv()


class Analysis(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    HYBRID = "hybrid"


_ALLOWED_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR"}

# (n_trees, max_depth) per abstraction mode
FOREST_DEFAULTS = {
    AbstractionMode.FAMILY: (51, 8),
    AbstractionMode.PACKAGE: (101, 32),
}

BUNDLED_PACKAGE_LIST = Path(__file__).parent / "abstraction" / "data" / "android_google_packages.txt"


def _read_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def _read_path(name: str) -> Path | None:
    raw = os.getenv(name, "").strip()
    return Path(raw) if raw else None


LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
if LOG_LEVEL not in _ALLOWED_LOG_LEVELS:
    LOG_LEVEL = "INFO"

DEFAULT_JOBS = max(_read_int("DROIDCHAIN_JOBS", 1), 1)
DEFAULT_TOP_K = max(_read_int("DROIDCHAIN_TOP_K", 100), 1)
PACKAGE_LIST_PATH = _read_path("DROIDCHAIN_PACKAGE_LIST") or BUNDLED_PACKAGE_LIST
CLASS_WHITELIST_PATH = _read_path("DROIDCHAIN_CLASS_WHITELIST")
DEFAULT_STIMULATOR = os.getenv("DROIDCHAIN_STIMULATOR", "-").strip() or "-"


def env_seed(default: int = 42) -> int:
    """Seed fallback; read on every call so tests and wrappers can set it late."""
    return _read_int("DROIDCHAIN_SEED", default)


@dataclass(frozen=True)
class RunConfig:
    mode: AbstractionMode = AbstractionMode.FAMILY
    analysis: Analysis = Analysis.HYBRID
    package_list_path: Path = BUNDLED_PACKAGE_LIST
    class_whitelist_path: Path | None = None
    n_trees: int = 51
    max_depth: int = 8
    k_folds: int = 10
    seed: int = 42
    top_k: int = 100
    jobs: int = 1
    stimulator: str = "-"
    obfuscation_max_median: float = 2.0

    @property
    def tag(self) -> str:
        return f"{self.analysis.value}-{self.mode.value}"


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def _coerce(name: str, value: Any) -> Any:
    try:
        if name == "mode":
            return AbstractionMode.parse(value)
        if name == "analysis":
            return value if isinstance(value, Analysis) else Analysis(str(value).strip().lower())
        if name in {"package_list_path", "class_whitelist_path"}:
            return Path(value) if value not in (None, "") else None
        if name in {"n_trees", "max_depth", "k_folds", "seed", "top_k", "jobs"}:
            return int(value)
        if name == "obfuscation_max_median":
            return float(value)
        if name == "stimulator":
            return str(value)
    except ValueError as exc:
        raise ConfigError(f"invalid value for {name}: {value!r}") from exc
    return value


def load_config_file(path: Path) -> dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"config file must hold a JSON object: {path}")
    unknown = sorted(set(payload) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    return payload


def resolve_run_config(
    overrides: Mapping[str, Any] | None = None,
    config_path: Path | None = None,
) -> RunConfig:
    """Flags > JSON file > environment > defaults.

    ``overrides`` entries set to ``None`` count as "not given".
    """
    merged: dict[str, Any] = {
        "seed": env_seed(),
        "jobs": DEFAULT_JOBS,
        "top_k": DEFAULT_TOP_K,
        "package_list_path": PACKAGE_LIST_PATH,
        "class_whitelist_path": CLASS_WHITELIST_PATH,
        "stimulator": DEFAULT_STIMULATOR,
    }
    if config_path is not None:
        merged.update(load_config_file(config_path))
    for key, value in (overrides or {}).items():
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config key: {key}")
        if value is not None:
            merged[key] = value

    coerced = {key: _coerce(key, value) for key, value in merged.items()}
    cfg = RunConfig(**coerced)
    default_trees, default_depth = FOREST_DEFAULTS[cfg.mode]
    if "n_trees" not in coerced:
        cfg = replace(cfg, n_trees=default_trees)
    if "max_depth" not in coerced:
        cfg = replace(cfg, max_depth=default_depth)

    if cfg.package_list_path is None:
        cfg = replace(cfg, package_list_path=BUNDLED_PACKAGE_LIST)
    if cfg.n_trees < 1 or cfg.max_depth < 1:
        raise ConfigError(f"n_trees and max_depth must be positive: {cfg.n_trees}/{cfg.max_depth}")
    if cfg.k_folds < 2:
        raise ConfigError(f"k_folds must be at least 2: {cfg.k_folds}")
    if cfg.top_k < 1 or cfg.jobs < 1:
        raise ConfigError("top_k and jobs must be positive")
    return cfg
