from __future__ import annotations

import json

import pytest

from src.droidchain.abstraction.labels import AbstractionMode
from src.droidchain.abstraction.abstractor import state_space
from src.droidchain.chain.markov import feature_names
from src.droidchain.config import Analysis, BUNDLED_PACKAGE_LIST, env_seed, resolve_run_config
from src.droidchain.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("DROIDCHAIN_SEED", "DROIDCHAIN_JOBS", "DROIDCHAIN_TOP_K"):
        monkeypatch.delenv(name, raising=False)


@pytest.mark.parametrize(
    "mode, trees, depth",
    [(AbstractionMode.FAMILY, 51, 8), (AbstractionMode.PACKAGE, 101, 32)],
)
def test_forest_defaults_per_mode(mode, trees, depth):
    cfg = resolve_run_config({"mode": mode.value})
    assert (cfg.n_trees, cfg.max_depth) == (trees, depth)


def test_feature_widths_per_mode(pkgs):
    assert len(feature_names(state_space(AbstractionMode.FAMILY, pkgs))) == 121
    assert len(feature_names(state_space(AbstractionMode.PACKAGE, pkgs))) == (len(pkgs) + 2) ** 2


def test_defaults():
    cfg = resolve_run_config()
    assert cfg.mode is AbstractionMode.FAMILY
    assert cfg.analysis is Analysis.HYBRID
    assert cfg.k_folds == 10
    assert cfg.seed == 42
    assert cfg.package_list_path == BUNDLED_PACKAGE_LIST
    assert cfg.tag == "hybrid-family"


def test_flags_beat_file_beat_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DROIDCHAIN_SEED", "7")
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 8, "n_trees": 5, "analysis": "static"}), encoding="utf-8")
    assert resolve_run_config().seed == 7
    from_file = resolve_run_config(config_path=path)
    assert (from_file.seed, from_file.n_trees, from_file.analysis) == (8, 5, Analysis.STATIC)
    assert from_file.max_depth == 8
    flagged = resolve_run_config({"seed": 9, "n_trees": None}, config_path=path)
    assert (flagged.seed, flagged.n_trees) == (9, 5)


def test_env_seed_fallback(monkeypatch):
    assert env_seed() == 42
    monkeypatch.setenv("DROIDCHAIN_SEED", "not-a-number")
    assert env_seed() == 42
    monkeypatch.setenv("DROIDCHAIN_SEED", "1234")
    assert env_seed() == 1234


@pytest.mark.parametrize(
    "overrides",
    [
        {"bogus": 1},
        {"mode": "class"},
        {"analysis": "symbolic"},
        {"k_folds": 1},
        {"n_trees": 0},
        {"jobs": 0},
        {"seed": "abc"},
    ],
)
def test_invalid_settings(overrides):
    with pytest.raises(ConfigError):
        resolve_run_config(overrides)


def test_invalid_config_file(tmp_path):
    with pytest.raises(ConfigError):
        resolve_run_config(config_path=tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        resolve_run_config(config_path=bad)
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"colour": "blue"}', encoding="utf-8")
    with pytest.raises(ConfigError):
        resolve_run_config(config_path=unknown)
