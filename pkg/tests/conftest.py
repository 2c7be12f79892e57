from __future__ import annotations

import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from src.droidchain.abstraction.packages import PackageList, load_package_list
from src.droidchain.ingest.edge_list import parse_edge_list
from src.droidchain.ingest.graph import CallGraph, Origin

from tests.call_tree import call_tree_edges

np.seterr(all="warn")

hypothesis.settings.register_profile("default", max_examples=1000, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=50, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def pkgs() -> PackageList:
    return load_package_list()


@pytest.fixture
def trace_one() -> CallGraph:
    return parse_edge_list(call_tree_edges(3), "chefjudy", Origin.DYNAMIC)


@pytest.fixture
def trace_two() -> CallGraph:
    return parse_edge_list(call_tree_edges(1), "chefjudy", Origin.DYNAMIC)


@pytest.fixture
def static_call_tree() -> CallGraph:
    return parse_edge_list(call_tree_edges(1), "chefjudy", Origin.STATIC)


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def write_file():
    return write
