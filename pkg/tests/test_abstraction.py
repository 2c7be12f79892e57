from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given, strategies as st

from src.droidchain.abstraction.abstractor import abstract_call, abstract_graph, is_obfuscated, state_space
from src.droidchain.abstraction.labels import (
    FAMILY_NAMES,
    OBFUSCATED,
    SELF_DEFINED,
    AbstractionMode,
    Label,
    LabelKind,
    family_of,
)
from src.droidchain.abstraction.packages import PackageList, load_package_list
from src.droidchain.chain.graph_ops import aggregate
from src.droidchain.errors import InvalidSpec
from src.droidchain.ingest.edge_list import parse_edge_list
from src.droidchain.ingest.graph import CallGraph, Origin
from src.droidchain.ingest.signatures import MethodSig

FAMILY = AbstractionMode.FAMILY
PACKAGE = AbstractionMode.PACKAGE


def fam(name: str) -> Label:
    return Label(name, LabelKind.FAMILY)


@pytest.mark.parametrize(
    "raw, mode, expected",
    [
        ("java.lang.Class.getMethod", FAMILY, fam("java")),
        ("android.app.Activity.onNewIntent", PACKAGE, Label("android.app", LabelKind.PACKAGE)),
        ("air.com.eni.ChefJudy030.AppEntry.onNewIntent", FAMILY, SELF_DEFINED),
        ("a.b.c.d()", FAMILY, OBFUSCATED),
        ("com.google.android.gms.ads.AdView.loadAd", FAMILY, fam("google")),
        ("org.w3c.dom.Node.getNodeName", FAMILY, fam("dom")),
        ("org.json.JSONObject.put", FAMILY, fam("json")),
        ("javax.crypto.Cipher.doFinal", FAMILY, fam("javax")),
    ],
)
def test_abstract_call(pkgs, raw, mode, expected):
    assert abstract_call(MethodSig.parse(raw), mode, pkgs) == expected


@pytest.mark.parametrize(
    "class_fqn, expected",
    [
        ("a.a.b", True),
        ("com.example.mailclient.Inbox", False),
        ("ab.cd.Widget", True),
    ],
)
def test_is_obfuscated(class_fqn, expected):
    assert is_obfuscated(class_fqn) is expected


def test_longest_prefix_wins():
    pkgs = PackageList.from_entries(["android", "android.app"])
    label = abstract_call(MethodSig.parse("android.app.Activity.onCreate"), PACKAGE, pkgs)
    assert label == Label("android.app", LabelKind.PACKAGE)
    assert pkgs.match("android.appwidget.Provider") == "android"


def test_prefix_matches_whole_segments():
    pkgs = PackageList.from_entries(["java.lang"])
    assert pkgs.match("java.language.Parser") is None


def test_class_whitelist_gates_api_matches():
    pkgs = PackageList.from_entries(["android.app"], api_classes=frozenset({"android.app.Activity"}))
    assert abstract_call(MethodSig.parse("android.app.Activity.onCreate"), FAMILY, pkgs) == fam("android")
    # a developer class living under an API package name
    assert abstract_call(MethodSig.parse("android.app.FakeLoader.run"), FAMILY, pkgs) == SELF_DEFINED


def test_package_list_rejects_duplicates_and_blanks():
    with pytest.raises(InvalidSpec):
        PackageList.from_entries(["java.lang", "java.lang"])
    with pytest.raises(InvalidSpec):
        PackageList.from_entries(["java.lang", " "])


def test_entries_sorted_by_segment_count():
    pkgs = PackageList.from_entries(["java", "java.util.concurrent", "java.util"])
    assert pkgs.entries == ("java.util.concurrent", "java.util", "java")
    assert pkgs.lexicographic() == ["java", "java.util", "java.util.concurrent"]


def test_load_package_list_file(tmp_path):
    path = tmp_path / "pkgs.txt"
    path.write_text("# api\njava.lang\n\nandroid.app  \njava.lang\n", encoding="utf-8")
    pkgs = load_package_list(path)
    assert sorted(pkgs.entries) == ["android.app", "java.lang"]


def test_bundled_list_maps_to_families(pkgs):
    assert len(pkgs) > 100
    assert all(family_of(entry) is not None for entry in pkgs.entries)


def test_family_state_space(pkgs):
    space = state_space(FAMILY, pkgs)
    assert len(space) == 11
    assert [label.name for label in space] == [*FAMILY_NAMES, "obfuscated", "self-defined"]


def test_package_state_space(pkgs):
    space = state_space(PACKAGE, pkgs)
    assert len(space) == len(pkgs) + 2
    assert [label.name for label in space[:-2]] == sorted(pkgs.entries)
    assert space[-2:] == [OBFUSCATED, SELF_DEFINED]


def test_empty_package_list_state_space():
    assert state_space(PACKAGE, PackageList.from_entries([])) == [OBFUSCATED, SELF_DEFINED]


def test_aggregated_call_tree_family_edges(trace_one, trace_two, pkgs):
    abstracted = abstract_graph(aggregate([trace_one, trace_two]), FAMILY, pkgs)
    assert abstracted.edges == Counter(
        {
            (SELF_DEFINED, SELF_DEFINED): 4,
            (SELF_DEFINED, fam("java")): 4,
            (SELF_DEFINED, fam("android")): 4,
        }
    )


def test_empty_graph(pkgs):
    abstracted = abstract_graph(CallGraph(app_id="x", origin=Origin.STATIC), FAMILY, pkgs)
    assert not abstracted.edges
    assert abstracted.states == set()


def test_collapsing_edges_sum(pkgs):
    graph = parse_edge_list("com.foo.A.x\tjava.util.List.y\t2\ncom.foo.A.z\tjava.util.Map.w\t3\n", "x")
    abstracted = abstract_graph(graph, FAMILY, pkgs)
    assert abstracted.edges == Counter({(SELF_DEFINED, fam("java")): 5})


segment = st.from_regex(r"[A-Za-z][A-Za-z0-9_$]{0,9}", fullmatch=True)
prefixes = st.sampled_from(["", "java.lang.", "android.app.", "com.google.android.gms.", "org.apache.http.", "a.b."])
signatures = st.builds(
    lambda prefix, parts: MethodSig.parse(prefix + ".".join(parts)),
    prefixes,
    st.lists(segment, min_size=2, max_size=5),
)


@given(signatures)
def test_family_image_is_inside_state_space(sig):
    pkgs = _BUNDLED
    space = set(state_space(FAMILY, pkgs))
    label = abstract_call(sig, FAMILY, pkgs)
    assert label in space
    assert label == abstract_call(sig, FAMILY, pkgs)


@given(st.lists(st.tuples(signatures, signatures, st.integers(min_value=1, max_value=9)), max_size=10))
def test_abstraction_preserves_total_count(edges):
    graph = CallGraph(app_id="x", origin=Origin.STATIC)
    for caller, callee, count in edges:
        graph.add(caller, callee, count)
    for mode in AbstractionMode:
        assert abstract_graph(graph, mode, _BUNDLED).total == graph.total


_BUNDLED = load_package_list()
