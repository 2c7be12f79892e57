from __future__ import annotations

from collections import Counter
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.droidchain.abstraction.abstractor import AbstractedGraph, abstract_graph, state_space
from src.droidchain.abstraction.labels import OBFUSCATED, SELF_DEFINED, AbstractionMode, Label, LabelKind
from src.droidchain.chain.graph_ops import aggregate, merge_hybrid
from src.droidchain.chain.markov import feature_names, features, to_markov
from src.droidchain.errors import AppIdMismatch, MixedNamespace, ModeMismatch, UnknownState
from src.droidchain.ingest.edge_list import parse_edge_list
from src.droidchain.ingest.graph import CallGraph, Origin

from tests.call_tree import call_tree_edges

FAMILY = AbstractionMode.FAMILY
JAVA = Label("java", LabelKind.FAMILY)
ANDROID = Label("android", LabelKind.FAMILY)


def abstracted(edges: dict, origin: Origin = Origin.STATIC, app_id: str = "app", mode=FAMILY) -> AbstractedGraph:
    return AbstractedGraph(app_id=app_id, origin=origin, mode=mode, edges=Counter(edges))


def test_aggregate_sums_multipliers(trace_one, trace_two):
    total = aggregate([trace_one, trace_two])
    assert set(total.edges.values()) == {4}
    assert total.origin is Origin.DYNAMIC
    assert total.total == trace_one.total + trace_two.total


def test_aggregate_single_graph_is_copy(trace_one):
    out = aggregate([trace_one])
    assert out.edges == trace_one.edges
    assert out.edges is not trace_one.edges


def test_aggregate_rejects_mixing(trace_one, pkgs):
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(MixedNamespace):
        aggregate([trace_one, abstract_graph(trace_one, FAMILY, pkgs)])
    other = parse_edge_list(call_tree_edges(1), "other", Origin.DYNAMIC)
    with pytest.raises(AppIdMismatch):
        aggregate([trace_one, other])
    with pytest.raises(MixedNamespace):
        aggregate([abstracted({}, mode=FAMILY), abstracted({}, mode=AbstractionMode.PACKAGE)])


def test_merge_hybrid_adds_both_views():
    static = abstracted({(SELF_DEFINED, JAVA): 1, (SELF_DEFINED, ANDROID): 2})
    dynamic = abstracted({(SELF_DEFINED, JAVA): 5}, origin=Origin.DYNAMIC)
    merged = merge_hybrid(static, dynamic)
    assert merged.origin is Origin.HYBRID
    assert merged.edges == Counter({(SELF_DEFINED, JAVA): 6, (SELF_DEFINED, ANDROID): 2})


def test_merge_hybrid_errors():
    static = abstracted({})
    with pytest.raises(ModeMismatch):
        merge_hybrid(static, abstracted({}, origin=Origin.DYNAMIC, mode=AbstractionMode.PACKAGE))
    with pytest.raises(AppIdMismatch):
        merge_hybrid(static, abstracted({}, origin=Origin.DYNAMIC, app_id="other"))
    with pytest.raises(ModeMismatch):
        merge_hybrid(static, abstracted({}))


def test_call_tree_transition_row(trace_one, trace_two, pkgs):
    space = state_space(FAMILY, pkgs)
    mc = to_markov(abstract_graph(aggregate([trace_one, trace_two]), FAMILY, pkgs), space)
    row = mc.P[space.index(SELF_DEFINED)]
    for target in (SELF_DEFINED, JAVA, ANDROID):
        assert row[space.index(target)] == pytest.approx(1 / 3, abs=1e-12)
    assert row.sum() == pytest.approx(1.0, abs=1e-12)
    others = [i for i in range(len(space)) if space[i] != SELF_DEFINED]
    assert not mc.P[others].any()


def test_single_edge_chain(pkgs):
    space = state_space(FAMILY, pkgs)
    mc = to_markov(abstracted({(JAVA, ANDROID): 7}), space)
    assert mc.P[space.index(JAVA), space.index(ANDROID)] == 1.0
    assert mc.P.sum() == 1.0


def test_empty_graph_gives_zero_vector(pkgs):
    space = state_space(FAMILY, pkgs)
    vec = features(to_markov(abstracted({}), space))
    assert len(vec) == 121
    assert not vec.values.any()


def test_unknown_state(pkgs):
    space = state_space(FAMILY, pkgs)
    stray = Label("android.app", LabelKind.PACKAGE)
    with pytest.raises(UnknownState):
        to_markov(abstracted({(SELF_DEFINED, stray): 1}), space)


def test_feature_layout_is_row_major(pkgs):
    space = state_space(FAMILY, pkgs)
    names = feature_names(space)
    assert len(names) == 121
    assert names[0] == "google>google"
    assert names[-1] == "self-defined>self-defined"
    mc = to_markov(abstracted({(OBFUSCATED, JAVA): 1}), space)
    vec = features(mc).values
    assert names[int(np.flatnonzero(vec)[0])] == "obfuscated>java"


STATES = [JAVA, ANDROID, OBFUSCATED, SELF_DEFINED]
edge_maps = st.dictionaries(
    st.tuples(st.sampled_from(STATES), st.sampled_from(STATES)),
    st.integers(min_value=1, max_value=50),
    max_size=12,
)


@given(edge_maps)
def test_rows_are_distributions_or_zero(edges):
    P = to_markov(abstracted(edges), STATES).P
    sums = P.sum(axis=1)
    assert np.all((np.abs(sums - 1.0) < 1e-9) | (sums == 0.0))
    assert np.all(P >= 0.0)


@given(st.lists(edge_maps, min_size=1, max_size=4), st.randoms())
def test_aggregate_matches_multiset_sum(maps, rnd):
    graphs = [abstracted(m) for m in maps]
    expected: Counter = Counter()
    for m in maps:
        for edge, count in m.items():
            expected[edge] += count
    shuffled = list(graphs)
    rnd.shuffle(shuffled)
    assert aggregate(graphs).edges == expected
    assert aggregate(shuffled).edges == expected
    if len(graphs) >= 2:
        nested = aggregate([aggregate(graphs[:1]), aggregate(graphs[1:])])
        assert nested.edges == expected


@given(edge_maps)
def test_markov_matches_bruteforce(edges):
    P = to_markov(abstracted(edges), STATES).P
    for (i, src), (j, dst) in product(enumerate(STATES), repeat=2):
        out = sum(c for (s, _), c in edges.items() if s == src)
        expected = edges.get((src, dst), 0) / out if out else 0.0
        assert P[i, j] == pytest.approx(expected, abs=1e-12)


def test_static_graph_chain_matches_dynamic_shape(static_call_tree, pkgs):
    space = state_space(FAMILY, pkgs)
    vec = features(to_markov(abstract_graph(static_call_tree, FAMILY, pkgs), space))
    assert vec.app_id == "chefjudy"
    assert np.count_nonzero(vec.values) == 3


def test_raw_graph_total_preserved_after_aggregate():
    g = CallGraph(app_id="x", origin=Origin.STATIC)
    assert aggregate([g, g]).total == 0
