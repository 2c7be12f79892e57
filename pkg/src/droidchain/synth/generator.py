from __future__ import annotations

import logging
import math
from collections import Counter
from pathlib import Path
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from src.droidchain.errors import IOFailure
from src.droidchain.ingest.edge_list import serialize_edge_list
from src.droidchain.ingest.graph import CallGraph, Origin
from src.droidchain.ingest.manifest import AppRecord, DatasetManifest, write_manifest
from src.droidchain.ingest.method_sets import graph_methods, serialize_method_set
from src.droidchain.ingest.signatures import MethodSig
from src.droidchain.ingest.traces import Action, TraceEvent, serialize_trace_log
from src.droidchain.synth.profiles import APP_STATE, OBFUSCATED_STATE, ProfileSpec

LOG = logging.getLogger(__name__)

_U64 = (1 << 64) - 1
_PERTURB_STREAM = 0x9E7

# Calls every app makes regardless of label; spurious edges land here.
COMMON_API_METHODS = (
    "java.lang.Object.toString",
    "java.lang.String.valueOf",
    "java.util.ArrayList.add",
    "android.util.Log.d",
    "android.os.Handler.post",
    "android.content.Context.getString",
)

_API_CLASSES = ("Helper", "Manager", "Builder")


def app_package(index: int) -> str:
    return f"com.synthetic.app{index:05d}"


def _state_classes(state: str, app_pkg: str) -> list[str]:
    if state == APP_STATE:
        return [f"{app_pkg}.Worker{c}" for c in range(3)]
    if state == OBFUSCATED_STATE:
        return [f"a.b.c{c}" for c in range(3)]
    return [f"{state}.{name}" for name in _API_CLASSES]


def method_pool(spec: ProfileSpec, app_pkg: str) -> dict[str, list[MethodSig]]:
    """Fabricated methods per chain state; ``n_methods`` is split as evenly as possible."""
    states = spec.states
    base, extra = divmod(spec.n_methods, len(states))
    pool: dict[str, list[MethodSig]] = {}
    for pos, state in enumerate(states):
        classes = _state_classes(state, app_pkg)
        size = base + (1 if pos < extra else 0)
        pool[state] = [MethodSig.parse(f"{classes[i % len(classes)]}.call{i}") for i in range(size)]
    return pool


def sample_static_graph(
    spec: ProfileSpec,
    app_id: str,
    app_pkg: str,
    rng: np.random.Generator,
) -> CallGraph:
    """Random walk over the generator chain starting from the app's entry point."""
    pool = method_pool(spec, app_pkg)
    graph = CallGraph(app_id=app_id, origin=Origin.STATIC)
    current = entry_point(app_pkg)
    state = spec.start
    for _ in range(spec.walk_length):
        candidates = pool[state]
        callee = candidates[int(rng.integers(len(candidates)))]
        graph.add(current, callee)
        current = callee
        row = spec.generator_chain[state]
        targets = list(row)
        probs = np.asarray([row[t] for t in targets], dtype=np.float64)
        state = targets[int(rng.choice(len(targets), p=probs / probs.sum()))]
    return graph


def entry_point(app_pkg: str) -> MethodSig:
    return MethodSig.parse(f"{app_pkg}.MainActivity.onCreate")


def unreached_method(app_pkg: str) -> MethodSig:
    return MethodSig.parse(f"{app_pkg}.MainActivity.onLowMemory")


def perturb(
    graph: CallGraph,
    noise: float,
    seed: int,
    pool: Sequence[str] = COMMON_API_METHODS,
) -> CallGraph:
    """Rescale a ``noise`` share of edge counts and add about as many spurious edges.

    With ``noise == 0`` the result equals the input.
    """
    rng = np.random.default_rng([seed & _U64, _PERTURB_STREAM])
    out = CallGraph(app_id=graph.app_id, origin=graph.origin, warnings=graph.warnings)
    ordered = sorted(graph.edges.items())
    for edge, count in ordered:
        if rng.random() < noise:
            count = max(1, int(round(count * rng.uniform(0.25, 4.0))))
        out.edges[edge] += count
    if noise <= 0 or not ordered:
        return out
    sources = sorted(graph.nodes)
    sinks = sorted(set(sources) | {MethodSig.parse(raw) for raw in pool})
    for _ in ordered:
        if rng.random() < noise:
            src = sources[int(rng.integers(len(sources)))]
            dst = sinks[int(rng.integers(len(sinks)))]
            out.add(src, dst)
    return out


def dynamic_edges(static: CallGraph, fraction: float, rng: np.random.Generator) -> Counter:
    """Subset of static edges with runtime multipliers; strict subset while fraction < 1."""
    ordered = sorted(static.edges)
    n = len(ordered)
    if n == 0:
        return Counter()
    keep = max(1, math.ceil(fraction * n))
    if fraction < 1.0 and n > 1:
        keep = min(keep, n - 1)
    picked = sorted(int(i) for i in rng.choice(n, size=keep, replace=False))
    out: Counter = Counter()
    for i in picked:
        edge = ordered[i]
        out[edge] = static.edges[edge] * int(rng.integers(1, 4))
    return out


def inject_dynamic_only(
    edges: Counter,
    app_pkg: str,
    fraction: float,
    rng: np.random.Generator,
) -> Counter:
    """Add calls into methods that appear only at runtime."""
    if fraction <= 0 or not edges:
        return edges
    callers = sorted({caller for caller, _ in edges} | {callee for _, callee in edges})
    n_new = max(1, int(round(fraction * len(callers))))
    out = Counter(edges)
    for j in range(n_new):
        loaded = MethodSig.parse(f"{app_pkg}.Loaded{j}.run")
        caller = callers[int(rng.integers(len(callers)))]
        out[(caller, loaded)] += int(rng.integers(1, 4))
    return out


def split_runs(edges: Counter, n_runs: int, rng: np.random.Generator) -> list[Counter]:
    runs = [Counter() for _ in range(n_runs)]
    share = [1.0 / n_runs] * n_runs
    for edge in sorted(edges):
        for run, c in zip(runs, rng.multinomial(edges[edge], share)):
            if c:
                run[edge] += int(c)
    return [run for run in runs if run] or [Counter(edges)]


def trace_events(edges: Counter) -> list[TraceEvent]:
    """Enter/exit stream that replays back into exactly ``edges``.

    Each caller gets its own block: ``enter caller``, one enter/exit pair per
    invocation of each callee, ``exit caller``. Blocks alternate between two threads.
    """
    by_caller: dict[MethodSig, list[tuple[MethodSig, int]]] = {}
    for (caller, callee), count in sorted(edges.items()):
        by_caller.setdefault(caller, []).append((callee, count))
    events: list[TraceEvent] = []

    def emit(tid: int, action: Action, method: MethodSig) -> None:
        events.append(TraceEvent(thread_id=tid, action=action, method=method, seq_no=len(events)))

    for block, (caller, callees) in enumerate(by_caller.items()):
        tid = 1 + block % 2
        emit(tid, Action.ENTER, caller)
        for callee, count in callees:
            for _ in range(count):
                emit(tid, Action.ENTER, callee)
                emit(tid, Action.EXIT, callee)
        emit(tid, Action.EXIT, caller)
    return events


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc
    return path


def generate_app(spec: ProfileSpec, index: int, app_id: str, seed: int, out_dir: Path) -> AppRecord:
    rng = np.random.default_rng([seed & _U64, index])
    app_pkg = app_package(index)
    static = sample_static_graph(spec, app_id, app_pkg, rng)
    static = perturb(static, spec.noise, int(rng.integers(0, 2**63 - 1)))
    edges = dynamic_edges(static, spec.dynamic_subset_fraction, rng)
    edges = inject_dynamic_only(edges, app_pkg, spec.dynamic_only_fraction, rng)
    n_runs = int(rng.integers(1, spec.max_runs + 1))
    runs = split_runs(edges, n_runs, rng)

    declared = app_pkg
    if rng.random() < spec.declared_mismatch_fraction:
        declared = f"com.vendor.release{index:05d}"

    app_dir = out_dir / "apps" / app_id
    static_methods = set(graph_methods(static)) | {unreached_method(app_pkg)}
    trace_paths = tuple(
        _write(app_dir / f"trace_{n}.log", serialize_trace_log(trace_events(run)))
        for n, run in enumerate(runs, start=1)
    )
    return AppRecord(
        app_id=app_id,
        label=spec.label,
        declared_package=declared,
        static_graph_path=_write(app_dir / "static.tsv", serialize_edge_list(static)),
        trace_paths=trace_paths,
        static_method_set_path=_write(app_dir / "methods.txt", serialize_method_set(static_methods)),
        component_classes_path=_write(app_dir / "components.txt", f"{app_pkg}.MainActivity\n"),
    )


def generate_corpus(
    n_benign: int,
    n_malware: int,
    benign_spec: ProfileSpec,
    malware_spec: ProfileSpec,
    seed: int,
    out_dir: Path | str,
    *,
    jobs: int = 1,
) -> DatasetManifest:
    """Write a labelled corpus and its ``manifest.csv`` under ``out_dir``."""
    out = Path(out_dir)
    plan: list[tuple[ProfileSpec, int, str]] = [
        (benign_spec, i, f"benign_{i:04d}") for i in range(n_benign)
    ] + [
        (malware_spec, n_benign + i, f"malware_{i:04d}") for i in range(n_malware)
    ]
    LOG.info("Generating corpus out=%s benign=%s malware=%s seed=%s", out, n_benign, n_malware, seed)
    records = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(generate_app)(spec, index, app_id, seed, out) for spec, index, app_id in plan
    )
    manifest = DatasetManifest(records=list(records), root=out)
    try:
        write_manifest(manifest, out / "manifest.csv")
    except OSError as exc:
        raise IOFailure(f"cannot write manifest under {out}: {exc}") from exc
    return manifest

