from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List

from src.droidchain.errors import EmptySignature, InvalidSignature, MalformedLine
from src.droidchain.ingest.files import decode_text, iter_content_lines, read_text
from src.droidchain.ingest.graph import CallGraph, Origin
from src.droidchain.ingest.signatures import MethodSig

LOG = logging.getLogger(__name__)


class Action(str, Enum):
    ENTER = "enter"
    EXIT = "exit"


@dataclass(frozen=True)
class TraceEvent:
    thread_id: int
    action: Action
    method: MethodSig
    seq_no: int


def _parse_line(line_no: int, line: str, seq_no: int) -> TraceEvent:
    parts = line.split("\t")
    if len(parts) != 3:
        raise MalformedLine(line_no, f"expected 3 tab-separated fields, got {len(parts)}")
    raw_tid, raw_action, raw_sig = parts
    try:
        thread_id = int(raw_tid.strip())
    except ValueError as exc:
        raise MalformedLine(line_no, f"thread id is not an integer: {raw_tid!r}") from exc
    try:
        action = Action(raw_action.strip().lower())
    except ValueError as exc:
        raise MalformedLine(line_no, f"unknown action {raw_action!r}") from exc
    if not raw_sig.strip():
        raise EmptySignature(line_no)
    try:
        method = MethodSig.parse(raw_sig)
    except InvalidSignature as exc:
        raise MalformedLine(line_no, str(exc)) from exc
    return TraceEvent(thread_id=thread_id, action=action, method=method, seq_no=seq_no)


def parse_trace_log(text: str | bytes) -> List[TraceEvent]:
    """Parse ``<thread_id>\\t<enter|exit>\\t<signature>`` lines in file order."""
    events: List[TraceEvent] = []
    for line_no, line in iter_content_lines(decode_text(text)):
        events.append(_parse_line(line_no, line, len(events)))
    return events


def build_call_graph(events: Iterable[TraceEvent], app_id: str) -> CallGraph:
    """Replay enter/exit events on per-thread stacks.

    Orphan exits are skipped and tallied in ``warnings``. An exit that does not
    match the top frame unwinds to the nearest matching frame. Frames still open
    at the end are dropped; their edges stay.
    """
    graph = CallGraph(app_id=app_id, origin=Origin.DYNAMIC)
    stacks: dict[int, list[MethodSig]] = {}
    for event in events:
        stack = stacks.setdefault(event.thread_id, [])
        if event.action is Action.ENTER:
            if stack:
                graph.add(stack[-1], event.method)
            stack.append(event.method)
            continue
        if not stack:
            graph.warnings += 1
            LOG.debug("Orphan exit app_id=%s seq=%s method=%s", app_id, event.seq_no, event.method)
            continue
        if stack[-1] == event.method:
            stack.pop()
            continue
        try:
            depth = len(stack) - 1 - stack[::-1].index(event.method)
        except ValueError:
            graph.warnings += 1
            LOG.debug("Unmatched exit app_id=%s seq=%s method=%s", app_id, event.seq_no, event.method)
            continue
        del stack[depth:]
    open_frames = sum(len(stack) for stack in stacks.values())
    if open_frames:
        LOG.debug("Truncated trace app_id=%s open_frames=%s", app_id, open_frames)
    return graph


def event_methods(events: Iterable[TraceEvent]) -> frozenset[MethodSig]:
    """Every method entered at least once, roots included."""
    return frozenset(e.method for e in events if e.action is Action.ENTER)


def serialize_trace_log(events: Iterable[TraceEvent]) -> str:
    return "".join(f"{e.thread_id}\t{e.action.value}\t{e.method.raw}\n" for e in events)


def read_trace_events(path: Path | str) -> List[TraceEvent]:
    return parse_trace_log(read_text(path))


def read_trace_file(path: Path | str, app_id: str) -> CallGraph:
    return build_call_graph(read_trace_events(path), app_id)
