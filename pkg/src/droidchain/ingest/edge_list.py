from __future__ import annotations

from pathlib import Path

from src.droidchain.errors import EmptySignature, InvalidSignature, MalformedLine, NonPositiveCount
from src.droidchain.ingest.files import decode_text, iter_content_lines, read_text
from src.droidchain.ingest.graph import CallGraph, Origin
from src.droidchain.ingest.signatures import MethodSig


def _sig(line_no: int, raw: str) -> MethodSig:
    if not raw.strip():
        raise EmptySignature(line_no)
    try:
        return MethodSig.parse(raw)
    except InvalidSignature as exc:
        raise MalformedLine(line_no, str(exc)) from exc


def parse_edge_list(text: str | bytes, app_id: str, origin: Origin = Origin.STATIC) -> CallGraph:
    """Parse ``<caller>\\t<callee>\\t<count>`` lines; repeated edges are summed."""
    graph = CallGraph(app_id=app_id, origin=Origin(origin))
    for line_no, line in iter_content_lines(decode_text(text)):
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedLine(line_no, f"expected 3 tab-separated fields, got {len(parts)}")
        caller = _sig(line_no, parts[0])
        callee = _sig(line_no, parts[1])
        try:
            count = int(parts[2].strip())
        except ValueError as exc:
            raise MalformedLine(line_no, f"count is not an integer: {parts[2]!r}") from exc
        if count <= 0:
            raise NonPositiveCount(line_no, f"count={count}")
        graph.add(caller, callee, count)
    return graph


def serialize_edge_list(graph: CallGraph) -> str:
    lines = [
        f"{caller.raw}\t{callee.raw}\t{count}\n"
        for (caller, callee), count in sorted(graph.edges.items())
        if count > 0
    ]
    return "".join(lines)


def read_edge_list_file(path: Path | str, app_id: str, origin: Origin = Origin.STATIC) -> CallGraph:
    return parse_edge_list(read_text(path), app_id, origin)
