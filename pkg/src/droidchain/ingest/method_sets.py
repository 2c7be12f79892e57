from __future__ import annotations

from pathlib import Path

from src.droidchain.errors import InvalidSignature, MalformedLine
from src.droidchain.ingest.files import iter_content_lines, read_text
from src.droidchain.ingest.graph import CallGraph
from src.droidchain.ingest.signatures import MethodSig


def parse_method_set(text: str) -> frozenset[MethodSig]:
    out: set[MethodSig] = set()
    for line_no, line in iter_content_lines(text):
        try:
            out.add(MethodSig.parse(line))
        except InvalidSignature as exc:
            raise MalformedLine(line_no, str(exc)) from exc
    return frozenset(out)


def read_method_set(path: Path | str) -> frozenset[MethodSig]:
    return parse_method_set(read_text(path))


def read_class_set(path: Path | str) -> frozenset[str]:
    return frozenset(line.strip() for _, line in iter_content_lines(read_text(path)))


def serialize_method_set(methods) -> str:
    return "".join(f"{sig.raw}\n" for sig in sorted(methods))


def graph_methods(*graphs: CallGraph) -> frozenset[MethodSig]:
    out: set[MethodSig] = set()
    for graph in graphs:
        out |= graph.nodes
    return frozenset(out)
