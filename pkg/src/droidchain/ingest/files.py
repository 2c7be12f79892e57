from __future__ import annotations

from pathlib import Path

from src.droidchain.errors import IOFailure, UndecodableInput


def decode_text(data: bytes | str, source: str = "<input>") -> str:
    if isinstance(data, str):
        return data
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UndecodableInput(f"{source} is not valid UTF-8: {exc}") from exc
    return text.lstrip("﻿")


def read_text(path: Path | str) -> str:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise IOFailure(f"cannot read {p}: {exc}") from exc
    return decode_text(data, str(p))


def iter_content_lines(text: str):
    """Yield ``(line_no, line)`` for non-blank, non-comment lines (1-based).

    Surrounding spaces are dropped; tabs are kept so empty trailing fields survive.
    """
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.removesuffix("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_no, line.strip(" ")
