from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

import pandas as pd

from src.droidchain.errors import (
    DuplicateAppId,
    IOFailure,
    ManifestFormatError,
    MissingArtifacts,
    UnknownLabel,
)

LOG = logging.getLogger(__name__)

REQUIRED_COLUMNS = ["app_id", "label", "declared_package", "static_graph", "static_methods", "traces"]
OPTIONAL_COLUMNS = ["components"]


class SampleLabel(str, Enum):
    BENIGN = "benign"
    MALWARE = "malware"

    @property
    def positive(self) -> bool:
        return self is SampleLabel.MALWARE


@dataclass(frozen=True)
class AppRecord:
    app_id: str
    label: SampleLabel
    declared_package: str
    static_graph_path: Optional[Path] = None
    trace_paths: tuple[Path, ...] = ()
    static_method_set_path: Optional[Path] = None
    component_classes_path: Optional[Path] = None


@dataclass
class DatasetManifest:
    records: list[AppRecord] = field(default_factory=list)
    root: Optional[Path] = None

    def __iter__(self) -> Iterator[AppRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self) -> dict[str, AppRecord]:
        return {record.app_id: record for record in self.records}


def _resolve(root: Path, raw: str) -> Optional[Path]:
    raw = (raw or "").strip()
    if not raw:
        return None
    p = Path(raw)
    return p if p.is_absolute() else root / p


def load_manifest(path: Path | str) -> DatasetManifest:
    """Load ``app_id,label,declared_package,static_graph,static_methods,traces`` CSV.

    ``traces`` holds ``;``-separated paths; relative paths resolve against the
    manifest's directory. An optional ``components`` column names a sidecar file
    of component class FQNs.
    """
    p = Path(path)
    if not p.exists():
        raise IOFailure(f"manifest not found: {p}")
    try:
        df = pd.read_csv(p, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ManifestFormatError(f"cannot parse manifest {p}: {exc}") from exc
    df.columns = [str(col).strip() for col in df.columns]
    missing = [col for col in REQUIRED_COLUMNS if col not in df.columns]
    if missing:
        raise ManifestFormatError(f"manifest {p} missing columns: {missing}")

    root = p.parent
    records: list[AppRecord] = []
    seen: set[str] = set()
    for row in df.to_dict(orient="records"):
        app_id = str(row["app_id"]).strip()
        if not app_id:
            raise ManifestFormatError(f"manifest {p} has a row without app_id")
        if app_id in seen:
            raise DuplicateAppId(app_id)
        seen.add(app_id)
        raw_label = str(row["label"]).strip().lower()
        try:
            label = SampleLabel(raw_label)
        except ValueError as exc:
            raise UnknownLabel(raw_label, app_id) from exc
        traces = tuple(
            resolved
            for resolved in (_resolve(root, item) for item in str(row["traces"]).split(";"))
            if resolved is not None
        )
        static_graph = _resolve(root, row["static_graph"])
        if static_graph is None and not traces:
            raise MissingArtifacts(app_id)
        records.append(
            AppRecord(
                app_id=app_id,
                label=label,
                declared_package=str(row["declared_package"]).strip(),
                static_graph_path=static_graph,
                trace_paths=traces,
                static_method_set_path=_resolve(root, row["static_methods"]),
                component_classes_path=_resolve(root, row.get("components", "")),
            )
        )
    LOG.debug("Manifest loaded path=%s records=%s", p, len(records))
    return DatasetManifest(records=records, root=root)


def _relative(root: Path, target: Optional[Path]) -> str:
    if target is None:
        return ""
    try:
        return Path(os.path.relpath(target, root)).as_posix()
    except ValueError:
        return str(target)


def write_manifest(manifest: DatasetManifest, path: Path | str) -> Path:
    p = Path(path)
    root = p.parent
    rows = [
        {
            "app_id": r.app_id,
            "label": r.label.value,
            "declared_package": r.declared_package,
            "static_graph": _relative(root, r.static_graph_path),
            "static_methods": _relative(root, r.static_method_set_path),
            "traces": ";".join(_relative(root, t) for t in r.trace_paths),
            "components": _relative(root, r.component_classes_path),
        }
        for r in manifest.records
    ]
    frame = pd.DataFrame(rows, columns=REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
    root.mkdir(parents=True, exist_ok=True)
    frame.to_csv(p, index=False, lineterminator="\n")
    return p
