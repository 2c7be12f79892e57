from __future__ import annotations

import pytest

from src.droidchain.errors import DuplicateAppId, IOFailure, ManifestFormatError, MissingArtifacts, UnknownLabel
from src.droidchain.ingest.manifest import SampleLabel, load_manifest, write_manifest

HEADER = "app_id,label,declared_package,static_graph,static_methods,traces\n"


def test_single_record(tmp_path, write_file):
    path = write_file(tmp_path / "data" / "manifest.csv", HEADER + "a1,malware,com.x,g.tsv,m.txt,t1.log;t2.log\n")
    manifest = load_manifest(path)
    assert len(manifest) == 1
    record = manifest.records[0]
    assert record.label is SampleLabel.MALWARE
    assert record.declared_package == "com.x"
    assert record.trace_paths == (tmp_path / "data" / "t1.log", tmp_path / "data" / "t2.log")
    assert record.static_graph_path == tmp_path / "data" / "g.tsv"
    assert record.static_method_set_path == tmp_path / "data" / "m.txt"
    assert record.component_classes_path is None


def test_duplicate_app_id(tmp_path, write_file):
    path = write_file(tmp_path / "m.csv", HEADER + "a1,benign,com.x,g.tsv,,\na1,malware,com.y,h.tsv,,\n")
    with pytest.raises(DuplicateAppId) as info:
        load_manifest(path)
    assert info.value.app_id == "a1"


def test_unknown_label(tmp_path, write_file):
    path = write_file(tmp_path / "m.csv", HEADER + "a1,suspicious,com.x,g.tsv,,\n")
    with pytest.raises(UnknownLabel):
        load_manifest(path)


def test_missing_artifacts(tmp_path, write_file):
    path = write_file(tmp_path / "m.csv", HEADER + "a1,benign,com.x,,m.txt,\n")
    with pytest.raises(MissingArtifacts):
        load_manifest(path)


def test_missing_column(tmp_path, write_file):
    path = write_file(tmp_path / "m.csv", "app_id,label\na1,benign\n")
    with pytest.raises(ManifestFormatError):
        load_manifest(path)


def test_missing_file(tmp_path):
    with pytest.raises(IOFailure):
        load_manifest(tmp_path / "absent.csv")


def test_label_case_and_trace_only_record(tmp_path, write_file):
    path = write_file(tmp_path / "m.csv", HEADER + "a2,Benign,com.x,,,t.log\n")
    record = load_manifest(path).records[0]
    assert record.label is SampleLabel.BENIGN
    assert record.static_graph_path is None
    assert record.trace_paths == (tmp_path / "t.log",)


def test_write_then_load(tmp_path, write_file):
    src = write_file(
        tmp_path / "m.csv",
        "app_id,label,declared_package,static_graph,static_methods,traces,components\n"
        "a1,malware,com.x,apps/a1/g.tsv,apps/a1/m.txt,apps/a1/t1.log;apps/a1/t2.log,apps/a1/c.txt\n",
    )
    manifest = load_manifest(src)
    out = write_manifest(manifest, tmp_path / "copy.csv")
    assert out.read_text(encoding="utf-8") == src.read_text(encoding="utf-8")
    assert load_manifest(out).records == manifest.records
