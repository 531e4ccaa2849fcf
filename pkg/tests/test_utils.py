import pytest

from edswaves.utils import InputInfo, PipelineInfo, count_jsonl, create_provenance, document_digest, read_jsonl, validate_pde_record, write_jsonl

from .conftest import CORPUS


def test_write_then_read(tmp_path):
    path = tmp_path / "nested" / "records.jsonl"
    records = [{"name": "a", "order": 3, "F": "u_xxx"}, {"name": "b", "order": 2, "F": "u_xx", "expected": {"closed": False}}]
    assert write_jsonl(records, path) == 2
    assert list(read_jsonl(path, validate=validate_pde_record)) == records
    assert count_jsonl(path) == 2


def test_comment_lines_are_skipped():
    assert count_jsonl(CORPUS / "theorem31.jsonl") == len(list(read_jsonl(CORPUS / "theorem31.jsonl")))


def test_read_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"name": "a", "order": 3, "F": "u_xxx"}\n{"name": "b"}\n')
    with pytest.raises(ValueError, match="line 2"):
        list(read_jsonl(path, validate=validate_pde_record))
    path.write_text("{not json\n")
    with pytest.raises(ValueError, match="Invalid JSON on line 1"):
        list(read_jsonl(path))


def test_missing_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        list(read_jsonl(tmp_path / "absent.jsonl"))
    assert count_jsonl(tmp_path / "absent.jsonl") == 0


@pytest.mark.parametrize(
    "record",
    [
        {"name": "x", "order": 0, "F": "u"},
        {"name": "x", "order": "3", "F": "u_xxx"},
        {"name": "x", "order": 3, "F": "u_xxx", "expected": {"solvable": True}},
    ],
)
def test_validate_pde_record_rejects(record):
    with pytest.raises(ValueError):
        validate_pde_record(record)


def test_provenance_is_stable():
    digest = document_digest(b"{}")
    assert digest == document_digest(b"{}") != document_digest(b"{ }")
    block = create_provenance(PipelineInfo(name="eds-waves", version="0.1.0", stages=("parse", "reduce")), InputInfo(name="doc", sha256=digest))
    assert block["pipeline"]["stages"] == ["parse", "reduce"]
    assert block["input"] == {"name": "doc", "sha256": digest, "convention": None}
