"""Utilities package: corpus files and report provenance."""

from .jsonl import (
    count_jsonl,
    read_jsonl,
    validate_pde_record,
    write_jsonl,
)
from .provenance import (
    InputInfo,
    PipelineInfo,
    create_provenance,
    document_digest,
)

__all__ = [
    # JSONL utilities
    "read_jsonl",
    "write_jsonl",
    "count_jsonl",
    "validate_pde_record",
    # Provenance utilities
    "PipelineInfo",
    "InputInfo",
    "document_digest",
    "create_provenance",
]
