"""
JSONL utilities for PDE corpora.

One JSON record per line, validated as it is read.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional


def read_jsonl(input_path: Path, validate: Optional[Callable[[Dict[str, Any]], None]] = None) -> Iterator[Dict[str, Any]]:
    """
    Read JSONL file line by line.

    Args:
        input_path: Path to input file
        validate: Optional validation function that raises on invalid record

    Yields:
        Dictionaries from JSONL file
    """
    if not input_path.exists():
        raise FileNotFoundError(f"JSONL file not found: {input_path}")

    with open(input_path, "r") as f:
        for line_num, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("//"):
                continue

            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"Invalid JSON on line {line_num}: {e}") from e

            if validate:
                try:
                    validate(record)
                except Exception as e:
                    raise ValueError(f"Validation failed on line {line_num}: {e}") from e

            yield record


def write_jsonl(data: List[Dict[str, Any]], output_path: Path) -> int:
    """Write records with sorted keys; returns the number written."""
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w") as f:
        for record in data:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return len(data)


def count_jsonl(input_path: Path) -> int:
    """Count records in JSONL file."""
    if not input_path.exists():
        return 0

    count = 0
    with open(input_path, "r") as f:
        for line in f:
            if line.strip() and not line.lstrip().startswith("//"):
                count += 1
    return count


def validate_pde_record(record: Dict[str, Any]) -> None:
    """Validate a corpus record: an evolution equation plus its expected verdicts."""
    required_fields = ["name", "order", "F"]

    for field in required_fields:
        if field not in record:
            raise ValueError(f"Missing required field: {field}")

    if not isinstance(record["order"], int) or record["order"] < 1:
        raise ValueError(f"order must be a positive integer, got {record['order']!r}")

    expected = record.get("expected", {})
    for key in expected:
        if key not in ("frobenius", "closed", "F_tilde"):
            raise ValueError(f"Unknown expected verdict: {key}")
