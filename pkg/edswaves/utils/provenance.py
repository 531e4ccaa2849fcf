"""
Provenance block for reports.

Records which pipeline produced a report and from which input bytes. There are no clocks or
host names here: two runs on the same document must produce identical reports.
"""

import hashlib
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional


@dataclass
class PipelineInfo:
    """Pipeline execution information."""

    name: str
    version: str
    stages: tuple[str, ...] = ()


@dataclass
class InputInfo:
    """The document a report was computed from."""

    name: str
    sha256: str
    convention: Optional[str] = None


def document_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def create_provenance(pipeline_info: PipelineInfo, input_info: InputInfo) -> Dict[str, Any]:
    """
    Create complete provenance dictionary.

    Args:
        pipeline_info: Pipeline information
        input_info: Input document information

    Returns:
        Provenance dictionary
    """
    pipeline = asdict(pipeline_info)
    pipeline["stages"] = list(pipeline_info.stages)
    return {"pipeline": pipeline, "input": asdict(input_info)}
