"""
Problem documents and reports.

Both are pydantic models serialized as JSON with sorted keys. Expressions are strings in the
grammar of ``edswaves.symcore``. Field-by-field descriptions live in docs/DOCUMENTS.md.

Usage:
    doc = ProblemDocument.model_validate_json(path.read_text())
    report = Report(...)
    path.write_text(dump_json(report))
"""

import json
from enum import Enum
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .config import get_settings

SCHEMA_VERSION = "eds-waves/1"

Number = Union[int, float, str]


class Stage(str, Enum):
    """Pipeline stages in execution order"""

    PARSE = "parse"
    REDUCE = "reduce"
    CONTACT = "contact"
    VESSIOT = "vessiot"
    INTEGRABILITY = "integrability"
    STRUCTURE = "structure"
    EXTRACTION = "extraction"
    CANDIDATES = "candidates"
    DENSITIES = "densities"
    NUMERIC = "numeric"


STAGE_ORDER = [s.value for s in Stage]


class DensityClass(str, Enum):
    FIRST_INTEGRAL_COMPOSITE = "first-integral-composite"
    TW_FLUX_TRIVIAL = "tw-flux-trivial"
    CONSERVED_ON_PDE = "conserved-on-pde"
    NONE = "none"


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------------------------------------------------------------------
# Problem documents
# ---------------------------------------------------------------------------


class Expectation(StrictModel):
    """Verdicts the document author expects; each one given becomes a check in the report"""

    frobenius: Optional[bool] = None
    closed: Optional[bool] = None
    F_tilde: Optional[str] = None


class PDESpec(StrictModel):
    """u_t = F with F over t, x, u, u_x, ..., u_{order x} and the parameters"""

    order: int = Field(ge=1)
    F: str
    params: list[str] = Field(default_factory=lambda: ["c"])
    wave_speed: str = "c"
    expect: Optional[Expectation] = None


class GridSpec(StrictModel):
    """Rectangular grid; defaults come from Settings when fields are omitted"""

    x_range: tuple[float, float] = Field(default_factory=lambda: get_settings().x_range)
    t_range: tuple[float, float] = Field(default_factory=lambda: get_settings().t_range)
    nx: int = Field(default_factory=lambda: get_settings().grid_nx, ge=2)
    nt: int = Field(default_factory=lambda: get_settings().grid_nt, ge=1)

    @field_validator("x_range", "t_range")
    @classmethod
    def _ordered(cls, value: tuple[float, float]) -> tuple[float, float]:
        if value[0] > value[1]:
            raise ValueError(f"range must be increasing, got {value}")
        return value


class IntegralSpec(StrictModel):
    """A candidate first integral; written on the jet chart, u_x is eliminated before checking"""

    name: str
    expr: str
    expect: Literal["verified", "rejected"] = "verified"


class DensitySpec(StrictModel):
    """A density T with optional flux X"""

    name: str
    T: str
    X: Optional[str] = None
    expect: Optional[DensityClass] = None


class SolutionSpec(StrictModel):
    """A closed-form candidate u(x, t) with values for every parameter it uses"""

    name: str
    u: str
    constants: dict[str, Number] = Field(default_factory=dict)
    grid: Optional[GridSpec] = None
    integrals: Optional[list[str]] = None
    densities: list[str] = Field(default_factory=list)


class Candidates(StrictModel):
    first_integrals: list[IntegralSpec] = Field(default_factory=list)
    densities: list[DensitySpec] = Field(default_factory=list)
    solutions: list[SolutionSpec] = Field(default_factory=list)


class FieldSpec(StrictModel):
    """A vector field on the reduced chart: coordinate name -> coefficient expression"""

    name: str
    coefficients: dict[str, str]


class ScaleSpec(StrictModel):
    """Rescale ``field`` by a power of the first integral ``integral``"""

    field: str
    integral: str


class StructureSpec(StrictModel):
    """Fields of a proposed solvable structure and the order to try them in"""

    fields: list[FieldSpec]
    order: list[str] = Field(default_factory=list)
    scale: Optional[ScaleSpec] = None
    expect_error: Optional[str] = None

    def ordered(self) -> list[FieldSpec]:
        by_name = {f.name: f for f in self.fields}
        if not self.order:
            return list(self.fields)
        missing = [n for n in self.order if n not in by_name]
        if missing:
            raise ValueError(f"structure order names unknown fields {missing}")
        return [by_name[n] for n in self.order]


class ProblemDocument(StrictModel):
    schema_version: str = SCHEMA_VERSION
    name: str
    description: str = ""
    convention: Optional[str] = None
    pde: PDESpec
    candidates: Candidates = Field(default_factory=Candidates)
    structure: Optional[StructureSpec] = None

    @field_validator("schema_version")
    @classmethod
    def _known_version(cls, value: str) -> str:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {value!r}, expected {SCHEMA_VERSION!r}")
        return value


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class StageError(StrictModel):
    stage: str
    code: str
    message: str
    details: dict[str, Any] = Field(default_factory=dict)


class Verdict(StrictModel):
    """A boolean verdict and the identity that decided it"""

    passed: bool
    identity: str
    residual: Optional[str] = None


class ReductionReport(StrictModel):
    pde: str
    chart: list[str]
    F_tilde: str
    contact: list[str] = Field(default_factory=list)
    omega: Optional[str] = None
    V1: Optional[str] = None
    V2: Optional[str] = None
    vessiot_sum: Optional[Verdict] = None
    vessiot_bracket: Optional[Verdict] = None


class IntegrabilityReport(StrictModel):
    method: str
    frobenius: Verdict
    closed: Verdict


class ChainReport(StrictModel):
    omegas: list[str]
    closure: list[bool]
    potentials: list[Optional[str]]


class FactorReport(StrictModel):
    order: list[str]
    forms: list[str]
    last: str
    value: str
    moreover: Optional[bool] = None
    potential: Optional[str] = None


class StructureReport(StrictModel):
    order: list[str]
    verified: bool
    factors: list[str] = Field(default_factory=list)
    witness: Optional[str] = None
    witness_coefficients: list[str] = Field(default_factory=list)
    scale_exponent: Optional[str] = None
    chain: Optional[ChainReport] = None
    closed_factors: Optional[FactorReport] = None
    error: Optional[StageError] = None


class IntegralReport(StrictModel):
    name: str
    expr: str
    restricted: str
    provenance: str
    verified: bool
    identity: str = "V1(f) = 0 and V2(f) = 0"
    generator: Optional[int] = None
    residual: Optional[str] = None
    constraint_form: Optional[bool] = None
    closed_factor: Optional[bool] = None
    recovered: Optional[str] = None
    error: Optional[StageError] = None


class DensityReport(StrictModel):
    name: str
    T: str
    X: Optional[str] = None
    classification: DensityClass
    residual: Optional[str] = None
    conservation: Optional[Verdict] = None
    functional_dependence: Optional[bool] = None


class GridReport(StrictModel):
    """Numeric check of one candidate solution"""

    name: str
    grid: GridSpec
    constants: dict[str, float]
    max_residual: float
    location: Optional[tuple[float, float]] = None
    skipped: int = 0
    deviations: dict[str, float] = Field(default_factory=dict)
    levels: dict[str, float] = Field(default_factory=dict)
    motion: dict[str, float] = Field(default_factory=dict)
    tolerance: float
    passed: bool


class Check(StrictModel):
    """One pass/fail item; the exit code is 0 iff every check passes"""

    name: str
    passed: bool
    detail: str = ""


class Report(StrictModel):
    schema_version: str = SCHEMA_VERSION
    document: str
    convention: Optional[str] = None
    provenance: dict[str, Any]
    stages: list[str]
    reduction: Optional[ReductionReport] = None
    theorem31: Optional[IntegrabilityReport] = None
    frobenius_direct: Optional[IntegrabilityReport] = None
    agreement: Optional[Verdict] = None
    structure: Optional[StructureReport] = None
    integrals: list[IntegralReport] = Field(default_factory=list)
    densities: list[DensityReport] = Field(default_factory=list)
    grids: list[GridReport] = Field(default_factory=list)
    diagnostics: list[str] = Field(default_factory=list)
    errors: list[StageError] = Field(default_factory=list)
    checks: list[Check] = Field(default_factory=list)
    passed: bool = True


def dump_json(model: BaseModel) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"
