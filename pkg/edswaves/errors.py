"""
Error hierarchy for eds-waves.

Every error carries a stable ``code`` that the pipeline copies verbatim into reports,
so report consumers can match on it without parsing messages.
"""

from typing import Any, Optional


class EdsError(Exception):
    """Base class for all eds-waves errors."""

    code = "EDS_ERROR"

    def to_dict(self) -> dict[str, Any]:
        """Structured form used inside reports."""
        return {"code": self.code, "message": str(self)}


# symcore


class ExpressionSyntaxError(EdsError, ValueError):
    """Malformed expression text; ``offset`` is the 0-based character position."""

    code = "SYNTAX_ERROR"

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")

    def to_dict(self) -> dict[str, Any]:
        return {**super().to_dict(), "offset": self.offset}


class UnknownIdentifier(EdsError, KeyError):
    code = "UNKNOWN_IDENTIFIER"

    def __init__(self, name: str, offset: Optional[int] = None):
        self.name = name
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"unknown identifier '{name}'{where}")

    def __str__(self) -> str:
        # KeyError would otherwise quote the message
        return self.args[0]

    def to_dict(self) -> dict[str, Any]:
        return {**super().to_dict(), "name": self.name, "offset": self.offset}


class NonRationalExpression(EdsError, ValueError):
    code = "NON_RATIONAL"


class Undecidable(EdsError):
    """Elementary nodes survived structural simplification; no zero verdict is given."""

    code = "UNDECIDABLE"

    def __init__(self, message: str, residual: str = ""):
        self.residual = residual
        super().__init__(message)


class PoleError(EdsError, ZeroDivisionError):
    code = "POLE"


class DomainError(EdsError, ValueError):
    code = "DOMAIN"


# exterior


class ChartMismatch(EdsError, ValueError):
    code = "CHART_MISMATCH"


class DegreeOverflow(EdsError, ValueError):
    code = "DEGREE_OVERFLOW"


class RankDeficient(EdsError):
    code = "RANK_DEFICIENT"

    def __init__(self, message: str, rank: int = -1, expected: int = -1):
        self.rank = rank
        self.expected = expected
        super().__init__(message)


class InconsistentVerdict(EdsError):
    """Two independent decision procedures disagreed."""

    code = "INCONSISTENT_VERDICT"


# jettw


class InvalidPDE(EdsError, ValueError):
    code = "INVALID_PDE"


class NonAffineInUx(EdsError):
    code = "NON_AFFINE_IN_UX"


class DegenerateReduction(EdsError):
    code = "DEGENERATE_REDUCTION"


class OrderTooLow(EdsError):
    code = "ORDER_TOO_LOW"


# solvable


class NotSimple(EdsError):
    code = "NOT_SIMPLE"


class ConstantCandidate(EdsError):
    """A first-integral candidate with zero differential."""

    code = "CONSTANT_CANDIDATE"


class NotDirectSum(EdsError):
    """A combination of the structure fields lies in ker Omega.

    Attributes:
        coefficients: printed coefficient of each field in the witness combination
        witness: the combination itself as a vector field (may be None for rank failures)
    """

    code = "NOT_DIRECT_SUM"

    def __init__(self, message: str, coefficients: Optional[list[str]] = None, witness: Any = None):
        self.coefficients = coefficients or []
        self.witness = witness
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        return {**super().to_dict(), "witness_coefficients": self.coefficients, "witness": str(self.witness) if self.witness is not None else None}


class NotProportional(EdsError):
    code = "NOT_PROPORTIONAL"

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"Lie derivative condition {index} is not a multiple of its form")

    def to_dict(self) -> dict[str, Any]:
        return {**super().to_dict(), "index": self.index}


class NotClosed(EdsError):
    code = "NOT_CLOSED"


class HypothesisFailed(EdsError):
    code = "HYPOTHESIS_FAILED"

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"strengthened hypothesis {index} fails")

    def to_dict(self) -> dict[str, Any]:
        return {**super().to_dict(), "index": self.index}


class NotEigen(EdsError):
    code = "NOT_EIGEN"


class NonPolynomial(EdsError):
    code = "NON_POLYNOMIAL"


class NotAnnihilated(EdsError):
    code = "NOT_ANNIHILATED"

    def __init__(self, generator: int, residual: str):
        self.generator = generator
        self.residual = residual
        super().__init__(f"generator {generator} does not annihilate the candidate; residual {residual}")

    def to_dict(self) -> dict[str, Any]:
        return {**super().to_dict(), "generator": self.generator, "residual": self.residual}


# cli


class DocumentError(EdsError, ValueError):
    code = "DOCUMENT_ERROR"
