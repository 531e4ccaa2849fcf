"""
Exact expression layer.

Two kinds of expression flow through eds-waves:

- ``RatExpr``: a quotient of two multivariate polynomials with rational coefficients, built on
  ``sympy.polys.rings.PolyRing`` over ``QQ``. All geometry (form and field coefficients) uses it.
  Equality is decided by cross-multiplying and expanding, so reduction to lowest terms is only a
  size optimization (``Settings.gcd_reduce``).
- ``ElemExpr``: a sympy expression tree that may also contain atan, log, exp, sech, tanh and
  rational powers. Differentiation is total on it; when no elementary node survives it converts
  losslessly to ``RatExpr``.

The text grammar is documented in docs/GRAMMAR.md; ``to_text`` prints in the same grammar.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Union

import sympy as sp
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing

from .config import get_settings
from .errors import ChartMismatch, DomainError, ExpressionSyntaxError, NonRationalExpression, PoleError, Undecidable, UnknownIdentifier

logger = logging.getLogger(__name__)

ElemExpr = sp.Expr
Scalar = Union[int, Fraction, sp.Rational]

NAME_PATTERN = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate names plus parameters (constants such as the wave speed).

    Attributes:
        coords: coordinate names; exterior derivatives run over these only
        params: parameter names; they live in the coefficient field
    """

    coords: tuple[str, ...]
    params: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "params", tuple(self.params))
        if not self.coords:
            raise ValueError("a chart needs at least one coordinate")
        names = self.coords + self.params
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in chart {names}")
        for name in names:
            if not NAME_PATTERN.match(name):
                raise ValueError(f"invalid name '{name}'")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return self.coords + self.params

    @cached_property
    def symbols(self) -> dict[str, sp.Symbol]:
        return {name: sp.Symbol(name) for name in self.names}

    @cached_property
    def ring(self) -> PolyRing:
        return PolyRing(tuple(self.symbols[name] for name in self.names), QQ, lex)

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def __contains__(self, name: object) -> bool:
        return name in self._positions

    def symbol(self, name: str) -> sp.Symbol:
        if name not in self._positions:
            raise UnknownIdentifier(name)
        return self.symbols[name]

    def gen(self, name: str) -> PolyElement:
        if name not in self._positions:
            raise UnknownIdentifier(name)
        return self.ring.gens[self._positions[name]]

    def index(self, name: str) -> int:
        """Position of a coordinate (not a parameter) in chart order."""
        pos = self._positions.get(name)
        if pos is None or pos >= len(self.coords):
            raise UnknownIdentifier(name)
        return pos

    def is_coord(self, name: str) -> bool:
        pos = self._positions.get(name)
        return pos is not None and pos < len(self.coords)

    def extended(self, extra_coords: tuple[str, ...]) -> "Chart":
        """Same parameters, coordinates appended (existing ones are kept in place)."""
        coords = self.coords + tuple(name for name in extra_coords if name not in self.coords)
        return Chart(coords, self.params)

    def __str__(self) -> str:
        params = f"; {', '.join(self.params)}" if self.params else ""
        return f"({', '.join(self.coords)}{params})"


def jet_name(j: int) -> str:
    """u, u_x, u_xx, ... for the j-th x-derivative."""
    if j < 0:
        raise ValueError(f"negative derivative count {j}")
    return "u" if j == 0 else "u_" + "x" * j


def jet_chart(order: int, params: tuple[str, ...] = ()) -> Chart:
    """The unreduced jet chart (t, x, u, u_x, ..., u_{order x})."""
    return Chart(("t", "x") + tuple(jet_name(j) for j in range(order + 1)), tuple(params))


def _to_sympy_rational(value: object) -> sp.Rational:
    if isinstance(value, sp.Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rational values")
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        frac = Fraction(value)
        return sp.Rational(frac.numerator, frac.denominator)
    if isinstance(value, str):
        return sp.Rational(value)
    raise TypeError(f"cannot use {value!r} as an exact rational")


def _to_fraction(value: sp.Rational) -> Fraction:
    return Fraction(int(value.p), int(value.q))


class RatExpr:
    """Exact rational function over a chart.

    Values are immutable; arithmetic returns new instances. Mixing charts raises ChartMismatch.
    """

    __slots__ = ("chart", "num", "den")

    def __init__(self, chart: Chart, num: PolyElement, den: Optional[PolyElement] = None, reduce: Optional[bool] = None):
        ring = chart.ring
        if den is None:
            den = ring.one
        if not den:
            raise PoleError("zero denominator")
        if den.is_ground:
            if den != ring.one:
                num = num.quo_ground(den.LC)
                den = ring.one
        elif get_settings().gcd_reduce if reduce is None else reduce:
            num, den = num.cancel(den)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatExpr is immutable")

    # construction

    @classmethod
    def const(cls, chart: Chart, value: Scalar) -> "RatExpr":
        return cls(chart, chart.ring.ground_new(QQ.from_sympy(_to_sympy_rational(value))))

    @classmethod
    def zero(cls, chart: Chart) -> "RatExpr":
        return cls(chart, chart.ring.zero)

    @classmethod
    def one(cls, chart: Chart) -> "RatExpr":
        return cls(chart, chart.ring.one)

    @classmethod
    def var(cls, chart: Chart, name: str) -> "RatExpr":
        return cls(chart, chart.gen(name))

    @classmethod
    def from_sympy(cls, chart: Chart, expr: sp.Expr) -> "RatExpr":
        """Convert a rational sympy expression; raise NonRationalExpression otherwise."""
        expr = sp.sympify(expr)
        unknown = sorted(str(s) for s in expr.free_symbols if str(s) not in chart)
        if unknown:
            raise UnknownIdentifier(unknown[0])
        if not _is_rational_tree(expr):
            raise NonRationalExpression(f"expression is not rational: {sp.sstr(expr)}")
        num, den = sp.fraction(sp.together(expr))
        ring = chart.ring
        try:
            return cls(chart, ring.from_expr(num), ring.from_expr(den))
        except (ValueError, sp.polys.polyerrors.CoercionFailed) as e:
            raise NonRationalExpression(f"expression is not rational over {chart}: {e}") from e

    # arithmetic

    def _coerce(self, other: object) -> "RatExpr":
        if isinstance(other, RatExpr):
            if other.chart != self.chart:
                raise ChartMismatch(f"{self.chart} vs {other.chart}")
            return other
        if isinstance(other, (int, Fraction, sp.Rational)):
            return RatExpr.const(self.chart, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return RatExpr(self.chart, self.num + other.num, self.den)
        return RatExpr(self.chart, self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatExpr(self.chart, -self.num, self.den, reduce=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return RatExpr.zero(self.chart)
        return RatExpr(self.chart, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            raise PoleError("division by the zero expression")
        return RatExpr(self.chart, self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent >= 0:
            return RatExpr(self.chart, self.num**exponent, self.den**exponent, reduce=False)
        if not self.num:
            raise PoleError("negative power of the zero expression")
        return RatExpr(self.chart, self.den ** (-exponent), self.num ** (-exponent))

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return not (self.num * other.den - other.num * self.den)

    __hash__ = None

    # queries

    def is_zero(self) -> bool:
        return not self.num

    def diff(self, name: str) -> "RatExpr":
        """Exact partial derivative by the quotient rule; parameters are allowed."""
        x = self.chart.gen(name)
        if self.den.is_ground:
            return RatExpr(self.chart, self.num.diff(x))
        return RatExpr(self.chart, self.num.diff(x) * self.den - self.num * self.den.diff(x), self.den**2)

    def depends_on(self, name: str) -> bool:
        x = self.chart.gen(name)
        return self.num.degree(x) > 0 or self.den.degree(x) > 0

    def is_constant(self) -> bool:
        """Free of every chart coordinate (parameters may appear)."""
        return not any(self.depends_on(name) for name in self.chart.coords)

    def is_polynomial(self) -> bool:
        """Denominator free of chart coordinates."""
        return not any(self.den.degree(self.chart.gen(name)) > 0 for name in self.chart.coords)

    def as_number(self) -> Optional[Fraction]:
        if self.num.is_ground and self.den.is_ground:
            value = QQ.to_sympy(self.num.LC if self.num else QQ.zero) / QQ.to_sympy(self.den.LC)
            return _to_fraction(sp.Rational(value))
        return None

    def to_sympy(self) -> sp.Expr:
        return self.num.as_expr() / self.den.as_expr()

    def on(self, chart: Chart) -> "RatExpr":
        """The same expression on another chart that contains all of its names."""
        if chart == self.chart:
            return self
        return RatExpr.from_sympy(chart, self.to_sympy())

    def subs(self, name: str, value: "RatExpr") -> "RatExpr":
        """Substitute a rational expression (on the same chart) for one name."""
        value = self._coerce(value)
        return RatExpr.from_sympy(self.chart, self.to_sympy().xreplace({self.chart.symbol(name): value.to_sympy()}))

    def evaluate(self, assignment: Mapping[str, object]) -> Fraction:
        """Exact value at a rational point.

        Raises:
            UnknownIdentifier: a name the expression uses has no value
            PoleError: the denominator vanishes at the point
        """
        ring = self.chart.ring
        values = []
        for name in self.chart.names:
            if name in assignment:
                values.append(QQ.from_sympy(_to_sympy_rational(assignment[name])))
            elif self.depends_on(name):
                raise UnknownIdentifier(name)
            else:
                values.append(QQ.zero)
        den = ring.domain.to_sympy(self.den(*values)) if not self.den.is_ground else QQ.to_sympy(self.den.LC)
        if den == 0:
            raise PoleError(f"denominator {to_text(self.den.as_expr())} vanishes at {dict(assignment)}")
        num = ring.domain.to_sympy(self.num(*values)) if self.num and not self.num.is_ground else QQ.to_sympy(self.num.LC if self.num else QQ.zero)
        return _to_fraction(sp.Rational(num / den))

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"RatExpr({to_text(self)!r} on {self.chart})"


def _is_rational_tree(expr: sp.Expr) -> bool:
    if expr.atoms(sp.Function) or expr.atoms(sp.NumberSymbol):
        return False
    if any(a in (sp.zoo, sp.nan, sp.oo, -sp.oo) for a in expr.atoms()):
        return False
    return all(p.exp.is_Integer for p in expr.atoms(sp.Pow))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

FUNCTIONS = {
    "atan": sp.atan,
    "arctan": sp.atan,
    "ln": sp.log,
    "log": sp.log,
    "exp": sp.exp,
    "sqrt": sp.sqrt,
    "sech": sp.sech,
    "tanh": sp.tanh,
    "sin": sp.sin,
    "cos": sp.cos,
}

CONSTANTS = {"pi": sp.pi, "E": sp.E}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^(),]))")


class _Parser:
    """Recursive-descent parser; each level of the grammar is one method."""

    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> list[tuple[str, str, int]]:
        tokens = []
        i = 0
        while i < len(text):
            if text[i].isspace():
                i += 1
                continue
            m = _TOKEN.match(text, i)
            if not m:
                raise ExpressionSyntaxError(f"unexpected character '{text[i]}'", i, text)
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), start))
            i = m.end()
        tokens.append(("end", "", len(text)))
        return tokens

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, value: str) -> None:
        kind, text, offset = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else f"'{text}'"
            raise ExpressionSyntaxError(f"expected '{value}', found {found}", offset, self.text)

    def parse(self) -> sp.Expr:
        if self.peek()[0] == "end":
            raise ExpressionSyntaxError("empty expression", 0, self.text)
        expr = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected '{text}'", offset, self.text)
        return expr

    def expr(self) -> sp.Expr:
        value = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> sp.Expr:
        value = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, offset = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs == 0:
                    raise ExpressionSyntaxError("division by zero", offset, self.text)
                value = value / rhs
        return value

    def unary(self) -> sp.Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text in ("-", "+"):
            self.take()
            operand = self.unary()
            return -operand if text == "-" else operand
        return self.power()

    def power(self) -> sp.Expr:
        base = self.primary()
        kind, text, offset = self.peek()
        if kind == "op" and text in ("^", "**"):
            self.take()
            exponent = self.unary()
            if base == 0 and exponent.is_negative:
                raise ExpressionSyntaxError("negative power of zero", offset, self.text)
            return sp.Pow(base, exponent)
        return base

    def primary(self) -> sp.Expr:
        kind, text, offset = self.take()
        if kind == "num":
            return sp.Rational(text)
        if kind == "name":
            if text in self.chart:
                return self.chart.symbol(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[text](arg)
            if text in CONSTANTS:
                return CONSTANTS[text]
            raise UnknownIdentifier(text, offset)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else f"'{text}'"
        raise ExpressionSyntaxError(f"unexpected {found}", offset, self.text)


def parse(text: str, chart: Chart) -> ElemExpr:
    """Parse expression text against a chart.

    Raises:
        ExpressionSyntaxError: malformed text, with the character offset
        UnknownIdentifier: a name that is neither a chart name, a function nor a constant
    """
    return _Parser(text, chart).parse()


def parse_rational(text: str, chart: Chart) -> RatExpr:
    """Parse text that must denote a rational function over the chart."""
    return RatExpr.from_sympy(chart, parse(text, chart))


def to_text(e: Union[RatExpr, ElemExpr]) -> str:
    """Print in the parser's grammar."""
    if isinstance(e, RatExpr):
        if not e.num:
            return "0"
        return sp.sstr(sp.Mul(e.num.as_expr(), sp.Pow(e.den.as_expr(), -1)))
    return sp.sstr(sp.sympify(e))


# ---------------------------------------------------------------------------
# Differentiation, zero test, evaluation
# ---------------------------------------------------------------------------


def pderiv(e: Union[RatExpr, ElemExpr], name: str, chart: Optional[Chart] = None) -> Union[RatExpr, ElemExpr]:
    """Exact partial derivative; rational input gives a RatExpr back."""
    if isinstance(e, RatExpr):
        return e.diff(name)
    if chart is None:
        raise TypeError("a chart is needed to differentiate an elementary expression")
    return sp.diff(e, chart.symbol(name))


def as_rational(e: Union[RatExpr, ElemExpr], chart: Chart) -> RatExpr:
    if isinstance(e, RatExpr):
        return e.on(chart)
    return RatExpr.from_sympy(chart, e)


def try_rational(e: Union[RatExpr, ElemExpr], chart: Chart) -> Optional[RatExpr]:
    try:
        return as_rational(e, chart)
    except NonRationalExpression:
        return None


class ZeroVerdict(str, Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNKNOWN = "unknown"


def _rational_zero(expr: sp.Expr) -> bool:
    num, _ = sp.fraction(sp.together(expr))
    gens = sorted(num.free_symbols, key=str)
    if not gens:
        return sp.nsimplify(num) == 0
    return sp.Poly(num, *gens, domain=QQ).is_zero


def zero_verdict(e: Union[RatExpr, ElemExpr]) -> ZeroVerdict:
    """Three-valued zero test.

    Rational input is decided exactly. Otherwise the tree is expanded and powers are merged;
    if that leaves a rational expression it is decided exactly, if cancellation with the
    surviving elementary nodes treated as independent generators gives zero the answer is
    zero, and anything else is UNKNOWN. No numeric probing.
    """
    if isinstance(e, RatExpr):
        return ZeroVerdict.ZERO if e.is_zero() else ZeroVerdict.NONZERO
    expr = sp.sympify(e)
    if expr == 0:
        return ZeroVerdict.ZERO
    if _is_rational_tree(expr):
        return ZeroVerdict.ZERO if _rational_zero(expr) else ZeroVerdict.NONZERO
    simplified = sp.powsimp(sp.expand(expr))
    if simplified == 0:
        return ZeroVerdict.ZERO
    if _is_rational_tree(simplified):
        return ZeroVerdict.ZERO if _rational_zero(simplified) else ZeroVerdict.NONZERO
    if sp.cancel(sp.together(simplified)) == 0:
        return ZeroVerdict.ZERO
    logger.debug("zero test undecided for %s", sp.sstr(simplified))
    return ZeroVerdict.UNKNOWN


def is_zero(e: Union[RatExpr, ElemExpr]) -> bool:
    """Boolean zero test; raises Undecidable when elementary nodes block a verdict."""
    verdict = zero_verdict(e)
    if verdict is ZeroVerdict.UNKNOWN:
        raise Undecidable("elementary nodes survived structural simplification", residual=to_text(e))
    return verdict is ZeroVerdict.ZERO


def eval_rational(e: Union[RatExpr, ElemExpr], assignment: Mapping[str, object]) -> Union[Fraction, float]:
    """Evaluate at a point: exact when no elementary node is hit, a float otherwise.

    Raises:
        UnknownIdentifier: a name in the expression has no value
        PoleError: a denominator vanishes at the point
        DomainError: an elementary function is evaluated outside its real domain
    """
    if isinstance(e, RatExpr):
        return e.evaluate(assignment)
    expr = sp.sympify(e)
    mapping = {}
    for sym in expr.free_symbols:
        if str(sym) not in assignment:
            raise UnknownIdentifier(str(sym))
        mapping[sym] = _to_sympy_rational(assignment[str(sym)])
    for node in expr.atoms(sp.log):
        if node.args[0].xreplace(mapping).is_nonpositive:
            raise DomainError(f"log of a non-positive value in {to_text(expr)} at {dict(assignment)}")
    value = expr.xreplace(mapping)
    if value.has(sp.zoo) or value in (sp.oo, -sp.oo):
        raise PoleError(f"{to_text(expr)} has a pole at {dict(assignment)}")
    if value.has(sp.nan):
        raise DomainError(f"{to_text(expr)} is undefined at {dict(assignment)}")
    if value.is_Rational:
        return _to_fraction(value)
    numeric = sp.N(value, 30)
    if numeric.has(sp.I) or numeric.is_real is False:
        raise DomainError(f"{to_text(expr)} is not real at {dict(assignment)}")
    return float(numeric)
