"""
Solvable structures and the first integrals they produce.

A solvable structure for a simple p-form Omega is an ordered list X_1..X_p, transverse to
ker Omega, with L_{X_1} Omega = l_1 Omega, L_{X_2}(X_1 _| Omega) = l_2 (X_1 _| Omega), and so on.
``verify_solvable`` checks a user-supplied list (nothing here searches for one), ``chain`` runs
the quadrature sequence, and ``prop26_factors`` reads closed one-form factors off a closed Omega.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import sympy as sp

from .errors import (
    ConstantCandidate,
    HypothesisFailed,
    InconsistentVerdict,
    NonPolynomial,
    NotAnnihilated,
    NotClosed,
    NotDirectSum,
    NotEigen,
    NotProportional,
    NotSimple,
    Undecidable,
)
from .exterior import DiffForm, VectorField, evaluate, ext_d, interior, is_constraint, is_simple, kernel, lie_deriv, pair, wedge, wedge_all
from .linalg import nullspace
from .symcore import Chart, RatExpr, ZeroVerdict, to_text, try_rational, zero_verdict

logger = logging.getLogger(__name__)

Expression = Union[RatExpr, sp.Expr]


class Provenance(str, Enum):
    EXTRACTED = "extracted"
    USER_SUPPLIED = "user-supplied"


@dataclass
class FirstIntegral:
    """A verified first integral.

    Attributes:
        expr: the function on the distribution's chart
        fields: generators it was checked against (empty for a bare quadrature result)
        provenance: how it was obtained
        source: the candidate before restriction to the reduced chart, when it differs
        constraint_form: result of the df ^ Omega = 0 check, None when not run
    """

    expr: Expression
    fields: list[VectorField] = field(default_factory=list)
    provenance: Provenance = Provenance.USER_SUPPLIED
    source: Optional[Expression] = None
    constraint_form: Optional[bool] = None

    @property
    def text(self) -> str:
        return to_text(self.expr)


@dataclass
class SolvableStructure:
    omega: DiffForm
    fields: list[VectorField]
    factors: list[RatExpr]


@dataclass
class ChainResult:
    """Output of the quadrature chain; ``omegas[i](fields[j])`` is 1 when i == j and 0 otherwise."""

    sigmas: list[DiffForm]
    omegas: list[DiffForm]
    closure: list[bool]
    exact: list[bool]
    potentials: list[Optional[RatExpr]]


@dataclass
class FactorSequence:
    """Omega, X_p _| Omega, ..., X_2 _| ... _| X_p _| Omega, each checked closed and simple."""

    forms: list[DiffForm]
    value: RatExpr
    moreover: Optional[bool] = None

    @property
    def last(self) -> DiffForm:
        return self.forms[-1]


def _ratio(a: DiffForm, b: DiffForm) -> Optional[RatExpr]:
    """l with a = l*b, or None when a is not a multiple of b."""
    if b.is_zero():
        return None if not a.is_zero() else RatExpr.zero(b.chart)
    key = min(b.coeffs)
    l = a.coeffs.get(key, RatExpr.zero(b.chart)) / b.coeffs[key]
    return l if a == b * l else None


def _witness(omega: DiffForm, fields: Sequence[VectorField]) -> Optional[tuple[list[RatExpr], VectorField]]:
    """A combination of ``fields`` lying in ker omega, or None when the sum is direct."""
    chart = omega.chart
    ker = kernel(omega)
    columns = list(fields) + ker
    rows = [[X.coeff(name) for X in columns] for name in chart.coords]
    basis = nullspace(rows, prefer_free=list(range(len(fields))))
    for vec in basis:
        coeffs = vec[: len(fields)]
        nonzero = [c for c in coeffs if not c.is_zero()]
        if not nonzero:
            continue
        scale = nonzero[-1]
        coeffs = [c / scale for c in coeffs]
        combo = VectorField(chart)
        for c, X in zip(coeffs, fields):
            combo = combo + X * c
        return coeffs, combo
    return None


def check_direct_sum(omega: DiffForm, fields: Sequence[VectorField]) -> None:
    """Raise NotDirectSum with the witness when Sp{fields} meets ker omega."""
    found = _witness(omega, fields)
    if found is not None:
        coeffs, combo = found
        printed = [to_text(c) for c in coeffs]
        logger.warning("structure is degenerate: %s lies in the kernel", combo)
        raise NotDirectSum(f"combination with coefficients {printed} lies in ker Omega", coefficients=printed, witness=combo)


def verify_solvable(omega: DiffForm, fields: Sequence[VectorField]) -> SolvableStructure:
    """Check the direct-sum condition, then each Lie-derivative proportionality in order.

    Raises:
        NotSimple: omega is not decomposable
        NotDirectSum: some combination of the fields lies in ker omega
        NotProportional: condition i (1-based) fails
    """
    fields = list(fields)
    if len(fields) != omega.degree:
        raise ValueError(f"a {omega.degree}-form needs {omega.degree} fields, got {len(fields)}")
    if not is_simple(omega):
        raise NotSimple("Omega is not simple")
    check_direct_sum(omega, fields)
    factors = []
    current = omega
    for i, X in enumerate(fields, start=1):
        l = _ratio(lie_deriv(X, current), current)
        if l is None:
            raise NotProportional(i)
        factors.append(l)
        current = interior(X, current)
    logger.info("solvable structure verified, factors %s", [to_text(l) for l in factors])
    return SolvableStructure(omega=omega, fields=fields, factors=factors)


def chain(omega: DiffForm, s: SolvableStructure) -> ChainResult:
    """sigma^i contracts every field except X_i into omega (X_k first); omega^i = sigma^i / (X_i _| sigma^i)."""
    if s.omega != omega:
        raise ValueError("the structure was verified for a different form")
    fields = s.fields
    k = len(fields)
    sigmas, omegas = [], []
    for i in range(k):
        current = omega
        for j in reversed(range(k)):
            if j != i:
                current = interior(fields[j], current)
        norm = pair(current, fields[i])
        if norm.is_zero():
            raise NotDirectSum(f"X_{i + 1} _| sigma^{i + 1} vanishes")
        sigmas.append(current)
        omegas.append(current / norm)
    for i, w in enumerate(omegas):
        for j, X in enumerate(fields):
            if pair(w, X) != (1 if i == j else 0):
                raise InconsistentVerdict(f"omega^{i + 1}(X_{j + 1}) breaks duality")
    chart = omega.chart
    closure, exact, potentials = [], [], []
    for i, w in enumerate(omegas):
        dw = ext_d(w) if chart.dim > 1 else DiffForm.zero(chart, 1)
        exact.append(dw.is_zero())
        if i == 0 or dw.is_zero():
            closure.append(dw.is_zero())
        else:
            earlier = wedge_all(omegas[:i])
            closure.append(dw.degree + earlier.degree > chart.dim or wedge(dw, earlier).is_zero())
        potential = None
        if exact[-1]:
            try:
                potential = integrate_closed(w).expr
            except NonPolynomial:
                logger.debug("omega^%d is closed but not polynomial; no potential", i + 1)
        potentials.append(potential)
    return ChainResult(sigmas=sigmas, omegas=omegas, closure=closure, exact=exact, potentials=potentials)


def prop26_factors(omega: DiffForm, fields: Sequence[VectorField]) -> FactorSequence:
    """Closed factors of a closed omega under the strengthened hypotheses.

    Hypothesis i (1-based, counted from X_p down) is L_{X_{p-i+1}}(X_{p-i+2} _| ... _| X_p _| omega) = 0.

    Raises:
        NotClosed: d(omega) != 0
        NotDirectSum: the fields are not transverse to ker omega
        HypothesisFailed: the first failing hypothesis
    """
    fields = list(fields)
    p = omega.degree
    if len(fields) != p:
        raise ValueError(f"a {p}-form needs {p} fields, got {len(fields)}")
    if p >= omega.chart.dim:
        raise ValueError("omega must have degree below the chart dimension")
    if not ext_d(omega).is_zero():
        raise NotClosed("d(Omega) != 0")
    check_direct_sum(omega, fields)
    forms = [omega]
    current = omega
    for i, X in enumerate(reversed(fields), start=1):
        if not lie_deriv(X, current).is_zero():
            raise HypothesisFailed(i)
        if i == p:
            break
        current = interior(X, current)
        forms.append(current)
    for form in forms:
        if not ext_d(form).is_zero() or not is_simple(form):
            raise InconsistentVerdict(f"{form} should be simple and closed")
    value = evaluate(omega, list(reversed(fields)))
    result = FactorSequence(forms=forms, value=value)
    if not value.is_constant():
        result.moreover = is_constraint(DiffForm.exact(value), forms[-1])
    return result


def scale_to_symmetry(X: VectorField, omega: DiffForm, f: RatExpr) -> Fraction:
    """alpha with L_{f^alpha X} omega = 0, from L_X omega = lambda*omega and X(f) = mu*f.

    Raises:
        NotClosed: d(omega) != 0
        NotEigen: lambda or mu is not a constant, f or mu is zero, or the rescaled field fails the check
    """
    if not ext_d(omega).is_zero():
        raise NotClosed("scaling needs d(Omega) = 0")
    if f.is_zero():
        raise NotEigen("f vanishes identically")
    l = _ratio(lie_deriv(X, omega), omega)
    if l is None or not l.is_constant():
        raise NotEigen("L_X Omega is not a constant multiple of Omega")
    if l.is_zero():
        return Fraction(0)
    mu = X.apply(f) / f
    if mu.is_zero() or not mu.is_constant():
        raise NotEigen(f"X(f)/f = {to_text(mu)} is not a nonzero constant")
    alpha = (-l / mu).as_number()
    if alpha is None:
        raise NotEigen(f"exponent {to_text(-l / mu)} is not a rational number")
    # L_{f^a X} Omega = f^a * (lambda*Omega + (a/f) df ^ (X _| Omega)); f^a is a positive factor
    certificate = omega * l + wedge(DiffForm.exact(f), interior(X, omega)) * (RatExpr.const(f.chart, alpha) / f)
    if not certificate.is_zero():
        raise NotEigen("the rescaled field is not a symmetry of Omega")
    return alpha


def integrate_closed(w: DiffForm, base: Optional[Mapping[str, object]] = None) -> FirstIntegral:
    """Potential of a closed polynomial 1-form by radial integration from ``base`` (origin by default).

    Raises:
        NotClosed: dw != 0
        NonPolynomial: a coefficient has coordinates in its denominator
    """
    if w.degree != 1:
        raise ValueError("integrate_closed needs a 1-form")
    chart = w.chart
    for coef in w.coeffs.values():
        if not coef.is_polynomial():
            raise NonPolynomial(f"coefficient {to_text(coef)} is not polynomial in the coordinates")
    if chart.dim > 1 and not ext_d(w).is_zero():
        raise NotClosed("the form is not closed")
    s = sp.Dummy("s")
    b = {name: sp.Rational(str(base[name])) if base and name in base else sp.Integer(0) for name in chart.coords}
    radial = {chart.symbol(n): b[n] + s * (chart.symbol(n) - b[n]) for n in chart.coords}
    integrand = sp.Integer(0)
    for (k,), coef in w.coeffs.items():
        name = chart.coords[k]
        integrand += coef.to_sympy().xreplace(radial) * (chart.symbol(name) - b[name])
    antiderivative = sp.Poly(sp.expand(integrand), s).integrate()
    gamma = RatExpr.from_sympy(chart, antiderivative.as_expr().xreplace({s: 1}))
    if DiffForm.exact(gamma) != w:
        raise InconsistentVerdict("d(potential) differs from the form")
    return FirstIntegral(expr=gamma, provenance=Provenance.EXTRACTED)


def _is_nonconstant(f: Expression, chart: Chart) -> bool:
    if isinstance(f, RatExpr):
        return not f.is_constant()
    expr = sp.sympify(f)
    return any(zero_verdict(sp.diff(expr, chart.symbol(n))) is not ZeroVerdict.ZERO for n in chart.coords)


def verify_first_integral(
    dist: Sequence[VectorField],
    f: Expression,
    omega: Optional[DiffForm] = None,
    provenance: Provenance = Provenance.USER_SUPPLIED,
    source: Optional[Expression] = None,
) -> FirstIntegral:
    """V(f) = 0 for every generator V; elementary candidates pass when their derivatives collapse.

    Raises:
        ConstantCandidate: f has zero differential
        NotAnnihilated: the first generator (1-based) leaving a nonzero residual
        Undecidable: a residual kept elementary nodes
    """
    dist = list(dist)
    if not dist:
        raise ValueError("an empty distribution annihilates everything")
    chart = dist[0].chart
    if not _is_nonconstant(f, chart):
        raise ConstantCandidate(f"{to_text(f)} is constant")
    for i, V in enumerate(dist, start=1):
        residual = V.apply(f)
        verdict = zero_verdict(residual)
        if verdict is ZeroVerdict.UNKNOWN:
            raise Undecidable(f"V_{i}(f) could not be decided", residual=to_text(residual))
        if verdict is ZeroVerdict.NONZERO:
            rational = try_rational(residual, chart)
            raise NotAnnihilated(i, to_text(rational if rational is not None else residual))
    result = FirstIntegral(expr=f, fields=dist, provenance=provenance, source=source)
    rational = f if isinstance(f, RatExpr) else try_rational(f, chart)
    if omega is not None and rational is not None:
        result.constraint_form = is_constraint(DiffForm.exact(rational), omega)
        if not result.constraint_form:
            raise InconsistentVerdict(f"{to_text(f)} is annihilated by the fields but df ^ Omega != 0")
    return result


def independent(integrals: Sequence[Union[FirstIntegral, RatExpr]]) -> bool:
    """df^1 ^ ... ^ df^m != 0 for rational integrals."""
    exprs = [i.expr if isinstance(i, FirstIntegral) else i for i in integrals]
    if not exprs:
        return True
    rationals = []
    for e in exprs:
        if not isinstance(e, RatExpr):
            raise ValueError(f"{to_text(e)} is not rational")
        rationals.append(e)
    chart = rationals[0].chart
    if len(rationals) > chart.dim:
        return False
    return not wedge_all([DiffForm.exact(e) for e in rationals]).is_zero()
