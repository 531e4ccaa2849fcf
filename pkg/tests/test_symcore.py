from fractions import Fraction

import pytest
import sympy as sp

from edswaves.errors import ChartMismatch, DomainError, ExpressionSyntaxError, NonRationalExpression, PoleError, Undecidable, UnknownIdentifier
from edswaves.symcore import Chart, RatExpr, ZeroVerdict, eval_rational, is_zero, jet_chart, jet_name, parse, parse_rational, pderiv, to_text, try_rational, zero_verdict


def test_jet_chart_names():
    chart = jet_chart(3, ("c",))
    assert chart.coords == ("t", "x", "u", "u_x", "u_xx", "u_xxx")
    assert chart.params == ("c",)
    assert jet_name(0) == "u"
    assert jet_name(4) == "u_xxxx"


def test_chart_rejects_duplicates_and_bad_names():
    with pytest.raises(ValueError):
        Chart(("x", "x"))
    with pytest.raises(ValueError):
        Chart(("1x",))


def test_parse_precedence(jet3):
    e = parse_rational("-u^2 + 2*u_x/3", jet3)
    u, ux = RatExpr.var(jet3, "u"), RatExpr.var(jet3, "u_x")
    assert e == -(u**2) + ux * Fraction(2, 3)
    # ** and ^ are the same operator
    assert parse_rational("u**3", jet3) == parse_rational("u^3", jet3)


def test_parse_unknown_identifier_reports_offset(jet3):
    with pytest.raises(UnknownIdentifier) as info:
        parse("u + w", jet3)
    assert info.value.name == "w"
    assert info.value.offset == 4


def test_parse_syntax_errors(jet3):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("u + * u_x", jet3)
    assert info.value.offset == 4
    with pytest.raises(ExpressionSyntaxError):
        parse("(u + 1", jet3)
    with pytest.raises(ExpressionSyntaxError):
        parse("", jet3)
    with pytest.raises(ExpressionSyntaxError):
        parse("u / 0", jet3)


def test_parse_elementary_functions(jet3):
    e = parse("arctan(u_xxx/u_xx) + sech(x)^2", jet3)
    assert e.has(sp.atan)
    assert try_rational(e, jet3) is None
    with pytest.raises(NonRationalExpression):
        parse_rational("sqrt(u)", jet3)


def test_arithmetic_and_equality(jet3):
    u = RatExpr.var(jet3, "u")
    c = RatExpr.var(jet3, "c")
    a = (u**2 - c**2) / (u - c)
    assert a == u + c
    assert (a - u - c).is_zero()
    assert (u / u) == 1
    assert RatExpr.const(jet3, Fraction(1, 2)) * 2 == RatExpr.one(jet3)


def test_division_by_zero_raises(jet3):
    u = RatExpr.var(jet3, "u")
    with pytest.raises(PoleError):
        u / RatExpr.zero(jet3)
    with pytest.raises(PoleError):
        RatExpr.zero(jet3) ** -1


def test_chart_mismatch(jet3):
    other = jet_chart(2, ("c",))
    with pytest.raises(ChartMismatch):
        RatExpr.var(jet3, "u") + RatExpr.var(other, "u")


def test_immutable(jet3):
    u = RatExpr.var(jet3, "u")
    with pytest.raises(AttributeError):
        u.num = u.den


def test_quotient_rule(jet3):
    e = parse_rational("c*u_xxx/(c - u)", jet3)
    expected = parse_rational("c*u_xxx/(c - u)^2", jet3)
    assert e.diff("u") == expected
    assert pderiv(e, "u_xxx") == parse_rational("c/(c - u)", jet3)


def test_pderiv_elementary_chain_rule(jet3):
    e = parse("arctan(u_xxx/u_xx)", jet3)
    d = pderiv(e, "u_xx", jet3)
    expected = parse("(-u_xxx/u_xx^2)/(1 + (u_xxx/u_xx)^2)", jet3)
    assert zero_verdict(sp.sympify(d) - expected) is ZeroVerdict.ZERO


def test_constant_and_polynomial_queries(jet3):
    assert parse_rational("c^2 + 1", jet3).is_constant()
    assert not parse_rational("c*u", jet3).is_constant()
    assert parse_rational("u/c", jet3).is_polynomial()
    assert not parse_rational("c/u", jet3).is_polynomial()
    assert parse_rational("6/4", jet3).as_number() == Fraction(3, 2)
    assert parse_rational("u", jet3).as_number() is None


def test_evaluate_exact(jet3):
    e = parse_rational("(u^2 + 1)/(u - c)", jet3)
    assert e.evaluate({"u": 2, "c": Fraction(1, 2)}) == Fraction(10, 3)
    with pytest.raises(PoleError):
        e.evaluate({"u": 1, "c": 1})
    with pytest.raises(UnknownIdentifier):
        e.evaluate({"u": 1})


def test_subs(jet3):
    F = parse_rational("-u*u_x + u_xxx", jet3)
    value = parse_rational("-u_xxx/(c - u)", jet3)
    assert F.subs("u_x", value) == parse_rational("c*u_xxx/(c - u)", jet3)


def test_extended_chart_and_on():
    base = Chart(("x", "u"), ("c",))
    wider = base.extended(("u", "u_x"))
    assert wider.coords == ("x", "u", "u_x")
    assert wider.params == ("c",)
    e = parse_rational("c*u/x", base)
    moved = e.on(wider)
    assert moved.chart == wider
    assert moved == parse_rational("c*u/x", wider)
    assert e.on(base) is e


def test_to_text_parses_back(jet3):
    e = parse_rational("c*u_xx^2/(u - c) + u_xxx/3", jet3)
    assert parse_rational(to_text(e), jet3) == e


def test_zero_verdicts(jet3):
    assert zero_verdict(RatExpr.zero(jet3)) is ZeroVerdict.ZERO
    assert zero_verdict(parse("exp(u)*exp(-u) - 1", jet3)) is ZeroVerdict.ZERO
    assert zero_verdict(parse("sqrt(c)^2 - c", jet3)) is ZeroVerdict.ZERO
    assert zero_verdict(parse("u - u_x", jet3)) is ZeroVerdict.NONZERO


def test_undecidable_is_not_guessed(jet3):
    # holds only for u > 0
    e = parse("arctan(u) + arctan(1/u) - pi/2", jet3)
    assert zero_verdict(e) is ZeroVerdict.UNKNOWN
    with pytest.raises(Undecidable):
        is_zero(e)


def test_eval_rational_mixed(jet3):
    assert eval_rational(parse_rational("u/2", jet3), {"u": 3}) == Fraction(3, 2)
    value = eval_rational(parse("exp(u)", jet3), {"u": 0})
    assert value == pytest.approx(1.0)


def _random_rational(rng, chart):
    def poly():
        total = RatExpr.zero(chart)
        for _ in range(rng.randint(1, 3)):
            term = RatExpr.const(chart, rng.randint(-4, 4))
            for _ in range(rng.randint(0, 4)):
                term = term * RatExpr.var(chart, rng.choice(chart.coords))
            total = total + term
        return total

    den = poly()
    while den.is_zero():
        den = poly()
    return poly() / den


@pytest.mark.property
def test_product_is_zero_iff_a_factor_is(rng):
    """is_zero(a*b) holds exactly when one of the factors is zero."""
    chart = Chart(("a", "b", "x", "y"))
    for _ in range(200):
        e1, e2 = _random_rational(rng, chart), _random_rational(rng, chart)
        if rng.random() < 0.2:
            e1 = e1 - e1
        assert (e1 * e2).is_zero() == (e1.is_zero() or e2.is_zero())


@pytest.mark.property
def test_derivative_matches_central_difference(rng):
    """Exact partials agree with a central difference at random points away from poles."""
    chart = Chart(("a", "b", "x", "y"))
    h = Fraction(1, 10**8)
    checked = 0
    while checked < 50:
        e = _random_rational(rng, chart)
        name = rng.choice(chart.coords)
        point = {n: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for n in chart.coords}
        try:
            exact = float(e.diff(name).evaluate(point))
            up = e.evaluate({**point, name: point[name] + h})
            down = e.evaluate({**point, name: point[name] - h})
            den = RatExpr(chart, e.den).evaluate(point)
        except PoleError:
            continue
        if abs(den) < Fraction(1, 10):
            continue
        assert float((up - down) / (2 * h)) == pytest.approx(exact, rel=1e-6, abs=1e-6)
        checked += 1


def test_unbalanced_parenthesis_offset(jet3):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("(u", jet3)
    assert info.value.offset == 2


def test_evaluation_examples(jet3):
    e = parse_rational("c*u_xxx/(c - u)", jet3)
    assert eval_rational(e, {"c": 2, "u": 1, "u_xxx": 3}) == 6
    with pytest.raises(PoleError):
        eval_rational(e, {"c": 1, "u": 1, "u_xxx": 0})
    assert eval_rational(parse("3*c*sech(0)^2", jet3), {"c": 4}) == 12
    assert pderiv(parse_rational("u_xxx", jet3), "t").is_zero()


@pytest.mark.parametrize("text, point", [("ln(u)", {"u": 0}), ("log(u - c)", {"u": 1, "c": 3}), ("sqrt(u)", {"u": -4})])
def test_outside_the_real_domain(jet3, text, point):
    with pytest.raises(DomainError):
        eval_rational(parse(text, jet3), point)


@pytest.mark.property
def test_mixed_partials_commute(rng):
    chart = Chart(("a", "b", "x", "y"), ("c",))
    for _ in range(100):
        e = _random_rational(rng, chart)
        first, second = rng.choice(chart.coords), rng.choice(chart.coords)
        assert e.diff(first).diff(second) == e.diff(second).diff(first)
        assert pderiv(pderiv(e, first), second) == pderiv(pderiv(e, second), first)
