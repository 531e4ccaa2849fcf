from fractions import Fraction

import pytest

from edswaves.errors import ConstantCandidate, HypothesisFailed, NonPolynomial, NotAnnihilated, NotClosed, NotDirectSum, NotEigen, NotProportional, NotSimple
from edswaves.exterior import DiffForm, VectorField, bracket, evaluate, interior, lie_deriv, wedge, wedge_all
from edswaves.solvable import Provenance, chain, independent, integrate_closed, prop26_factors, scale_to_symmetry, verify_first_integral, verify_solvable
from edswaves.symcore import Chart, RatExpr, parse, parse_rational


@pytest.fixture
def txu():
    return Chart(("t", "x", "u"))


@pytest.fixture
def two_integrals(txu):
    """Omega = df ^ dg with X1 = d/dt, X2 = (1/u) d/dx."""
    f = parse_rational("u^2 + t", txu)
    g = parse_rational("x*u", txu)
    omega = wedge(DiffForm.exact(f), DiffForm.exact(g))
    fields = [VectorField.basis(txu, "t"), VectorField(txu, {"x": parse_rational("1/u", txu)})]
    return f, g, omega, fields


def _example_fields(chart):
    X1 = VectorField.basis(chart, "t")
    X2 = VectorField.basis(chart, "x")
    X3 = VectorField(chart, {n: RatExpr.var(chart, n) for n in ("u", "u_xx", "u_xxx")})
    return X1, X2, X3


def test_verify_solvable_synthetic(two_integrals):
    _, _, omega, fields = two_integrals
    structure = verify_solvable(omega, fields)
    assert [l.is_zero() for l in structure.factors] == [True, True]


def test_chain_recovers_both_integrals(two_integrals):
    f, g, omega, fields = two_integrals
    result = chain(omega, verify_solvable(omega, fields))
    assert result.omegas[0] == DiffForm.exact(f)
    assert result.omegas[1] == DiffForm.exact(g)
    assert result.closure == [True, True]
    assert result.potentials[0] == f and result.potentials[1] == g


def test_chain_duality_on_the_plane(space):
    """dx^dy with (d/dx, d/dy) gives omega^1 = dx and omega^2 = dy."""
    omega = wedge(DiffForm.d_coord(space, "x"), DiffForm.d_coord(space, "y"))
    fields = [VectorField.basis(space, "x"), VectorField.basis(space, "y")]
    result = chain(omega, verify_solvable(omega, fields))
    assert result.omegas == [DiffForm.d_coord(space, "x"), DiffForm.d_coord(space, "y")]
    for i, w in enumerate(result.omegas):
        for j, X in enumerate(fields):
            assert interior(X, w).value == (1 if i == j else 0)


def test_not_simple():
    four = Chart(("a", "b", "c", "d"))
    da, db, dc, dd = (DiffForm.d_coord(four, n) for n in four.coords)
    fields = [VectorField.basis(four, "a"), VectorField.basis(four, "c")]
    with pytest.raises(NotSimple):
        verify_solvable(wedge(da, db) + wedge(dc, dd), fields)


def test_not_proportional(txu):
    omega = wedge(DiffForm.d_coord(txu, "t"), DiffForm.d_coord(txu, "x"))
    # L_X omega = du^dx for X = u d/dt
    X1 = VectorField(txu, {"t": RatExpr.var(txu, "u")})
    X2 = VectorField.basis(txu, "x")
    with pytest.raises(NotProportional) as info:
        verify_solvable(omega, [X1, X2])
    assert info.value.index == 1


def test_example_degenerate_structure(linear):
    """(X3, X2, X1) fails transversality: X1 + c X2 lies in ker Omega."""
    X1, X2, X3 = _example_fields(linear.chart)
    omega = linear.omega
    assert interior(X2, interior(X1, omega)).is_zero()
    with pytest.raises(NotDirectSum) as info:
        verify_solvable(omega, [X3, X2, X1])
    assert info.value.coefficients == ["0", "c", "1"]
    witness = info.value.witness
    assert interior(witness, omega).is_zero()


def test_example_scaling_and_brackets(linear):
    X1, X2, X3 = _example_fields(linear.chart)
    assert lie_deriv(X3, linear.omega) == linear.omega * 3
    # d/dx commutes with the scaling field
    assert bracket(X2, X3).is_zero()
    f1 = parse_rational("c*u_xx^2 + u_xxx^2", linear.chart)
    assert scale_to_symmetry(X3, linear.omega, f1) == Fraction(-3, 2)


def test_scale_to_symmetry_rejects_non_eigen(linear):
    X1, _, X3 = _example_fields(linear.chart)
    with pytest.raises(NotEigen):
        scale_to_symmetry(X3, linear.omega, parse_rational("u + 1", linear.chart))


def test_scale_to_symmetry_guards(linear, plane):
    _, _, X3 = _example_fields(linear.chart)
    with pytest.raises(NotEigen):
        scale_to_symmetry(X3, linear.omega, RatExpr.zero(linear.chart))
    x = parse_rational("x", plane)
    not_closed = DiffForm.d_coord(plane, "y") * x
    with pytest.raises(NotClosed):
        scale_to_symmetry(VectorField(plane, {"x": x}), not_closed, x)


def test_factor_sequence_on_three_integrals():
    chart = Chart(("t", "x", "u", "u_xx", "u_xxx"), ("c",))
    f1 = parse_rational("c*u_xx^2 + u_xxx^2", chart)
    f2 = parse_rational("c*u + u_xx", chart)
    f3 = parse_rational("x - c*t", chart)
    omega = wedge_all([DiffForm.exact(f) for f in (f1, f2, f3)])
    fields = [
        VectorField(chart, {"u_xxx": parse_rational("1/(2*u_xxx)", chart)}),
        VectorField(chart, {"u": parse_rational("1/c", chart)}),
        VectorField.basis(chart, "x"),
    ]
    seq = prop26_factors(omega, fields)
    assert seq.last == -DiffForm.exact(f1)
    assert seq.value == -1
    assert seq.moreover is None
    assert len(seq.forms) == 3
    assert evaluate(omega, list(reversed(fields))) == -1


def test_factor_sequence_on_the_plane(space):
    omega = wedge(DiffForm.d_coord(space, "x"), DiffForm.d_coord(space, "y"))
    seq = prop26_factors(omega, [VectorField.basis(space, "y"), VectorField.basis(space, "x")])
    assert seq.forms == [omega, DiffForm.d_coord(space, "y")]


def test_factor_sequence_errors(space):
    x = RatExpr.var(space, "x")
    dx, dy = DiffForm.d_coord(space, "x"), DiffForm.d_coord(space, "y")
    with pytest.raises(NotClosed):
        prop26_factors(wedge(dx, dy) * RatExpr.var(space, "z"), [VectorField.basis(space, "y"), VectorField.basis(space, "x")])
    with pytest.raises(HypothesisFailed) as info:
        prop26_factors(wedge(dx, dy), [VectorField.basis(space, "y"), VectorField(space, {"x": x})])
    assert info.value.index == 1


def test_integrate_closed(space):
    w = DiffForm.exact(parse_rational("x^2*y + 3*z", space))
    assert integrate_closed(w).expr == parse_rational("x^2*y + 3*z", space)
    with pytest.raises(NotClosed):
        integrate_closed(DiffForm.d_coord(space, "x") * RatExpr.var(space, "y"))
    with pytest.raises(NonPolynomial):
        integrate_closed(DiffForm.d_coord(space, "x") / RatExpr.var(space, "x"))


def test_integrate_closed_from_base_point(space):
    w = DiffForm.exact(parse_rational("x*y", space))
    potential = integrate_closed(w, base={"x": 1, "y": 2, "z": 0}).expr
    assert potential == parse_rational("x*y - 2", space)


@pytest.mark.property
def test_quadrature_round_trip(rng):
    """integrate_closed(d p) - p is a constant for random polynomials."""
    chart = Chart(("a", "b", "x", "y"))
    for _ in range(200):
        p = RatExpr.zero(chart)
        for _ in range(rng.randint(1, 4)):
            term = RatExpr.const(chart, Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
            for _ in range(rng.randint(0, 5)):
                term = term * RatExpr.var(chart, rng.choice(chart.coords))
            p = p + term
        if p.is_constant():
            continue
        gamma = integrate_closed(DiffForm.exact(p)).expr
        assert (gamma - p).is_constant()


def test_first_integrals_of_linear_dispersive(linear):
    V = list(linear.vessiot)
    for text in ("c*u_xx^2 + u_xxx^2", "c*u + u_xx"):
        result = verify_first_integral(V, parse_rational(text, linear.chart), omega=linear.omega)
        assert result.constraint_form is True
        assert result.provenance is Provenance.USER_SUPPLIED


def test_arctan_first_integral(linear):
    f3 = parse("x - c*t + arctan(u_xxx/(sqrt(c)*u_xx))/sqrt(c)", linear.chart)
    result = verify_first_integral(list(linear.vessiot), f3, omega=linear.omega)
    # not rational, so the constraint-form check is skipped
    assert result.constraint_form is None


def test_kdv_profile_integrals(kdv_b):
    V = list(kdv_b.vessiot)
    jet = kdv_b.pde.chart
    f1 = kdv_b.restrict(parse_rational("u_xx + u*(u/2 - c)", jet))
    verify_first_integral(V, f1, omega=kdv_b.omega)
    f2 = kdv_b.restrict(parse_rational("u_x^2 + u^3/3 - c*u^2 - 2*(u_xx + u*(u/2 - c))*u", jet))
    verify_first_integral(V, f2, omega=kdv_b.omega)
    printed = kdv_b.restrict(parse_rational("u_x^2 + u^2*(3*c - u)/2 - 2*u*u_xx", jet))
    with pytest.raises(NotAnnihilated) as info:
        verify_first_integral(V, printed)
    assert info.value.residual != "0"


@pytest.mark.parametrize(
    "system, f1_text, f2_text",
    [
        ("linear", "c*u_xx^2 + u_xxx^2", "c*u + u_xx"),
        ("kdv_b", "u_xx + u*(u/2 - c)", "u_x^2 + u^3/3 - c*u^2 - 2*(u_xx + u*(u/2 - c))*u"),
    ],
)
def test_first_integrals_closed_under_algebra(request, system, f1_text, f2_text):
    tws = request.getfixturevalue(system)
    V = list(tws.vessiot)
    jet = tws.pde.chart
    f1 = tws.restrict(parse_rational(f1_text, jet))
    f2 = tws.restrict(parse_rational(f2_text, jet))
    for combined in (f1 + f2, f1 * f2, f2 * f2, f1 * 3 - f2):
        result = verify_first_integral(V, combined, omega=tws.omega)
        assert result.constraint_form is True


def test_constant_candidate_rejected(linear):
    with pytest.raises(ConstantCandidate):
        verify_first_integral(list(linear.vessiot), parse_rational("c^2", linear.chart))
    with pytest.raises(ValueError):
        verify_first_integral([], parse_rational("u", linear.chart))


def test_independence(linear):
    f1 = parse_rational("c*u_xx^2 + u_xxx^2", linear.chart)
    f2 = parse_rational("c*u + u_xx", linear.chart)
    assert independent([f1, f2])
    assert not independent([f2, f2 * 2])


def test_quadrature_on_the_reduced_chart(linear):
    f1 = parse_rational("c*u_xx^2 + u_xxx^2", linear.chart)
    assert integrate_closed(DiffForm.exact(f1)).expr == f1
    ratio = DiffForm.d_coord(linear.chart, "u_xxx") * (parse_rational("u_xxx", linear.chart) / f1)
    with pytest.raises(NonPolynomial):
        integrate_closed(ratio)
