import pytest

from edswaves.errors import DegenerateReduction, InvalidPDE, NonAffineInUx, OrderTooLow
from edswaves.exterior import DiffForm, VectorField, bracket, ext_d, interior, pair, wedge
from edswaves.jettw import EvolutionPDE, MultiIndex, closed_factor, frobenius_direct, reduce, theorem31, vessiot_sum_defect
from edswaves.symcore import parse_rational
from edswaves.utils import read_jsonl, validate_pde_record

from .conftest import CORPUS


def test_multi_index_names():
    assert MultiIndex(0).name == "u"
    assert MultiIndex.parse("u_xxx").count == 3
    with pytest.raises(ValueError):
        MultiIndex.parse("v_x")
    with pytest.raises(ValueError):
        MultiIndex(-1)


def test_pde_must_depend_on_top_derivative():
    with pytest.raises(InvalidPDE):
        EvolutionPDE.from_text(3, "u*u_x + u_xx")
    with pytest.raises(InvalidPDE):
        EvolutionPDE.from_text(0, "u")


def test_wave_speed_added_to_params():
    pde = EvolutionPDE.from_text(3, "u_xxx", params=(), wave_speed="s")
    assert pde.chart.params == ("s",)


def test_kdv_reduction(kdv_a):
    """u_t = -u u_x + u_xxx reduces to F~ = c u_xxx / (c - u)."""
    assert kdv_a.F_tilde == parse_rational("c*u_xxx/(c - u)", kdv_a.chart)
    assert kdv_a.chart.coords == ("t", "x", "u", "u_xx", "u_xxx")


def test_kdv_vessiot_top_coefficients(kdv_a):
    V1, V2 = kdv_a.vessiot
    chart = kdv_a.chart
    assert V1.coeff("u_xxx") == parse_rational("c*((c - u)^3*u_xx - u_xxx^2)/(c - u)^2", chart)
    assert V2.coeff("u_xxx") == parse_rational("-((c - u)^3*u_xx - u_xxx^2)/(c - u)^2", chart)
    assert V1.coeff("t") == 1 and V1.coeff("x").is_zero()
    assert V2.coeff("x") == 1 and V2.coeff("t").is_zero()


def test_vessiot_fields_annihilate_contact_forms(kdv_a):
    for V in kdv_a.vessiot:
        for theta in kdv_a.contact:
            assert interior(V, theta).is_zero()


def test_vessiot_fields_commute(kdv_a):
    V1, V2 = kdv_a.vessiot
    assert bracket(V1, V2).is_zero()


def test_linear_dispersive_vessiot(linear):
    V1, _ = linear.vessiot
    chart = linear.chart
    assert V1.coeff("u") == parse_rational("u_xxx", chart)
    assert V1.coeff("u_xx") == parse_rational("-c*u_xxx", chart)
    assert V1.coeff("u_xxx") == parse_rational("c^2*u_xx", chart)


def test_convention_b_reduction(kdv_b):
    assert kdv_b.F_tilde == parse_rational("-c*u_xxx/(c - u)", kdv_b.chart)


def test_burgers_reduction(burgers):
    assert burgers.F_tilde == parse_rational("c*u_xx/(c + u)", burgers.chart)
    assert burgers.chart.coords == ("t", "x", "u", "u_xx")


def test_reduction_errors():
    with pytest.raises(NonAffineInUx):
        reduce(EvolutionPDE.from_text(3, "u_x^2 + u_xxx"))
    with pytest.raises(DegenerateReduction):
        # c + dF/du_x vanishes
        reduce(EvolutionPDE.from_text(3, "u_xxx - c*u_x"))
    with pytest.raises(DegenerateReduction):
        reduce(EvolutionPDE.from_text(1, "u_x"))
    with pytest.raises(InvalidPDE):
        reduce(EvolutionPDE.from_text(1, "u + u_x"))


def test_restrict_eliminates_ux(kdv_b):
    restricted = kdv_b.restrict(parse_rational("u_x", kdv_b.pde.chart))
    assert restricted == parse_rational("u_xxx/(c - u)", kdv_b.chart)


def test_characterising_form_degree(kdv_a):
    # five coordinates, three contact forms
    assert kdv_a.omega.degree == 3
    assert len(kdv_a.contact) == 3


def test_theorem31_kdv(kdv_a):
    verdict = theorem31(kdv_a)
    assert verdict.frobenius and verdict.closed
    assert verdict.method == "criterion"
    assert set(verdict.identities.values()) == {"0"}


def test_theorem31_explicit_x():
    tws = reduce(EvolutionPDE.from_text(3, "x*u_xxx"))
    verdict = theorem31(tws)
    assert not verdict.frobenius and not verdict.closed
    assert verdict.identities["F_t + c*F_x = 0"] == "c*u_xxx"


def test_theorem31_refuses_low_order(burgers):
    with pytest.raises(OrderTooLow):
        theorem31(burgers)


def test_frobenius_direct_decides_burgers(burgers):
    """Order 2 is outside the criterion; the direct computation still returns both verdicts.

    d(theta^2) = c du_xx ^ phi, so dOmega = -c du ^ du_xx ^ phi while every d(theta^a) ^ Omega vanishes.
    """
    verdict = frobenius_direct(burgers)
    assert verdict.method == "direct"
    assert verdict.frobenius is True
    assert verdict.closed is False
    chart = burgers.chart
    du, du_xx = DiffForm.d_coord(chart, "u"), DiffForm.d_coord(chart, "u_xx")
    expected = wedge(wedge(du, du_xx), burgers.phi) * -burgers.c_expr
    assert ext_d(burgers.omega) == expected


def test_frobenius_direct_kdv_closed(kdv_a):
    verdict = frobenius_direct(kdv_a)
    assert verdict.frobenius and verdict.closed
    assert ext_d(kdv_a.omega).is_zero()


def test_vessiot_sum_holds_only_with_transport(kdv_a, linear):
    for tws in (kdv_a, linear):
        assert vessiot_sum_defect(tws).is_zero()
    tws = reduce(EvolutionPDE.from_text(3, "x*u_xxx"))
    V1, V2 = tws.vessiot
    assert V1.coeff("u_xxx") == parse_rational("c^2*u_xx/x", tws.chart)
    assert vessiot_sum_defect(tws) == VectorField(tws.chart, {"u_xxx": parse_rational("-c*u_xxx/x", tws.chart)})


def test_vessiot_bracket_leaves_the_distribution_without_transport():
    tws = reduce(EvolutionPDE.from_text(3, "x*u_xxx"))
    V1, V2 = tws.vessiot
    Z = bracket(V1, V2)
    assert Z == VectorField(tws.chart, {"u_xx": parse_rational("-c*u_xxx/x", tws.chart)})
    assert any(not pair(theta, Z).is_zero() for theta in tws.contact.generators)


def test_vessiot_fields_commute_on_frobenius_corpus_entries():
    for record in read_jsonl(CORPUS / "theorem31.jsonl", validate=validate_pde_record):
        if not record["expected"]["frobenius"]:
            continue
        tws = reduce(EvolutionPDE.from_text(record["order"], record["F"]))
        V1, V2 = tws.vessiot
        assert bracket(V1, V2).is_zero(), record["name"]
        assert vessiot_sum_defect(tws).is_zero(), record["name"]


def test_criterion_agrees_with_direct_on_corpus():
    for record in read_jsonl(CORPUS / "theorem31.jsonl", validate=validate_pde_record):
        tws = reduce(EvolutionPDE.from_text(record["order"], record["F"]))
        criterion, direct = theorem31(tws), frobenius_direct(tws)
        assert (criterion.frobenius, criterion.closed) == (direct.frobenius, direct.closed), record["name"]
        expected = record["expected"]
        assert (direct.frobenius, direct.closed) == (expected["frobenius"], expected["closed"]), record["name"]


@pytest.mark.property
def test_criterion_agrees_with_direct_on_random_polynomials(rng):
    """F polynomial of degree <= 2 in (u, u_xx, u_xxx), always containing u_xxx."""
    monomials = ["u", "u_xx", "u_xxx", "u^2", "u*u_xx", "u*u_xxx", "u_xx^2", "u_xx*u_xxx", "u_xxx^2", "x", "t*u_xxx", "x*u"]
    for _ in range(20):
        terms = [f"{rng.choice([1, 2, -1, -3])}*{m}" for m in rng.sample(monomials, rng.randint(1, 3))]
        F = " + ".join(["u_xxx"] + terms)
        try:
            tws = reduce(EvolutionPDE.from_text(3, F))
        except (InvalidPDE, DegenerateReduction):
            continue
        criterion, direct = theorem31(tws), frobenius_direct(tws)
        assert (criterion.frobenius, criterion.closed) == (direct.frobenius, direct.closed), F


def test_closed_factor_on_first_integral(linear):
    f2 = parse_rational("c*u + u_xx", linear.chart)
    assert closed_factor(linear, f2)
    assert not closed_factor(linear, parse_rational("u", linear.chart))


def test_linear_dispersive_contact_forms(linear):
    """theta^1 = du + (u_xxx/c) phi, so d(theta^1) = (1/c) du_xxx ^ phi."""
    theta1, theta2, theta3 = linear.contact.generators
    chart = linear.chart
    c = parse_rational("c", chart)
    assert theta1 == DiffForm.d_coord(chart, "u") + linear.phi * (parse_rational("u_xxx", chart) / c)
    assert theta2 == DiffForm.d_coord(chart, "u_xxx") + linear.phi * parse_rational("c*u_xx", chart)
    assert theta3 == DiffForm.d_coord(chart, "u_xx") - linear.phi * parse_rational("u_xxx", chart)
    assert ext_d(theta1) == wedge(DiffForm.d_coord(chart, "u_xxx"), linear.phi) / c
