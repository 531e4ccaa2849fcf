"""
Travelling-wave reduction of a scalar evolution equation u_t = F(t, x, u, u_x, ..., u_{kx}).

The side condition u_t + c*u_x = 0 and its consequences u_{t,jx} = -c*u_{(j+1)x} are applied
analytically. Eliminating u_x leaves the reduced chart (t, x, u, u_xx, ..., u_{kx}) on which
the contact forms, their characterising form and the two Vessiot fields are built.
"""

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import sympy as sp

from .errors import DegenerateReduction, InconsistentVerdict, InvalidPDE, NonAffineInUx, OrderTooLow, RankDeficient
from .exterior import Codistribution, DiffForm, VectorField, characterising_form, ext_d, is_constraint, kernel, wedge, wedge_all
from .symcore import Chart, RatExpr, jet_chart, jet_name, parse_rational, to_text

logger = logging.getLogger(__name__)

_JET_NAME = re.compile(r"^u(?:_(x+))?$")


@dataclass(frozen=True, order=True)
class MultiIndex:
    """A pure-x derivative count; prints as u, u_x, u_xx, ..."""

    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"negative derivative count {self.count}")

    @property
    def name(self) -> str:
        return jet_name(self.count)

    @classmethod
    def parse(cls, name: str) -> "MultiIndex":
        m = _JET_NAME.match(name)
        if not m:
            raise ValueError(f"'{name}' is not a jet coordinate")
        return cls(len(m.group(1) or ""))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class EvolutionPDE:
    """u_t = F on the jet chart of the given order.

    Attributes:
        order: highest x-derivative k
        F: right-hand side on ``jet_chart(order, params)``
        wave_speed: parameter name used for c
    """

    order: int
    F: RatExpr
    wave_speed: str = "c"

    def __post_init__(self):
        if self.order < 1:
            raise InvalidPDE(f"order must be at least 1, got {self.order}")
        expected = jet_chart(self.order, self.F.chart.params)
        if self.F.chart != expected:
            raise InvalidPDE(f"F must live on {expected}, got {self.F.chart}")
        if self.wave_speed not in self.F.chart.params:
            raise InvalidPDE(f"wave speed '{self.wave_speed}' is not a parameter")
        if not self.F.depends_on(jet_name(self.order)):
            raise InvalidPDE(f"F does not depend on {jet_name(self.order)}; the order is wrong")

    @classmethod
    def from_text(cls, order: int, F: str, params: Sequence[str] = ("c",), wave_speed: str = "c") -> "EvolutionPDE":
        params = tuple(params)
        if wave_speed not in params:
            params = params + (wave_speed,)
        chart = jet_chart(order, params)
        return cls(order=order, F=parse_rational(F, chart), wave_speed=wave_speed)

    @property
    def chart(self) -> Chart:
        return self.F.chart

    def __str__(self) -> str:
        return f"u_t = {to_text(self.F)}"


@dataclass(frozen=True)
class IntegrabilityVerdict:
    """Both booleans of the reduced system plus the identities that decided them.

    ``identities`` maps an identity name to its residual text ("0" when it holds).
    """

    frobenius: bool
    closed: bool
    method: str
    identities: dict[str, str] = field(default_factory=dict)


def reduced_chart(order: int, params: tuple[str, ...]) -> Chart:
    return Chart(("t", "x", "u") + tuple(jet_name(j) for j in range(2, order + 1)), params)


class TWSystem:
    """Reduced travelling-wave exterior differential system.

    Built by ``reduce``; the contact system, characterising form and Vessiot fields are
    computed on first access.
    """

    def __init__(self, pde: EvolutionPDE, chart: Chart, F_tilde: RatExpr):
        self.pde = pde
        self.chart = chart
        self.F_tilde = F_tilde

    @property
    def order(self) -> int:
        return self.pde.order

    @property
    def c(self) -> str:
        return self.pde.wave_speed

    @cached_property
    def c_expr(self) -> RatExpr:
        return RatExpr.var(self.chart, self.c)

    @cached_property
    def phi(self) -> DiffForm:
        """dx - c*dt."""
        return DiffForm.d_coord(self.chart, "x") - DiffForm.d_coord(self.chart, "t") * self.c_expr

    @cached_property
    def contact(self) -> Codistribution:
        return contact_system(self)

    @cached_property
    def omega(self) -> DiffForm:
        return characterising_form(self.contact)

    @cached_property
    def vessiot(self) -> tuple[VectorField, VectorField]:
        return vessiot_fields(self)

    def restrict(self, expr: Union[RatExpr, sp.Expr]) -> Union[RatExpr, sp.Expr]:
        """Substitute u_x -> -F~/c and move the expression to the reduced chart."""
        ux = sp.Symbol("u_x")
        value = -self.F_tilde.to_sympy() / sp.Symbol(self.c)
        if isinstance(expr, RatExpr):
            return RatExpr.from_sympy(self.chart, expr.to_sympy().xreplace({ux: value}))
        return sp.sympify(expr).xreplace({ux: value})

    def __repr__(self) -> str:
        return f"TWSystem(F~ = {to_text(self.F_tilde)} on {self.chart})"


def reduce(pde: EvolutionPDE, c: Optional[str] = None) -> TWSystem:
    """Eliminate u_x from u_t = F under u_t + c*u_x = 0.

    With F = P + Q*u_x the reduced right-hand side is F~ = c*P/(c + Q), the solution of
    F~ = P + Q*(-F~/c).

    Raises:
        NonAffineInUx: F is not affine in u_x
        DegenerateReduction: c + Q or F~ vanishes identically
    """
    if c is not None and c != pde.wave_speed:
        pde = EvolutionPDE(pde.order, pde.F, c)
    jet = pde.chart
    F = pde.F
    Q = F.diff("u_x")
    if Q.depends_on("u_x"):
        raise NonAffineInUx(f"dF/du_x = {to_text(Q)} still depends on u_x")
    P = F - Q * RatExpr.var(jet, "u_x")
    cj = RatExpr.var(jet, pde.wave_speed)
    if (cj + Q).is_zero():
        raise DegenerateReduction("c + dF/du_x vanishes identically")
    F_tilde = cj * P / (cj + Q)
    if F_tilde.is_zero():
        raise DegenerateReduction("the reduced right-hand side vanishes identically")
    if pde.order < 2:
        raise InvalidPDE("the reduced system needs order at least 2")
    if not (F.subs("u_x", -F_tilde / cj) - F_tilde).is_zero():
        raise InconsistentVerdict("F(-F~/c) != F~ after elimination")
    chart = reduced_chart(pde.order, jet.params)
    tws = TWSystem(pde, chart, F_tilde.on(chart))
    logger.info("reduced %s to F~ = %s", pde, to_text(tws.F_tilde))
    return tws


def contact_system(tws: TWSystem) -> Codistribution:
    """theta^1 = du + (F~/c) phi, theta^2 = dF~ + c u_xx phi, theta^j = du_{(j-1)x} - u_{jx} phi."""
    chart = tws.chart
    c = tws.c_expr
    phi = tws.phi
    gens = [
        DiffForm.d_coord(chart, "u") + phi * (tws.F_tilde / c),
        DiffForm.exact(tws.F_tilde) + phi * (c * RatExpr.var(chart, "u_xx")),
    ]
    for j in range(3, tws.order + 1):
        gens.append(DiffForm.d_coord(chart, jet_name(j - 1)) - phi * RatExpr.var(chart, jet_name(j)))
    return Codistribution(gens)


def vessiot_fields(tws: TWSystem) -> tuple[VectorField, VectorField]:
    """Kernel of the contact system normalized to V1 = d/dt + ..., V2 = d/dx + ...

    Raises:
        RankDeficient: the kernel is not 2-dimensional or cannot be normalized on (t, x)
    """
    basis = kernel(tws.contact, free=("t", "x"))
    if len(basis) != 2:
        raise RankDeficient(f"Vessiot distribution has dimension {len(basis)}", rank=tws.chart.dim - len(basis), expected=tws.chart.dim - 2)
    one, zero = RatExpr.one(tws.chart), RatExpr.zero(tws.chart)
    V1 = next((V for V in basis if V.coeff("t") == one and V.coeff("x") == zero), None)
    V2 = next((V for V in basis if V.coeff("x") == one and V.coeff("t") == zero), None)
    if V1 is None or V2 is None:
        raise RankDeficient("Vessiot fields cannot be normalized on (t, x)")
    return V1, V2


def vessiot_sum_defect(tws: TWSystem) -> VectorField:
    """V1 + c*V2 - (d/dt + c*d/dx).

    theta^2 evaluated on d/dt + c*d/dx is F~_t + c*F~_x, so the defect vanishes exactly when
    the reduced system is Frobenius integrable.
    """
    V1, V2 = tws.vessiot
    return V1 + V2 * tws.c_expr - VectorField(tws.chart, {"t": 1, "x": tws.c_expr})


def theorem31(tws: TWSystem) -> IntegrabilityVerdict:
    """Criterion for k >= 3: Frobenius iff F~_t + c*F~_x = 0; closed iff also dF~/du_{(k-1)x} = 0.

    Raises:
        OrderTooLow: k < 3
    """
    k = tws.order
    if k < 3:
        raise OrderTooLow(f"the criterion needs order >= 3, got {k}")
    F = tws.F_tilde
    transport = F.diff("t") + tws.c_expr * F.diff("x")
    sub_top = F.diff(jet_name(k - 1))
    frobenius = transport.is_zero()
    closed = frobenius and sub_top.is_zero()
    identities = {
        "F_t + c*F_x = 0": to_text(transport),
        f"dF/d{jet_name(k - 1)} = 0": to_text(sub_top),
    }
    return IntegrabilityVerdict(frobenius=frobenius, closed=closed, method="criterion", identities=identities)


def _leibniz_d(gens: Sequence[DiffForm]) -> DiffForm:
    """d(theta^1 ^ ... ^ theta^k) as the alternating sum over which factor is differentiated."""
    total = None
    for a in range(len(gens)):
        factors = list(gens)
        factors[a] = ext_d(gens[a])
        term = wedge_all(factors)
        if a % 2:
            term = -term
        total = term if total is None else total + term
    return total


def frobenius_direct(tws: TWSystem) -> IntegrabilityVerdict:
    """d(theta^a) ^ Omega = 0 for every generator, and dOmega = 0 expanded factor by factor."""
    gens = tws.contact.generators
    omega = tws.omega
    residuals = {}
    frobenius = True
    for a, theta in enumerate(gens, start=1):
        d_theta = ext_d(theta)
        holds = is_constraint(d_theta, omega)
        frobenius = frobenius and holds
        residuals[f"d(theta^{a}) ^ Omega = 0"] = "0" if holds else str(wedge(d_theta, omega))
    d_omega = _leibniz_d(gens)
    if not d_omega == ext_d(omega):
        raise InconsistentVerdict("Leibniz expansion of dOmega disagrees with d applied to Omega")
    closed = d_omega.is_zero()
    residuals["dOmega = 0"] = str(d_omega)
    return IntegrabilityVerdict(frobenius=frobenius, closed=closed, method="direct", identities=residuals)


def closed_factor(tws: TWSystem, H: RatExpr) -> bool:
    """dH ^ Omega = 0: H is constant along the Vessiot distribution."""
    H = H if H.chart == tws.chart else tws.restrict(H)
    return is_constraint(DiffForm.exact(H), tws.omega)
