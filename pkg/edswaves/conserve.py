"""
Conservation laws of the evolution equation and conserved densities of the reduced system.

``check_conservation`` works on the unreduced jet chart: u_t and its x-derivatives are replaced
by F and its total x-derivatives. ``classify_tw_density`` works on the reduced chart with the
Vessiot fields.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from .documents import DensityClass
from .exterior import DiffForm, wedge_all
from .jettw import EvolutionPDE, MultiIndex, TWSystem
from .solvable import FirstIntegral
from .symcore import Chart, RatExpr, jet_chart, jet_name, parse_rational, to_text, try_rational

logger = logging.getLogger(__name__)


def jet_order(chart: Chart) -> int:
    """Highest u_{jx} among the chart's coordinates."""
    orders = []
    for name in chart.coords:
        try:
            orders.append(MultiIndex.parse(name).count)
        except ValueError:
            continue
    if not orders:
        raise ValueError(f"{chart} has no jet coordinates")
    return max(orders)


def total_x(e: RatExpr, order: int) -> RatExpr:
    """D_x e = de/dx + sum_j u_{(j+1)x} de/du_{jx}; the result lives one jet order higher."""
    target = jet_chart(order + 1, e.chart.params)
    e = e.on(target)
    result = e.diff("x")
    for j in range(order + 1):
        name = jet_name(j)
        if e.depends_on(name):
            result = result + RatExpr.var(target, jet_name(j + 1)) * e.diff(name)
    return result


@dataclass
class DensityFluxPair:
    """T and X on the same jet chart (parameters included)."""

    T: RatExpr
    X: RatExpr

    @classmethod
    def from_text(cls, T: str, X: Optional[str], pde: EvolutionPDE) -> "DensityFluxPair":
        chart = pde.chart
        flux = parse_rational(X, chart) if X else RatExpr.zero(chart)
        return cls(T=parse_rational(T, chart), X=flux)


@dataclass
class ConservationCheck:
    holds: bool
    residual: RatExpr

    def __bool__(self) -> bool:
        return self.holds


def check_conservation(pde: EvolutionPDE, pair: DensityFluxPair) -> ConservationCheck:
    """D_t T + D_x X = 0 on solutions, with u_{t,jx} replaced by D_x^j F."""
    k = pde.order
    m = max(jet_order(pair.T.chart), jet_order(pair.X.chart), k)
    top = max(m + k, m + 1)
    chart = jet_chart(top, pde.chart.params)
    T = pair.T.on(chart)
    X = pair.X.on(chart)
    # D_x^j F for j = 0..m
    flows = [pde.F]
    for j in range(1, m + 1):
        flows.append(total_x(flows[-1], k + j - 1))
    residual = T.diff("t")
    for j in range(m + 1):
        name = jet_name(j)
        if T.depends_on(name):
            residual = residual + flows[j].on(chart) * T.diff(name)
    residual = residual + total_x(X, top - 1).on(chart) if not X.is_zero() else residual
    holds = residual.is_zero()
    logger.debug("conservation of %s: %s", to_text(pair.T), holds)
    return ConservationCheck(holds=holds, residual=residual)


@dataclass
class DensityVerdict:
    """Strongest label whose identity holds; ``residual`` is V1(G) for the 'none' label."""

    classification: DensityClass
    residual: Optional[RatExpr] = None
    conservation: Optional[ConservationCheck] = None
    functional_dependence: Optional[bool] = None


def classify_tw_density(
    tws: TWSystem,
    G: RatExpr,
    integrals: Sequence[FirstIntegral] = (),
    pair: Optional[DensityFluxPair] = None,
) -> DensityVerdict:
    """Classify a density on the reduced chart.

    In order: V1(G) = V2(G) = 0 gives first-integral-composite; V1(G) + c*V2(G) = 0 gives
    tw-flux-trivial (automatic when G has no explicit t, x on a Frobenius system,
    where V1 + c*V2 = d/dt + c*d/dx); a supplied flux that passes
    ``check_conservation`` gives conserved-on-pde; otherwise none.
    """
    if G.chart != tws.chart:
        G = tws.restrict(G)
    V1, V2 = tws.vessiot
    r1, r2 = V1.apply(G), V2.apply(G)
    verdict: DensityVerdict
    if r1.is_zero() and r2.is_zero():
        verdict = DensityVerdict(DensityClass.FIRST_INTEGRAL_COMPOSITE)
    elif (r1 + tws.c_expr * r2).is_zero():
        verdict = DensityVerdict(DensityClass.TW_FLUX_TRIVIAL)
    else:
        verdict = DensityVerdict(DensityClass.NONE, residual=r1)
    if pair is not None:
        verdict.conservation = check_conservation(tws.pde, pair)
        if verdict.classification is DensityClass.NONE and verdict.conservation.holds:
            verdict.classification = DensityClass.CONSERVED_ON_PDE
    rationals = [try_rational(f.expr, tws.chart) for f in integrals]
    if rationals and all(r is not None for r in rationals):
        verdict.functional_dependence = functional_dependence(G, rationals)
    return verdict


def functional_dependence(G: RatExpr, integrals: Sequence[RatExpr]) -> bool:
    """dG ^ df^1 ^ ... ^ df^m = 0."""
    chart = G.chart
    if len(integrals) + 1 > chart.dim:
        return True
    return wedge_all([DiffForm.exact(G)] + [DiffForm.exact(f.on(chart)) for f in integrals]).is_zero()
