"""
Fraction-free Gauss-Jordan elimination over rational-function fields.

Rows are lists of ``RatExpr`` on one chart. Each row is scaled to polynomial entries first,
then elimination uses ``row_j = p * row_j - a * row_i`` so no division happens until the
nullspace vectors are read off. Content gcds are divided out between steps when
``Settings.gcd_reduce`` is on.
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

from sympy.polys.rings import PolyElement

from .config import get_settings
from .errors import ChartMismatch, RankDeficient
from .symcore import Chart, RatExpr

logger = logging.getLogger(__name__)


@dataclass
class Echelon:
    """Reduced form of a matrix.

    Attributes:
        rows: nonzero polynomial rows after elimination
        pivots: pivot column of each row, same order as ``rows``
        ncols: number of columns
    """

    chart: Chart
    rows: list[list[PolyElement]]
    pivots: list[int]
    ncols: int
    free: list[int] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _chart_of(rows: Sequence[Sequence[RatExpr]]) -> Chart:
    charts = {entry.chart for row in rows for entry in row}
    if len(charts) != 1:
        raise ChartMismatch(f"matrix entries live on {len(charts)} charts")
    return charts.pop()


def _clear_row(row: Sequence[RatExpr]) -> list[PolyElement]:
    dens = [e.den for e in row if e.num]
    if not dens:
        return [e.num for e in row]
    common = reduce(lambda a, b: a.lcm(b), dens)
    return [e.num * common.exquo(e.den) if e.num else e.num for e in row]


def _strip_content(row: list[PolyElement]) -> list[PolyElement]:
    nonzero = [p for p in row if p]
    if not nonzero:
        return row
    g = reduce(lambda a, b: a.gcd(b), nonzero)
    if g.is_ground:
        return row
    return [p.exquo(g) if p else p for p in row]


def echelon(rows: Sequence[Sequence[RatExpr]], prefer_free: Sequence[int] = ()) -> Echelon:
    """Row-reduce. Columns in ``prefer_free`` are tried as pivots last, so they stay free when possible."""
    if not rows:
        raise ValueError("empty matrix")
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise ValueError("ragged matrix")
    chart = _chart_of(rows)
    strip = get_settings().gcd_reduce
    work = [_clear_row(r) for r in rows]
    order = [j for j in range(ncols) if j not in prefer_free] + [j for j in prefer_free if 0 <= j < ncols]
    pivots: list[int] = []
    done: list[list[PolyElement]] = []
    for col in order:
        candidates = [r for r in work if r[col]]
        if not candidates:
            continue
        # smallest pivot keeps intermediate expressions small
        pivot_row = min(candidates, key=lambda r: len(r[col].terms()))
        work.remove(pivot_row)
        p = pivot_row[col]
        for target in (work, done):
            for i, r in enumerate(target):
                a = r[col]
                if a:
                    new = [p * x - a * y for x, y in zip(r, pivot_row)]
                    target[i] = _strip_content(new) if strip else new
        done.append(_strip_content(pivot_row) if strip else pivot_row)
        pivots.append(col)
        work = [r for r in work if any(r)]
    free = [j for j in range(ncols) if j not in pivots]
    logger.debug("echelon: %d x %d, rank %d", len(rows), ncols, len(pivots))
    return Echelon(chart=chart, rows=done, pivots=pivots, ncols=ncols, free=free)


def rank(rows: Sequence[Sequence[RatExpr]]) -> int:
    return echelon(rows).rank


def nullspace(rows: Sequence[Sequence[RatExpr]], prefer_free: Sequence[int] = (), expected: Optional[int] = None) -> list[list[RatExpr]]:
    """Basis of the right nullspace, one vector per free column.

    The vector for free column f has 1 in position f, 0 in the other free positions, and
    ``-row[f] / row[pivot]`` in each pivot position.

    Raises:
        RankDeficient: ``expected`` is given and the nullspace dimension differs
    """
    ech = echelon(rows, prefer_free)
    chart = ech.chart
    if expected is not None and len(ech.free) != expected:
        raise RankDeficient(f"nullspace has dimension {len(ech.free)}, expected {expected}", rank=ech.rank, expected=ech.ncols - expected)
    basis = []
    for f in ech.free:
        vec = [RatExpr.zero(chart) for _ in range(ech.ncols)]
        vec[f] = RatExpr.one(chart)
        for row, col in zip(ech.rows, ech.pivots):
            if row[f]:
                vec[col] = RatExpr(chart, -row[f], row[col])
        basis.append(vec)
    return basis
