"""
Floating-point validation of closed-form solutions.

Derivatives come from truncated Taylor arithmetic: a ``JetValue`` holds the normalized
coefficients a_i = f^(i)/i! along one direction, for a whole grid at once (shape (m+1, *grid)).
Non-finite values are carried through and counted by the grid checks instead of raising.
"""

import logging
import math
from typing import Callable, Mapping, Optional, Union

import numpy as np
import sympy as sp

from .config import get_settings
from .documents import GridReport, GridSpec
from .errors import DomainError
from .jettw import EvolutionPDE, TWSystem
from .solvable import FirstIntegral
from .symcore import jet_name

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class JetValue:
    """Truncated Taylor expansion; ``coeffs[i]`` is the i-th normalized coefficient."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: np.ndarray):
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def constant(cls, value: ArrayLike, order: int, shape: tuple[int, ...] = ()) -> "JetValue":
        coeffs = np.zeros((order + 1,) + shape)
        coeffs[0] = value
        return cls(coeffs)

    @classmethod
    def variable(cls, value: ArrayLike, order: int, shape: tuple[int, ...] = ()) -> "JetValue":
        jet = cls.constant(value, order, shape)
        if order >= 1:
            jet.coeffs[1] = 1.0
        return jet

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    def derivative(self, i: int) -> np.ndarray:
        """i-th derivative at the expansion point."""
        return self.coeffs[i] * math.factorial(i)

    def _like(self, other: Union["JetValue", float]) -> "JetValue":
        if isinstance(other, JetValue):
            return other
        return JetValue.constant(other, self.order, self.coeffs.shape[1:])

    def __add__(self, other):
        other = self._like(other)
        return JetValue(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return JetValue(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._like(other))

    def __rsub__(self, other):
        return self._like(other) - self

    def __mul__(self, other):
        if not isinstance(other, JetValue):
            return JetValue(self.coeffs * other)
        a, b = self.coeffs, other.coeffs
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for n in range(self.order + 1):
            out[n] = sum(a[i] * b[n - i] for i in range(n + 1))
        return JetValue(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, JetValue):
            return JetValue(self.coeffs / other)
        a, b = self.coeffs, other.coeffs
        q = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for n in range(self.order + 1):
            q[n] = (a[n] - sum(b[i] * q[n - i] for i in range(1, n + 1))) / b[0]
        return JetValue(q)

    def __rtruediv__(self, other):
        return self._like(other) / self

    def __pow__(self, exponent: Union[int, float]):
        if isinstance(exponent, int) or float(exponent).is_integer():
            k = int(exponent)
            if k < 0:
                return 1.0 / (self ** (-k))
            result = JetValue.constant(1.0, self.order, self.coeffs.shape[1:])
            base = self
            while k:
                if k & 1:
                    result = result * base
                base = base * base
                k >>= 1
            return result
        r = float(exponent)
        a = self.coeffs
        p = np.zeros_like(a)
        p[0] = np.power(a[0], r)
        for n in range(1, self.order + 1):
            p[n] = sum(((r + 1) * k - n) * a[k] * p[n - k] for k in range(1, n + 1)) / (n * a[0])
        return JetValue(p)


def _chain(inner: JetValue, outer0: np.ndarray, slope: Callable[[JetValue], JetValue]) -> JetValue:
    """Solve n*g_n = sum_k k*a_k*h_{n-k} where g' = a' * h and h = slope(g) depends on lower coefficients."""
    a = inner.coeffs
    g = np.zeros_like(a)
    g[0] = outer0
    for n in range(1, inner.order + 1):
        h = slope(JetValue(g)).coeffs
        g[n] = sum(k * a[k] * h[n - k] for k in range(1, n + 1)) / n
    return JetValue(g)


def jexp(u: JetValue) -> JetValue:
    return _chain(u, np.exp(u.value), lambda g: g)


def jlog(u: JetValue) -> JetValue:
    inv = 1.0 / u
    return _chain(u, np.log(u.value), lambda g: inv)


def jsqrt(u: JetValue) -> JetValue:
    return u**0.5


def jtanh(u: JetValue) -> JetValue:
    return _chain(u, np.tanh(u.value), lambda g: 1.0 - g * g)


def _stable_sech(a: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(a))
    return 2.0 * e / (1.0 + e * e)


def jsech(u: JetValue) -> JetValue:
    t = jtanh(u)
    return _chain(u, _stable_sech(u.value), lambda g: -(g * t))


def jatan(u: JetValue) -> JetValue:
    h = 1.0 / (1.0 + u * u)
    return _chain(u, np.arctan(u.value), lambda g: h)


def jsincos(u: JetValue) -> tuple[JetValue, JetValue]:
    a = u.coeffs
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    s[0], c[0] = np.sin(a[0]), np.cos(a[0])
    for n in range(1, u.order + 1):
        s[n] = sum(k * a[k] * c[n - k] for k in range(1, n + 1)) / n
        c[n] = -sum(k * a[k] * s[n - k] for k in range(1, n + 1)) / n
    return JetValue(s), JetValue(c)


_UNARY = {
    sp.exp: jexp,
    sp.log: jlog,
    sp.tanh: jtanh,
    sp.sech: jsech,
    sp.atan: jatan,
    sp.sin: lambda u: jsincos(u)[0],
    sp.cos: lambda u: jsincos(u)[1],
}


def jet_eval(expr: sp.Expr, point: Mapping[str, ArrayLike], direction: Optional[str], order: int) -> JetValue:
    """Taylor coefficients of ``expr`` along ``direction`` (None for plain evaluation).

    Values in ``point`` may be arrays; the jet then covers every element at once. At a single
    point a non-finite coefficient raises DomainError.
    """
    expr = sp.sympify(expr)
    arrays = [np.asarray(v, dtype=float) for v in point.values()]
    shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
    cache: dict[sp.Basic, JetValue] = {}

    def walk(node: sp.Basic) -> JetValue:
        if node in cache:
            return cache[node]
        if node.is_Symbol:
            name = str(node)
            if name not in point:
                raise DomainError(f"no value for '{name}'")
            value = np.broadcast_to(np.asarray(point[name], dtype=float), shape)
            result = JetValue.variable(value, order, shape) if name == direction else JetValue.constant(value, order, shape)
        elif node.is_Number or node.is_NumberSymbol:
            result = JetValue.constant(float(node), order, shape)
        elif node.is_Add:
            parts = [walk(arg) for arg in node.args]
            result = parts[0]
            for part in parts[1:]:
                result = result + part
        elif node.is_Mul:
            parts = [walk(arg) for arg in node.args]
            result = parts[0]
            for part in parts[1:]:
                result = result * part
        elif node.is_Pow:
            base, exponent = node.args
            if exponent.is_Number:
                result = walk(base) ** (int(exponent) if exponent.is_Integer else float(exponent))
            else:
                result = jexp(walk(exponent) * jlog(walk(base)))
        elif node.func in _UNARY:
            result = _UNARY[node.func](walk(node.args[0]))
        else:
            raise DomainError(f"no Taylor rule for {node.func.__name__}")
        cache[node] = result
        return result

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        jet = walk(expr)
    if not shape and not np.all(np.isfinite(jet.coeffs)):
        raise DomainError(f"{sp.sstr(expr)} is not finite at {dict(point)}")
    return jet


def make_grid(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Meshgrid arrays of shape (nt, nx)."""
    xs = np.linspace(spec.x_range[0], spec.x_range[1], spec.nx)
    ts = np.linspace(spec.t_range[0], spec.t_range[1], spec.nt)
    T, X = np.meshgrid(ts, xs, indexing="ij")
    return X, T


def default_grid() -> GridSpec:
    """Grid built entirely from the current settings."""
    return GridSpec()


def numeric_constants(constants: Optional[Mapping[str, object]]) -> dict[str, float]:
    """Constants as floats; strings such as "1/2" go through the expression grammar of sympy."""
    return {k: float(sp.sympify(v)) if isinstance(v, str) else float(v) for k, v in (constants or {}).items()}


def _substituted(candidate: sp.Expr, constants: Mapping[str, float]) -> sp.Expr:
    return sp.sympify(candidate).xreplace({sp.Symbol(k): sp.Float(v) for k, v in constants.items()})


def jet_values(candidate: sp.Expr, order: int, X: np.ndarray, T: np.ndarray, constants: Mapping[str, float]) -> dict[str, np.ndarray]:
    """u, u_x, ..., u_{order x} and u_t of the candidate on the grid, plus t, x and the constants."""
    expr = _substituted(candidate, constants)
    point = {"x": X, "t": T}
    along_x = jet_eval(expr, point, "x", order)
    along_t = jet_eval(expr, point, "t", 1)
    values = {"x": X, "t": T, "u_t": along_t.derivative(1)}
    for j in range(order + 1):
        values[jet_name(j)] = along_x.derivative(j)
    for name, value in constants.items():
        values[name] = np.full(X.shape, float(value))
    return values


def _evaluate(expr: sp.Expr, values: Mapping[str, np.ndarray]) -> np.ndarray:
    needed = {str(s) for s in sp.sympify(expr).free_symbols}
    point = {name: values[name] for name in needed if name in values}
    missing = needed - set(point)
    if missing:
        raise DomainError(f"no values for {sorted(missing)}")
    if not point:
        first = next(iter(values.values()))
        return np.full(first.shape, float(expr))
    return jet_eval(expr, point, None, 0).value


def _max_abs(values: np.ndarray, X: np.ndarray, T: np.ndarray) -> tuple[float, Optional[tuple[float, float]], int]:
    finite = np.isfinite(values)
    skipped = int(values.size - finite.sum())
    if not finite.any():
        return float("nan"), None, skipped
    masked = np.where(finite, np.abs(values), -1.0)
    idx = np.unravel_index(int(np.argmax(masked)), values.shape)
    return float(masked[idx]), (float(X[idx]), float(T[idx])), skipped


def pde_residual(pde: EvolutionPDE, candidate: sp.Expr, grid: Optional[GridSpec] = None, constants: Optional[Mapping[str, float]] = None, name: str = "candidate", tolerance: Optional[float] = None) -> GridReport:
    """max |u_t - F| over every grid node; non-finite nodes are skipped and counted."""
    grid = grid or default_grid()
    constants = numeric_constants(constants)
    X, T = make_grid(grid)
    values = jet_values(candidate, pde.order, X, T, constants)
    chart = pde.chart
    missing = sorted(str(s) for s in pde.F.to_sympy().free_symbols if str(s) not in values)
    if missing:
        raise DomainError(f"no values for {missing}")
    args = [values[n] if n in values else np.zeros(X.shape) for n in chart.names]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        F = sp.lambdify([chart.symbol(n) for n in chart.names], pde.F.to_sympy(), "numpy")
        rhs = np.broadcast_to(np.asarray(F(*args), dtype=float), X.shape)
        residual = values["u_t"] - rhs
    worst, location, skipped = _max_abs(residual, X, T)
    tol = tolerance if tolerance is not None else get_settings().tolerance
    if skipped:
        logger.warning("%s: %d nodes skipped (non-finite)", name, skipped)
    return GridReport(
        name=name,
        grid=grid,
        constants={k: float(v) for k, v in constants.items()},
        max_residual=worst,
        location=location,
        skipped=skipped,
        tolerance=tol,
        passed=bool(worst < tol) if location is not None else False,
    )


def level_deviation(expr: sp.Expr, values: Mapping[str, np.ndarray]) -> tuple[float, float]:
    """(value at the first node, max deviation from it) of a jet expression on the grid."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        level = _evaluate(expr, values)
        finite = np.isfinite(level)
        if not finite.any():
            return float("nan"), float("nan")
        first = level[finite][0]
        return float(first), float(np.max(np.abs(level[finite] - first)))


def level_check(tws: TWSystem, f: FirstIntegral, candidate: sp.Expr, grid: Optional[GridSpec] = None, constants: Optional[Mapping[str, float]] = None, name: str = "f", tolerance: Optional[float] = None) -> GridReport:
    """Deviation of a first integral from its value at the first node, along the candidate.

    The unrestricted source expression is used when present, so u_x comes from the candidate
    rather than from -F~/c.
    """
    grid = grid or default_grid()
    constants = numeric_constants(constants)
    X, T = make_grid(grid)
    values = jet_values(candidate, tws.order, X, T, constants)
    expr = f.source if f.source is not None else f.expr
    expr = expr.to_sympy() if hasattr(expr, "to_sympy") else sp.sympify(expr)
    level, deviation = level_deviation(expr, values)
    tol = tolerance if tolerance is not None else get_settings().tolerance
    return GridReport(
        name=name,
        grid=grid,
        constants={k: float(v) for k, v in constants.items()},
        max_residual=deviation,
        deviations={name: deviation},
        levels={name: level},
        tolerance=tol,
        passed=bool(deviation < tol),
    )


def _trapezoid(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    integrate = getattr(np, "trapezoid", None) or np.trapz
    return integrate(y, x, axis=-1)


def motion_constant(G: sp.Expr, candidate: sp.Expr, order: int, grid: Optional[GridSpec] = None, constants: Optional[Mapping[str, float]] = None) -> tuple[np.ndarray, float]:
    """Integral of G over x on each time row, and the largest change across rows (up to boundary terms)."""
    grid = grid or default_grid()
    constants = numeric_constants(constants)
    X, T = make_grid(grid)
    values = jet_values(candidate, order, X, T, constants)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        density = np.broadcast_to(_evaluate(sp.sympify(G), values), X.shape)
        rows = _trapezoid(density, X[0])
    finite = rows[np.isfinite(rows)]
    spread = float(np.max(finite) - np.min(finite)) if finite.size else float("nan")
    return rows, spread


def soliton(c: str = "c", phase: str = "M") -> sp.Expr:
    """3c sech^2(sqrt(c)/2 (x - c t) + M)."""
    cs, x, t, m = sp.Symbol(c), sp.Symbol("x"), sp.Symbol("t"), sp.Symbol(phase)
    return 3 * cs * sp.sech(sp.sqrt(cs) / 2 * (x - cs * t) + m) ** 2

