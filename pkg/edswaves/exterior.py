"""
Exterior calculus with exact rational coefficients on a fixed chart.

Forms store one coefficient per strictly increasing tuple of coordinate indices, so
antisymmetry never has to be enforced after construction. Parameters of the chart are
constants for ``ext_d``.
"""

import logging
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence, Union

import sympy as sp

from .errors import ChartMismatch, DegreeOverflow, InconsistentVerdict, RankDeficient
from .linalg import echelon, nullspace
from .symcore import Chart, RatExpr, to_text

logger = logging.getLogger(__name__)

Coefficient = Union[RatExpr, int]


def _check_chart(a: Chart, b: Chart) -> None:
    if a != b:
        raise ChartMismatch(f"{a} vs {b}")


class VectorField:
    """A derivation sum_k X^k d/dz_k with rational coefficients."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: Chart, coeffs: Optional[Mapping[str, Coefficient]] = None):
        clean = {}
        for name, value in (coeffs or {}).items():
            if not chart.is_coord(name):
                raise ChartMismatch(f"'{name}' is not a coordinate of {chart}")
            value = value if isinstance(value, RatExpr) else RatExpr.const(chart, value)
            _check_chart(chart, value.chart)
            if not value.is_zero():
                clean[name] = value
        self.chart = chart
        self.coeffs = clean

    @classmethod
    def basis(cls, chart: Chart, name: str) -> "VectorField":
        return cls(chart, {name: 1})

    def coeff(self, name: str) -> RatExpr:
        return self.coeffs.get(name, RatExpr.zero(self.chart))

    def apply(self, f: Union[RatExpr, sp.Expr]) -> Union[RatExpr, sp.Expr]:
        """X(f). Rational input stays rational; a sympy expression is differentiated as a tree."""
        if isinstance(f, RatExpr):
            _check_chart(self.chart, f.chart)
            total = RatExpr.zero(self.chart)
            for name, c in self.coeffs.items():
                total = total + c * f.diff(name)
            return total
        expr = sp.sympify(f)
        terms = [c.to_sympy() * sp.diff(expr, self.chart.symbol(name)) for name, c in self.coeffs.items()]
        return sp.Add(*terms)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_chart(self.chart, other.chart)
        names = set(self.coeffs) | set(other.coeffs)
        return VectorField(self.chart, {n: self.coeff(n) + other.coeff(n) for n in names})

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, {n: -c for n, c in self.coeffs.items()})

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __mul__(self, scalar: Coefficient) -> "VectorField":
        return VectorField(self.chart, {n: c * scalar for n, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorField) or other.chart != self.chart:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = [f"({to_text(self.coeffs[n])}) d/d{n}" for n in self.chart.coords if n in self.coeffs]
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"VectorField({self})"


class DiffForm:
    """A p-form; ``coeffs`` maps increasing index tuples to nonzero coefficients."""

    __slots__ = ("chart", "degree", "coeffs")

    def __init__(self, chart: Chart, degree: int, coeffs: Optional[Mapping[tuple[int, ...], Coefficient]] = None):
        if degree < 0 or degree > chart.dim:
            raise DegreeOverflow(f"degree {degree} on a chart of dimension {chart.dim}")
        clean = {}
        for key, value in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree or any(a >= b for a, b in zip(key, key[1:])) or (key and (key[0] < 0 or key[-1] >= chart.dim)):
                raise ValueError(f"bad index tuple {key} for a {degree}-form")
            value = value if isinstance(value, RatExpr) else RatExpr.const(chart, value)
            _check_chart(chart, value.chart)
            if not value.is_zero():
                clean[key] = value
        self.chart = chart
        self.degree = degree
        self.coeffs = clean

    # construction

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "DiffForm":
        return cls(chart, degree)

    @classmethod
    def scalar(cls, f: RatExpr) -> "DiffForm":
        return cls(f.chart, 0, {(): f})

    @classmethod
    def d_coord(cls, chart: Chart, name: str) -> "DiffForm":
        return cls(chart, 1, {(chart.index(name),): 1})

    @classmethod
    def from_terms(cls, chart: Chart, terms: Mapping[tuple[str, ...], Coefficient]) -> "DiffForm":
        """Build from coordinate-name tuples in any order, e.g. {("x", "t"): 1} is dx^dt."""
        degrees = {len(names) for names in terms}
        if len(degrees) > 1:
            raise ValueError("mixed degrees")
        degree = degrees.pop() if degrees else 0
        form = cls.zero(chart, degree)
        for names, value in terms.items():
            value = value if isinstance(value, RatExpr) else RatExpr.const(chart, value)
            piece = cls.scalar(value)
            for name in names:
                piece = wedge(piece, cls.d_coord(chart, name))
            form = form + piece
        return form

    @classmethod
    def exact(cls, f: RatExpr) -> "DiffForm":
        return ext_d(cls.scalar(f))

    # queries

    def coeff(self, *names: str) -> RatExpr:
        """Coefficient of dz_a^dz_b^... with the sign of sorting the names into chart order."""
        idx = [self.chart.index(n) for n in names]
        if len(set(idx)) != len(idx):
            return RatExpr.zero(self.chart)
        sign = _permutation_sign(idx)
        value = self.coeffs.get(tuple(sorted(idx)), RatExpr.zero(self.chart))
        return value if sign > 0 else -value

    @property
    def value(self) -> RatExpr:
        """The function of a 0-form."""
        if self.degree != 0:
            raise ValueError(f"a {self.degree}-form is not a function")
        return self.coeffs.get((), RatExpr.zero(self.chart))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "DiffForm") -> "DiffForm":
        _check_chart(self.chart, other.chart)
        if other.degree != self.degree:
            raise ValueError(f"cannot add a {self.degree}-form and a {other.degree}-form")
        out = dict(self.coeffs)
        for key, value in other.coeffs.items():
            out[key] = out[key] + value if key in out else value
        return DiffForm(self.chart, self.degree, out)

    def __neg__(self) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def __mul__(self, scalar: Coefficient) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {k: v * scalar for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar: Coefficient) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {k: v / scalar for k, v in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffForm) or other.chart != self.chart or other.degree != self.degree:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for key in sorted(self.coeffs):
            basis = "^".join(f"d{self.chart.coords[i]}" for i in key)
            coef = to_text(self.coeffs[key])
            parts.append(f"({coef}) {basis}" if basis else f"({coef})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"DiffForm[{self.degree}]({self})"


def _permutation_sign(seq: Sequence[int]) -> int:
    inversions = sum(1 for a, b in combinations(seq, 2) if a > b)
    return -1 if inversions % 2 else 1


def _as_form(a: Union[DiffForm, RatExpr]) -> DiffForm:
    return a if isinstance(a, DiffForm) else DiffForm.scalar(a)


def wedge(a: Union[DiffForm, RatExpr], b: Union[DiffForm, RatExpr]) -> DiffForm:
    """a^b; raises DegreeOverflow when the degrees exceed the chart dimension."""
    a, b = _as_form(a), _as_form(b)
    _check_chart(a.chart, b.chart)
    degree = a.degree + b.degree
    if degree > a.chart.dim:
        raise DegreeOverflow(f"{a.degree}-form ^ {b.degree}-form on a chart of dimension {a.chart.dim}")
    out: dict[tuple[int, ...], RatExpr] = {}
    for ka, va in a.coeffs.items():
        for kb, vb in b.coeffs.items():
            if set(ka) & set(kb):
                continue
            merged = ka + kb
            term = va * vb
            if _permutation_sign(merged) < 0:
                term = -term
            key = tuple(sorted(merged))
            out[key] = out[key] + term if key in out else term
    return DiffForm(a.chart, degree, out)


def wedge_all(forms: Iterable[DiffForm], chart: Optional[Chart] = None) -> DiffForm:
    result = None
    for form in forms:
        result = form if result is None else wedge(result, form)
    if result is None:
        if chart is None:
            raise ValueError("empty wedge product needs a chart")
        return DiffForm.scalar(RatExpr.one(chart))
    return result


def ext_d(a: Union[DiffForm, RatExpr]) -> DiffForm:
    """Exterior derivative over the chart coordinates."""
    a = _as_form(a)
    chart = a.chart
    if a.degree >= chart.dim:
        raise DegreeOverflow(f"d of a {a.degree}-form on a chart of dimension {chart.dim}")
    out: dict[tuple[int, ...], RatExpr] = {}
    for key, value in a.coeffs.items():
        for k, name in enumerate(chart.coords):
            if k in key or not value.depends_on(name):
                continue
            term = value.diff(name)
            # moving dz_k past the smaller indices of key
            if sum(1 for i in key if i < k) % 2:
                term = -term
            new_key = tuple(sorted(key + (k,)))
            out[new_key] = out[new_key] + term if new_key in out else term
    return DiffForm(chart, a.degree + 1, out)


def _d_or_zero(a: DiffForm) -> Optional[DiffForm]:
    """d(a), or None when a already has top degree (d vanishes there)."""
    if a.degree >= a.chart.dim:
        return None
    return ext_d(a)


def interior(X: VectorField, a: DiffForm) -> DiffForm:
    """Contraction into the first slot."""
    _check_chart(X.chart, a.chart)
    if a.degree == 0:
        raise DegreeOverflow("cannot contract a 0-form")
    out: dict[tuple[int, ...], RatExpr] = {}
    coords = a.chart.coords
    for key, value in a.coeffs.items():
        for pos, idx in enumerate(key):
            component = X.coeffs.get(coords[idx])
            if component is None:
                continue
            term = component * value
            if pos % 2:
                term = -term
            new_key = key[:pos] + key[pos + 1 :]
            out[new_key] = out[new_key] + term if new_key in out else term
    return DiffForm(a.chart, a.degree - 1, out)


def pair(theta: DiffForm, X: VectorField) -> RatExpr:
    """theta(X) for a 1-form."""
    if theta.degree != 1:
        raise ValueError("pair needs a 1-form")
    return interior(X, theta).value


def evaluate(form: DiffForm, fields: Sequence[VectorField]) -> RatExpr:
    """form(X_1, ..., X_p), contracting X_1 first."""
    if len(fields) != form.degree:
        raise ValueError(f"a {form.degree}-form needs {form.degree} fields, got {len(fields)}")
    result = form
    for X in fields:
        result = interior(X, result)
    return result.value


def lie_deriv(X: VectorField, a: Union[DiffForm, RatExpr]) -> DiffForm:
    """Cartan's formula L_X a = X _| da + d(X _| a)."""
    a = _as_form(a)
    if a.degree == 0:
        return DiffForm.scalar(X.apply(a.value))
    da = _d_or_zero(a)
    result = interior(X, da) if da is not None else DiffForm.zero(a.chart, a.degree)
    return result + ext_d(interior(X, a))


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] with components X(Y^k) - Y(X^k)."""
    _check_chart(X.chart, Y.chart)
    chart = X.chart
    return VectorField(chart, {name: X.apply(Y.coeff(name)) - Y.apply(X.coeff(name)) for name in chart.coords})


class Codistribution:
    """Span of pointwise independent 1-forms."""

    def __init__(self, generators: Sequence[DiffForm]):
        if not generators:
            raise ValueError("a codistribution needs at least one generator")
        self.chart = generators[0].chart
        for g in generators:
            _check_chart(self.chart, g.chart)
            if g.degree != 1:
                raise ValueError(f"generators must be 1-forms, got degree {g.degree}")
        self.generators = list(generators)
        r = echelon(self.matrix()).rank
        if r != len(self.generators):
            raise RankDeficient(f"{len(self.generators)} generators span rank {r}", rank=r, expected=len(self.generators))

    def matrix(self) -> list[list[RatExpr]]:
        zero = RatExpr.zero(self.chart)
        return [[g.coeffs.get((k,), zero) for k in range(self.chart.dim)] for g in self.generators]

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i: int) -> DiffForm:
        return self.generators[i]


def _interior_conditions(omega: DiffForm) -> list[list[RatExpr]]:
    """Rows of the linear system X _| omega = 0 in the unknown components of X."""
    chart = omega.chart
    zero = RatExpr.zero(chart)
    rows = []
    for rest in combinations(range(chart.dim), omega.degree - 1):
        row = []
        for k in range(chart.dim):
            if k in rest:
                row.append(zero)
                continue
            key = tuple(sorted(rest + (k,)))
            value = omega.coeffs.get(key)
            if value is None:
                row.append(zero)
            else:
                row.append(-value if key.index(k) % 2 else value)
        if any(not e.is_zero() for e in row):
            rows.append(row)
    return rows


def kernel(obj: Union[DiffForm, Codistribution], free: Optional[Sequence[str]] = None) -> list[VectorField]:
    """Pointwise kernel over the rational-function field.

    With ``free`` the named coordinates are kept as free columns when possible, and each basis
    field has coefficient 1 on its own free coordinate and 0 on the others. Without it each
    basis field is scaled to polynomial coefficients.
    """
    if isinstance(obj, Codistribution):
        chart = obj.chart
        rows = obj.matrix()
    else:
        chart = obj.chart
        if obj.degree == 0:
            raise ValueError("the kernel of a 0-form is not defined")
        rows = _interior_conditions(obj)
    if not rows:
        return [VectorField.basis(chart, name) for name in chart.coords]
    prefer = [chart.index(n) for n in free] if free else []
    basis = nullspace(rows, prefer_free=prefer)
    fields = []
    for vec in basis:
        if not free:
            vec = _polynomial_scale(vec)
        fields.append(VectorField(chart, {chart.coords[k]: v for k, v in enumerate(vec)}))
    return fields


def _polynomial_scale(vec: list[RatExpr]) -> list[RatExpr]:
    dens = [v.den for v in vec if not v.is_zero()]
    if not dens:
        return vec
    common = dens[0]
    for d in dens[1:]:
        common = common.lcm(d)
    factor = RatExpr(vec[0].chart, common)
    return [v * factor for v in vec]


def annihilator(fields: Sequence[VectorField]) -> list[DiffForm]:
    """1-forms vanishing on every field; a basis of the annihilator."""
    if not fields:
        raise ValueError("annihilator needs at least one field")
    chart = fields[0].chart
    rows = [[X.coeff(name) for name in chart.coords] for X in fields]
    basis = nullspace(rows)
    return [DiffForm(chart, 1, {(k,): v for k, v in enumerate(_polynomial_scale(vec))}) for vec in basis]


def characterising_form(codist: Codistribution) -> DiffForm:
    """theta^1 ^ ... ^ theta^k."""
    return wedge_all(codist.generators)


def is_simple(omega: DiffForm) -> bool:
    """Decomposable iff the kernel of X _| omega = 0 has dimension dim - p."""
    if omega.degree < 1:
        raise ValueError("is_simple needs degree >= 1")
    if omega.is_zero():
        return False
    rows = _interior_conditions(omega)
    return omega.chart.dim - echelon(rows).rank == omega.chart.dim - omega.degree


def is_constraint(theta: DiffForm, omega: DiffForm) -> bool:
    """theta ^ omega = 0."""
    if theta.degree + omega.degree > omega.chart.dim:
        return True
    return wedge(theta, omega).is_zero()


def is_involutive(fields: Sequence[VectorField]) -> bool:
    """Bracket closure of the span of ``fields``."""
    if len(fields) < 2:
        return True
    gens = annihilator(fields)
    for i, X in enumerate(fields):
        for Y in fields[i + 1 :]:
            Z = bracket(X, Y)
            if any(not pair(theta, Z).is_zero() for theta in gens):
                return False
    return True


def generators_of(omega: DiffForm) -> Codistribution:
    """1-form generators of a simple form, recovered as the annihilator of its kernel."""
    return Codistribution(annihilator(kernel(omega)))


def is_frobenius(obj: Union[DiffForm, Codistribution]) -> bool:
    """d(theta^a) ^ Omega = 0 for every generator, cross-checked by bracket closure of the kernel.

    Raises:
        InconsistentVerdict: the two procedures disagree
    """
    if isinstance(obj, DiffForm):
        if not is_simple(obj):
            logger.debug("form is not simple; not Frobenius integrable")
            return False
        codist = generators_of(obj)
    else:
        codist = obj
    omega = characterising_form(codist)
    by_forms = all(is_constraint(ext_d(theta), omega) for theta in codist)
    by_brackets = is_involutive(kernel(codist))
    if by_forms != by_brackets:
        raise InconsistentVerdict(f"form test says {by_forms}, bracket test says {by_brackets}")
    return by_forms
