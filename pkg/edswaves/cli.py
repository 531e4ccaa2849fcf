"""
eds-waves command line.

Usage:
    eds-waves run problems/kdv_eq7.json --output kdv.report.json
    eds-waves run problems/linear_dispersive.json --only integrability,candidates --grid 101,51 --tol 1e-9
    eds-waves explain kdv.report.json

``run`` exits 0 when every check in the report passes, 1 when one fails and 2 on input errors.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Union

import sympy as sp
from pydantic import ValidationError
from tqdm import tqdm

from . import __version__
from .config import get_settings
from .conserve import DensityFluxPair, classify_tw_density
from .documents import (
    STAGE_ORDER,
    ChainReport,
    Check,
    DensityReport,
    FactorReport,
    GridReport,
    IntegrabilityReport,
    IntegralReport,
    ProblemDocument,
    ReductionReport,
    Report,
    Stage,
    StageError,
    StructureReport,
    StructureSpec,
    Verdict,
    dump_json,
)
from .errors import DocumentError, EdsError, NotAnnihilated, NotDirectSum, OrderTooLow
from .exterior import DiffForm, VectorField, bracket
from .jettw import EvolutionPDE, IntegrabilityVerdict, TWSystem, closed_factor, frobenius_direct, reduce, theorem31, vessiot_sum_defect
from .numcheck import default_grid, level_check, motion_constant, pde_residual
from .solvable import FirstIntegral, Provenance, chain, integrate_closed, prop26_factors, scale_to_symmetry, verify_first_integral, verify_solvable
from .symcore import Chart, RatExpr, jet_chart, parse, parse_rational, to_text, try_rational
from .utils import InputInfo, PipelineInfo, create_provenance, document_digest

logger = logging.getLogger(__name__)

# Stages that always run because every later stage needs them.
CORE_STAGES = {Stage.PARSE.value, Stage.REDUCE.value, Stage.CONTACT.value, Stage.VESSIOT.value}

Expression = Union[RatExpr, sp.Expr]


def load_document(path: Path) -> tuple[ProblemDocument, bytes]:
    """Read and validate a problem document; every failure becomes DocumentError."""
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e}") from e
    try:
        return ProblemDocument.model_validate(json.loads(data)), data
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path}: invalid JSON: {e}") from e
    except ValidationError as e:
        raise DocumentError(f"{path}: schema violation:\n{e}") from e


def _stage_error(stage: Stage, error: EdsError) -> StageError:
    details = {k: v for k, v in error.to_dict().items() if k not in ("code", "message")}
    return StageError(stage=stage.value, code=error.code, message=str(error), details=details)


def _verdict_pair(result: IntegrabilityVerdict) -> IntegrabilityReport:
    names = list(result.identities)
    if result.method == "criterion":
        transport, sub_top = names
        frob = Verdict(passed=result.frobenius, identity=transport, residual=None if result.frobenius else result.identities[transport])
        failing = transport if not result.frobenius else sub_top
        closed = Verdict(passed=result.closed, identity=f"{transport} and {sub_top}", residual=None if result.closed else result.identities[failing])
    else:
        *theta_names, d_omega = names
        failing = next((n for n in theta_names if result.identities[n] != "0"), None)
        frob = Verdict(passed=result.frobenius, identity="d(theta^a) ^ Omega = 0 for every a", residual=None if failing is None else f"{failing}: {result.identities[failing]}")
        closed = Verdict(passed=result.closed, identity=d_omega, residual=None if result.closed else result.identities[d_omega])
    return IntegrabilityReport(method=result.method, frobenius=frob, closed=closed)


class Pipeline:
    """One run over one document; every stage records into ``self.report``."""

    def __init__(self, doc: ProblemDocument, data: bytes, only: Optional[Sequence[str]] = None, grid: Optional[tuple[int, int]] = None, tol: Optional[float] = None, convention: Optional[str] = None):
        self.doc = doc
        self.grid_override = grid
        self.tol = tol if tol is not None else get_settings().tolerance
        requested = set(only) if only else set(STAGE_ORDER)
        unknown = requested - set(STAGE_ORDER)
        if unknown:
            raise DocumentError(f"unknown stages {sorted(unknown)}; choose from {STAGE_ORDER}")
        self.stages = [s for s in STAGE_ORDER if s in requested | CORE_STAGES]
        convention = convention or doc.convention
        provenance = create_provenance(
            PipelineInfo(name="eds-waves", version=__version__, stages=tuple(self.stages)),
            InputInfo(name=doc.name, sha256=document_digest(data), convention=convention),
        )
        self.report = Report(document=doc.name, convention=convention, provenance=provenance, stages=self.stages)
        self.pde: Optional[EvolutionPDE] = None
        self.tws: Optional[TWSystem] = None
        self.candidates: dict[str, Expression] = {}
        self.integrals: dict[str, FirstIntegral] = {}
        self.structure_fields: Optional[tuple[list[VectorField], list[str]]] = None
        self.input_error = False

    # bookkeeping

    def fail(self, stage: Stage, error: EdsError, expected: bool = False) -> StageError:
        """Record a stage error; expected ones stay out of ``report.errors``."""
        entry = _stage_error(stage, error)
        if not expected:
            self.report.errors.append(entry)
        logger.info("%s: %s", stage.value, error)
        return entry

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.report.checks.append(Check(name=name, passed=passed, detail=detail))

    def wants(self, stage: Stage) -> bool:
        return stage.value in self.stages

    # stages

    def parse(self) -> None:
        spec = self.doc.pde
        try:
            self.pde = EvolutionPDE.from_text(spec.order, spec.F, spec.params, spec.wave_speed)
        except EdsError as e:
            self.fail(Stage.PARSE, e)
            self.input_error = True
            return
        jet = jet_chart(spec.order, self.pde.chart.params)
        texts = [(f.name, f.expr) for f in self.doc.candidates.first_integrals]
        texts += [(d.name, d.T) for d in self.doc.candidates.densities]
        for name, text in texts:
            try:
                self.candidates[name] = _parse_any(text, jet)
            except EdsError as e:
                self.fail(Stage.PARSE, e)
                self.input_error = True

    def reduce(self) -> None:
        try:
            self.tws = reduce(self.pde)
        except EdsError as e:
            self.fail(Stage.REDUCE, e)
            return
        self.report.reduction = ReductionReport(pde=str(self.pde), chart=list(self.tws.chart.coords), F_tilde=to_text(self.tws.F_tilde))
        expected = self.doc.pde.expect.F_tilde if self.doc.pde.expect else None
        if expected is not None:
            try:
                target = parse_rational(expected, self.tws.chart)
                self.check("F_tilde", target == self.tws.F_tilde, f"expected {expected}, got {to_text(self.tws.F_tilde)}")
            except EdsError as e:
                self.fail(Stage.REDUCE, e)
                self.input_error = True

    def contact(self) -> None:
        try:
            self.report.reduction.contact = [str(theta) for theta in self.tws.contact.generators]
            self.report.reduction.omega = str(self.tws.omega)
        except EdsError as e:
            self.fail(Stage.CONTACT, e)
            self.tws = None

    def vessiot(self) -> None:
        try:
            V1, V2 = self.tws.vessiot
        except EdsError as e:
            self.fail(Stage.VESSIOT, e)
            self.tws = None
            return
        reduction = self.report.reduction
        reduction.V1, reduction.V2 = str(V1), str(V2)
        defect = vessiot_sum_defect(self.tws)
        reduction.vessiot_sum = Verdict(passed=defect.is_zero(), identity="V1 + c*V2 = d/dt + c*d/dx", residual=None if defect.is_zero() else str(defect))
        commutator = bracket(V1, V2)
        reduction.vessiot_bracket = Verdict(passed=commutator.is_zero(), identity="[V1, V2] = 0", residual=None if commutator.is_zero() else str(commutator))

    def integrability(self) -> None:
        criterion = None
        try:
            criterion = theorem31(self.tws)
            self.report.theorem31 = _verdict_pair(criterion)
        except OrderTooLow as e:
            self.report.diagnostics.append(f"criterion skipped: {e}; the direct computation decides alone")
        except EdsError as e:
            self.fail(Stage.INTEGRABILITY, e)
        try:
            direct = frobenius_direct(self.tws)
        except EdsError as e:
            self.fail(Stage.INTEGRABILITY, e)
            return
        self.report.frobenius_direct = _verdict_pair(direct)
        if criterion is not None:
            agree = criterion.frobenius == direct.frobenius and criterion.closed == direct.closed
            self.report.agreement = Verdict(passed=agree, identity="criterion verdicts == direct verdicts")
            self.check("agreement", agree)
        if direct.frobenius and not self.report.reduction.vessiot_bracket.passed:
            self.report.diagnostics.append("Frobenius integrable but [V1, V2] != 0")
        if direct.frobenius:
            vessiot_sum = self.report.reduction.vessiot_sum
            self.check("vessiot_sum", vessiot_sum.passed, vessiot_sum.residual or vessiot_sum.identity)
        expect = self.doc.pde.expect
        if expect is not None:
            if expect.frobenius is not None:
                self.check("frobenius", direct.frobenius == expect.frobenius, f"expected {expect.frobenius}")
            if expect.closed is not None:
                self.check("closed", direct.closed == expect.closed, f"expected {expect.closed}")

    def structure(self) -> None:
        spec = self.doc.structure
        if spec is None:
            return
        try:
            specs = spec.ordered()
        except ValueError as e:
            self.fail(Stage.STRUCTURE, DocumentError(str(e)))
            self.input_error = True
            return
        degree = self.tws.omega.degree
        if len(specs) != degree:
            self.fail(Stage.STRUCTURE, DocumentError(f"a structure on a {degree}-form needs {degree} fields, got {len(specs)}"))
            self.input_error = True
            return
        chart = self.tws.chart
        try:
            fields = [VectorField(chart, {n: parse_rational(text, chart) for n, text in f.coefficients.items()}) for f in specs]
        except EdsError as e:
            self.fail(Stage.STRUCTURE, e)
            self.input_error = True
            return
        names = [f.name for f in specs]
        report = StructureReport(order=names, verified=False)
        self.report.structure = report
        omega = self.tws.omega
        if spec.scale is not None:
            self._scale(spec, fields, names, report)
        try:
            structure = verify_solvable(omega, fields)
        except EdsError as e:
            report.error = self.fail(Stage.STRUCTURE, e, expected=e.code == spec.expect_error)
            if isinstance(e, NotDirectSum):
                report.witness_coefficients = e.coefficients
                report.witness = " + ".join(f"({c}) {n}" for c, n in zip(e.coefficients, names) if c != "0")
                self.report.diagnostics.append(f"structure ({', '.join(names)}) is degenerate: {report.witness} lies in ker Omega")
            self._expect_structure(spec, e.code)
            return
        report.verified = True
        report.factors = [to_text(l) for l in structure.factors]
        self.structure_fields = (fields, names)
        self._expect_structure(spec, None)
        try:
            result = chain(omega, structure)
        except EdsError as e:
            self.fail(Stage.STRUCTURE, e)
            return
        report.chain = ChainReport(omegas=[str(w) for w in result.omegas], closure=result.closure, potentials=[to_text(p) if p is not None else None for p in result.potentials])
        for i, potential in enumerate(result.potentials, start=1):
            if potential is not None and not potential.is_constant():
                self.integrals.setdefault(f"chain-{i}", FirstIntegral(expr=potential, provenance=Provenance.EXTRACTED))

    def _scale(self, spec: StructureSpec, fields: list[VectorField], names: list[str], report: StructureReport) -> None:
        try:
            X = fields[names.index(spec.scale.field)]
            f = self.candidates.get(spec.scale.integral)
            f = self.tws.restrict(f) if f is not None else None
            if not isinstance(f, RatExpr):
                raise DocumentError(f"scale integral '{spec.scale.integral}' must be a rational candidate")
            report.scale_exponent = str(scale_to_symmetry(X, self.tws.omega, f))
        except ValueError as e:
            self.fail(Stage.STRUCTURE, DocumentError(str(e)))
        except EdsError as e:
            self.fail(Stage.STRUCTURE, e)

    def _expect_structure(self, spec: StructureSpec, code: Optional[str]) -> None:
        expected = spec.expect_error
        self.check("structure", code == expected, f"expected {expected or 'a verified structure'}, got {code or 'a verified structure'}")

    def extraction(self) -> None:
        if self.structure_fields is None:
            return
        fields, names = self.structure_fields
        try:
            seq = prop26_factors(self.tws.omega, fields)
        except EdsError as e:
            self.fail(Stage.EXTRACTION, e)
            return
        factor = FactorReport(order=names, forms=[str(f) for f in seq.forms], last=str(seq.last), value=to_text(seq.value), moreover=seq.moreover)
        self.report.structure.closed_factors = factor
        try:
            potential = integrate_closed(seq.last)
            factor.potential = potential.text
            self.integrals.setdefault("factor", potential)
        except EdsError as e:
            self.fail(Stage.EXTRACTION, e)

    def candidate_integrals(self) -> None:
        tws = self.tws
        V1, V2 = tws.vessiot
        queue = [
            (spec.name, self.candidates[spec.name], spec.expect, Provenance.USER_SUPPLIED)
            for spec in self.doc.candidates.first_integrals
            if spec.name in self.candidates
        ]
        queue += [(name, f.expr, "verified", Provenance.EXTRACTED) for name, f in sorted(self.integrals.items())]
        for name, expr, expect, provenance in tqdm(queue, desc="first integrals", disable=not sys.stderr.isatty()):
            restricted = tws.restrict(expr)
            entry = IntegralReport(name=name, expr=to_text(expr), restricted=to_text(restricted), provenance=provenance.value, verified=False)
            self.report.integrals.append(entry)
            try:
                result = verify_first_integral([V1, V2], restricted, omega=tws.omega, provenance=provenance, source=expr)
            except NotAnnihilated as e:
                entry.generator, entry.residual = e.generator, e.residual
                entry.error = self.fail(Stage.CANDIDATES, e, expected=expect == "rejected")
                if expect == "rejected":
                    self.report.diagnostics.append(f"'{name}' is not a first integral, as expected: V{e.generator}(f) = {e.residual}")
                self.check(f"integral:{name}", expect == "rejected", f"V{e.generator}(f) != 0")
                continue
            except EdsError as e:
                entry.error = self.fail(Stage.CANDIDATES, e)
                self.check(f"integral:{name}", False, e.code)
                continue
            entry.verified = True
            entry.constraint_form = result.constraint_form
            self.integrals[name] = result
            self.check(f"integral:{name}", expect == "verified", "" if expect == "verified" else "expected a rejection")
            rational = try_rational(restricted, tws.chart)
            if rational is None:
                continue
            entry.closed_factor = closed_factor(tws, rational)
            try:
                entry.recovered = integrate_closed(DiffForm.exact(rational)).text
            except EdsError as e:
                logger.debug("no quadrature for %s: %s", name, e)

    def densities(self) -> None:
        tws = self.tws
        integrals = list(self.integrals.values())
        for spec in self.doc.candidates.densities:
            G = self.candidates.get(spec.name)
            if G is None:
                continue
            if not isinstance(G, RatExpr):
                self.fail(Stage.DENSITIES, DocumentError(f"density '{spec.name}' must be rational"))
                continue
            try:
                pair = DensityFluxPair.from_text(spec.T, spec.X, self.pde) if spec.X else None
                verdict = classify_tw_density(tws, G, integrals, pair)
            except EdsError as e:
                self.fail(Stage.DENSITIES, e)
                continue
            entry = DensityReport(
                name=spec.name,
                T=spec.T,
                X=spec.X,
                classification=verdict.classification,
                residual=to_text(verdict.residual) if verdict.residual is not None else None,
                functional_dependence=verdict.functional_dependence,
            )
            if verdict.conservation is not None:
                holds = verdict.conservation.holds
                entry.conservation = Verdict(passed=holds, identity="D_t T + D_x X = 0", residual=None if holds else to_text(verdict.conservation.residual))
                self.check(f"conservation:{spec.name}", holds)
            if spec.expect is not None:
                self.check(f"density:{spec.name}", verdict.classification == spec.expect, f"expected {spec.expect.value}, got {verdict.classification.value}")
            self.report.densities.append(entry)

    def numeric(self) -> None:
        for spec in self.doc.candidates.solutions:
            grid = spec.grid or default_grid()
            if self.grid_override:
                grid = grid.model_copy(update={"nx": self.grid_override[0], "nt": self.grid_override[1]})
            params = tuple(self.pde.chart.params) + tuple(k for k in spec.constants if k not in self.pde.chart.params)
            try:
                u = parse(spec.u, Chart(("t", "x"), params))
            except EdsError as e:
                self.fail(Stage.NUMERIC, e)
                self.input_error = True
                continue
            try:
                report = pde_residual(self.pde, u, grid, spec.constants, name=spec.name, tolerance=self.tol)
                names = spec.integrals if spec.integrals is not None else sorted(n for n, f in self.integrals.items() if f.provenance is Provenance.USER_SUPPLIED)
                for name in names:
                    f = self.integrals.get(name)
                    if f is None:
                        self.report.diagnostics.append(f"{spec.name}: no verified integral '{name}' to level-check")
                        continue
                    level = level_check(self.tws, f, u, grid, spec.constants, name=name, tolerance=self.tol)
                    report.deviations.update(level.deviations)
                    report.levels.update(level.levels)
                for name in spec.densities:
                    G = self.candidates.get(name)
                    if G is None:
                        continue
                    _, spread = motion_constant(G.to_sympy() if isinstance(G, RatExpr) else G, u, self.pde.order, grid, spec.constants)
                    report.motion[name] = spread
            except EdsError as e:
                self.fail(Stage.NUMERIC, e)
                self.check(f"numeric:{spec.name}", False, e.code)
                continue
            report.passed = report.passed and all(d < self.tol for d in report.deviations.values())
            self.report.grids.append(report)
            self.check(f"numeric:{spec.name}", report.passed, f"max residual {report.max_residual:.3e}")

    def execute(self) -> Report:
        steps = [
            (Stage.PARSE, self.parse, lambda: True),
            (Stage.REDUCE, self.reduce, lambda: self.pde is not None),
            (Stage.CONTACT, self.contact, lambda: self.tws is not None),
            (Stage.VESSIOT, self.vessiot, lambda: self.tws is not None),
            (Stage.INTEGRABILITY, self.integrability, lambda: self.tws is not None),
            (Stage.STRUCTURE, self.structure, lambda: self.tws is not None),
            (Stage.EXTRACTION, self.extraction, lambda: self.tws is not None),
            (Stage.CANDIDATES, self.candidate_integrals, lambda: self.tws is not None),
            (Stage.DENSITIES, self.densities, lambda: self.tws is not None),
            (Stage.NUMERIC, self.numeric, lambda: self.pde is not None and self.tws is not None),
        ]
        for stage, step, ready in steps:
            if not self.wants(stage):
                continue
            if not ready():
                logger.info("skipping %s: inputs missing", stage.value)
                continue
            logger.info("stage %s", stage.value)
            step()
        report = self.report
        report.passed = all(c.passed for c in report.checks) and not report.errors
        return report


def _parse_any(text: str, chart: Chart) -> Expression:
    expr = parse(text, chart)
    rational = try_rational(expr, chart)
    return rational if rational is not None else expr


def run(path: Path, only: Optional[Sequence[str]] = None, grid: Optional[tuple[int, int]] = None, tol: Optional[float] = None, convention: Optional[str] = None) -> tuple[Report, int]:
    """Run the pipeline on one document; returns the report and the exit code."""
    doc, data = load_document(path)
    pipeline = Pipeline(doc, data, only=only, grid=grid, tol=tol, convention=convention)
    report = pipeline.execute()
    if pipeline.input_error:
        return report, 2
    return report, 0 if report.passed else 1


def truncate(text: Optional[str], limit: int) -> str:
    if text is None:
        return ""
    if len(text) <= limit:
        return text
    return f"{text[:limit]}... ({len(text) - limit} more characters)"


def _mark(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


def explain(path: Path) -> str:
    """Human-readable rendering of a report."""
    try:
        report = Report.model_validate_json(path.read_text())
    except (OSError, ValidationError, ValueError) as e:
        raise DocumentError(f"{path}: not a valid report: {e}") from e
    limit = get_settings().residual_limit
    lines = [f"Document: {report.document}"]
    if report.convention:
        lines.append(f"Convention: {report.convention}")
    red = report.reduction
    if red is not None:
        lines.append(f"Reduction: {red.pde}  ->  F~ = {red.F_tilde}")
        lines.append(f"  chart: ({', '.join(red.chart)})")
        if red.V1:
            lines.append(f"  V1 = {truncate(red.V1, limit)}")
            lines.append(f"  V2 = {truncate(red.V2, limit)}")
        if red.vessiot_sum:
            lines.append(f"  V1 + c*V2 = d/dt + c*d/dx: {red.vessiot_sum.passed}")
        if red.vessiot_bracket:
            lines.append(f"  [V1, V2] = 0: {red.vessiot_bracket.passed}")
    for label, verdicts in (("criterion", report.theorem31), ("direct", report.frobenius_direct)):
        if verdicts is None:
            continue
        for kind, v in (("frobenius", verdicts.frobenius), ("closed", verdicts.closed)):
            lines.append(f"{label} {kind}: {v.passed}  [identity: {v.identity}]")
            if not v.passed and v.residual:
                lines.append(f"    residual: {truncate(v.residual, limit)}")
    if report.agreement is not None:
        lines.append(f"agreement: {_mark(report.agreement.passed)}  [{report.agreement.identity}]")
    st = report.structure
    if st is not None:
        status = "verified" if st.verified else f"FAILED {st.error.code if st.error else ''}".strip()
        lines.append(f"Structure ({', '.join(st.order)}): {status}")
        if st.factors:
            lines.append(f"  factors: {', '.join(st.factors)}")
        if st.witness:
            lines.append(f"  kernel witness: {st.witness} lies in ker Omega")
        if st.scale_exponent is not None:
            lines.append(f"  scaling exponent: {st.scale_exponent}")
        if st.closed_factors is not None:
            lines.append(f"  last closed factor: {truncate(st.closed_factors.last, limit)}")
    for entry in report.integrals:
        status = "verified" if entry.verified else "not verified"
        lines.append(f"Integral {entry.name} ({entry.provenance}): {status}  [identity: {entry.identity}]")
        if entry.residual:
            lines.append(f"    V{entry.generator}(f) = {truncate(entry.residual, limit)}")
        if entry.recovered:
            lines.append(f"    recovered by quadrature: {truncate(entry.recovered, limit)}")
    for entry in report.densities:
        lines.append(f"Density {entry.name}: tier {entry.classification.value}")
        if entry.residual:
            lines.append(f"    V1(G) = {truncate(entry.residual, limit)}")
        if entry.conservation is not None:
            lines.append(f"    {entry.conservation.identity}: {entry.conservation.passed}")
    for grid in report.grids:
        where = f" at (x, t) = {grid.location}" if grid.location else ""
        lines.append(f"Grid {grid.name}: max |u_t - F| = {grid.max_residual:.3e}{where}, {grid.grid.nx}x{grid.grid.nt} nodes, skipped {grid.skipped}: {_mark(grid.passed)}")
        for name, deviation in sorted(grid.deviations.items()):
            lines.append(f"    level {name} = {grid.levels.get(name, float('nan')):.6g}, deviation {deviation:.3e}")
        for name, spread in sorted(grid.motion.items()):
            lines.append(f"    integral of {name} dx varies by {spread:.3e} (up to boundary terms)")
    for note in report.diagnostics:
        lines.append(f"Note: {note}")
    for error in report.errors:
        lines.append(f"Error in {error.stage}: {error.code}: {truncate(error.message, limit)}")
    lines.append(f"Result: {_mark(report.passed)}")
    return "\n".join(lines) + "\n"


def _grid_arg(text: str) -> tuple[int, int]:
    try:
        nx, nt = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NX,NT, got {text!r}")
    if nx < 2 or nt < 1:
        raise argparse.ArgumentTypeError("need NX >= 2 and NT >= 1")
    return nx, nt


def _stages_arg(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="eds-waves", description="Travelling-wave exterior differential systems workbench")
    parser.add_argument("--log-level", default=get_settings().log_level, help="Logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Run the pipeline on a problem document")
    run_parser.add_argument("document", type=Path, help="Problem document (JSON)")
    run_parser.add_argument("--only", type=_stages_arg, default=None, help=f"Comma-separated stages from {','.join(STAGE_ORDER)}")
    run_parser.add_argument("--grid", type=_grid_arg, default=None, help="Grid node counts NX,NT")
    run_parser.add_argument("--tol", type=float, default=None, help="Numeric pass tolerance")
    run_parser.add_argument("--convention", default=None, help="Sign-convention note echoed into the report")
    run_parser.add_argument("--output", type=Path, default=None, help="Report path (stdout when omitted)")

    explain_parser = sub.add_parser("explain", help="Render a report as text")
    explain_parser.add_argument("report", type=Path, help="Report written by 'run'")

    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING), format="%(levelname)s %(name)s: %(message)s")

    if args.command == "explain":
        try:
            sys.stdout.write(explain(args.report))
        except DocumentError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        return 0

    try:
        report, code = run(args.document, only=args.only, grid=args.grid, tol=args.tol, convention=args.convention)
    except DocumentError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = dump_json(report)
    if args.output is None:
        sys.stdout.write(text)
        return code
    args.output.parent.mkdir(parents=True, exist_ok=True)
    args.output.write_text(text)

    print("=" * 70)
    print(f"{'✅' if code == 0 else '❌'} {report.document}: {'PASS' if code == 0 else 'FAIL'}")
    print(f"  Stages: {', '.join(report.stages)}")
    print(f"  Checks: {sum(c.passed for c in report.checks)}/{len(report.checks)} passed")
    print(f"  Errors: {len(report.errors)}")
    print(f"  Output: {args.output}")
    print("=" * 70)
    return code


if __name__ == "__main__":
    sys.exit(main())
