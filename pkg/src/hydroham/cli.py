"""Command-line front end.

Exit codes: 0 every check provably passed, 1 some check failed,
2 only probabilistic or inconclusive verdicts, 3 input error.
JSON reports are byte-identical for identical inputs and seed (they carry
no timing); the text format prints wall time.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

from . import __version__, catalog
from . import expr as ex
from .fileio import (
    FileFormatError,
    dump_operator,
    load_candidate,
    load_change,
    load_density,
    load_operator,
    read_json,
)
from .hamsys import (
    DegenerateCandidateError,
    classify_operator_shape,
    commutativity_residual,
    dispersion,
    generate_system,
    reduction_residual,
)
from .integrability import (
    DegenerateLagrangianError,
    LagrangianDensity,
    euler_lagrange_fluxes,
    fkt_residual,
    legendre,
)
from .operators import (
    check_hamiltonian,
    generic_rank,
    is_degenerate,
    is_trivial_pair,
    pencil_compatibility,
    pencil_determinant,
)
from .parser import ParseError, parse
from .symbols import SymbolError, Workspace
from .zerotest import InconclusiveError, Verdict, ZeroTestPolicy, is_zero

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_UNDECIDED = 2
EXIT_INPUT = 3

_OVERALL_EXIT = {
    "proven_pass": EXIT_PASS,
    "fail": EXIT_FAIL,
    "probably_pass": EXIT_UNDECIDED,
    "inconclusive": EXIT_UNDECIDED,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


class Report:
    """Accumulates checks; renders deterministically as text or JSON."""

    def __init__(self, args, inputs: list[str]):
        self.command = [args.command] + inputs
        self.format = args.format
        self.max_chars = args.max_residual_chars
        self.inputs = {p: _digest(p) for p in inputs}
        self.checks = []
        self.lines = []
        self.t0 = time.perf_counter()

    def add_check(self, name: str, indices, verdict: Verdict, residual=None):
        entry = {
            "name": name,
            "indices": list(indices),
            "verdict": str(verdict),
            "ok": verdict.is_zero_verdict,
        }
        if residual is not None and not verdict.is_zero_verdict:
            entry["residual"] = self._trim(ex.print_expr(residual))
        self.checks.append(entry)

    def note(self, key: str, value):
        self.lines.append((key, value))

    def _trim(self, text: str) -> str:
        if len(text) <= self.max_chars:
            return text
        digest = hashlib.sha256(text.encode()).hexdigest()[:16]
        return text[: self.max_chars] + f"... [sha256:{digest}]"

    @property
    def overall(self) -> str:
        worst = "proven_pass"
        for c in self.checks:
            v = c["verdict"]
            if v.startswith("ProvenNonzero") or v.startswith("ProbablyNonzero"):
                return "fail"
            if v == "Inconclusive":
                worst = "inconclusive"
            elif v.startswith("ProbablyZero") and worst == "proven_pass":
                worst = "probably_pass"
        return worst

    def finish(self) -> int:
        overall = self.overall
        if self.format == "json":
            doc = {
                "command": self.command,
                "inputs": self.inputs,
                "notes": [
                    {"key": k, "value": v} for k, v in self.lines
                ],
                "checks": self.checks,
                "overall": overall,
            }
            print(json.dumps(doc, sort_keys=True, indent=2))
        else:
            for key, value in self.lines:
                print(f"{key}: {value}")
            shown = 0
            for c in self.checks:
                if not c["ok"]:
                    idx = ",".join(str(i) for i in c["indices"])
                    print(f"FAIL {c['name']}[{idx}] -> {c['verdict']}"
                          + (f" residual {c['residual']}"
                             if "residual" in c else ""))
                    shown += 1
                    if shown >= 20:
                        print("... further failures suppressed")
                        break
            n_ok = sum(1 for c in self.checks if c["ok"])
            print(f"checks: {n_ok}/{len(self.checks)} passed")
            print(f"overall: {overall}")
            print(f"wall time: {time.perf_counter() - self.t0:.3f}s")
        return _OVERALL_EXIT[overall]


def _digest(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    except OSError:
        return "unavailable"


def _add_report_records(report: Report, records):
    for rec in records:
        report.add_check(rec.relation, rec.indices, rec.verdict, rec.residual)


def build_parser() -> _Parser:
    p = _Parser(prog="hydroham",
                description="symbolic checks for Hamiltonian operators of "
                            "hydrodynamic type")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--samples", type=int, default=20,
                   help="sample count for probabilistic zero tests")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision", type=int, default=64,
                   help="working precision (bits) for numeric evaluation")
    p.add_argument("--max-residual-chars", type=int, default=400)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", help="skew-symmetry + Jacobi identity")
    s.add_argument("operator")

    s = sub.add_parser("pencil", help="pencil determinant, degeneracy, rank")
    s.add_argument("operator")
    s.add_argument("--compatibility", action="store_true",
                   help="also check the x/y parts form a compatible pair")

    s = sub.add_parser("transform", help="pushforward + invariance check")
    s.add_argument("operator")
    s.add_argument("change")
    s.add_argument("--emit", metavar="FILE",
                   help="write the transformed operator JSON here")

    s = sub.add_parser("catalog", help="canonical-form fixtures")
    s.add_argument("action", choices=("list", "show", "export", "verify"))
    s.add_argument("id", nargs="?")
    s.add_argument("--all", action="store_true")
    s.add_argument("--eps", type=int)
    s.add_argument("--kappa")
    s.add_argument("--set", action="append", default=[], metavar="NAME=EXPR",
                   help="bind an abstract function slot")
    s.add_argument("-o", "--output", metavar="FILE")

    s = sub.add_parser("system", help="quasilinear system u_t + Au_x + Bu_y")
    s.add_argument("operator")
    s.add_argument("density")
    s.add_argument("--classify", action="store_true",
                   help="reduced-shape classification (abstract density)")

    s = sub.add_parser("dispersion", help="det(E + lam A + mu B)")
    s.add_argument("operator")
    s.add_argument("density")

    s = sub.add_parser("reduction",
                       help="commutativity and reduction residuals")
    s.add_argument("operator")
    s.add_argument("density")
    s.add_argument("candidate")
    s.add_argument("--at", metavar="R1=..,t=..,x=..,y=..",
                   help="evaluate the hodograph residuals of v at a point")

    s = sub.add_parser("fkt", help="fourth-order integrability test")
    s.add_argument("density")

    s = sub.add_parser("legendre", help="partial Legendre transform")
    s.add_argument("density")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    policy = ZeroTestPolicy(samples=args.samples, seed=args.seed,
                            precision=args.precision)
    handler = {
        "check": _cmd_check,
        "pencil": _cmd_pencil,
        "transform": _cmd_transform,
        "catalog": _cmd_catalog,
        "system": _cmd_system,
        "dispersion": _cmd_dispersion,
        "reduction": _cmd_reduction,
        "fkt": _cmd_fkt,
        "legendre": _cmd_legendre,
    }[args.command]
    try:
        return handler(args, policy)
    except (FileFormatError, ParseError, SymbolError, catalog.CatalogError,
            ValueError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


def _cmd_check(args, policy) -> int:
    report = Report(args, [args.operator])
    op = load_operator(read_json(args.operator))
    result = check_hamiltonian(op, policy)
    _add_report_records(report, result.records)
    return report.finish()


def _cmd_pencil(args, policy) -> int:
    report = Report(args, [args.operator])
    op = load_operator(read_json(args.operator))
    coeffs = pencil_determinant(op)
    for exps, coeff in sorted(coeffs.items()):
        report.note(f"det coefficient lam^{exps}", ex.print_expr(coeff))
    try:
        deg = is_degenerate(op, policy)
        report.note("degenerate", deg.degenerate)
        if deg.certificate is not None:
            report.note("certificate", ex.print_expr(deg.certificate))
        report.note("generic rank", generic_rank(op, policy))
        if op.d == 2:
            report.note("trivial pair", is_trivial_pair(op, policy).trivial)
    except InconclusiveError as e:
        report.add_check("pencil", ("analysis",), Verdict("inconclusive"))
        report.note("inconclusive", str(e))
    if args.compatibility and op.d == 2:
        result = pencil_compatibility(op.part(0), op.part(1), policy)
        _add_report_records(report, result.records)
    return report.finish()


def _cmd_transform(args, policy) -> int:
    from .transform import pushforward, verify_invariance

    report = Report(args, [args.operator, args.change])
    op = load_operator(read_json(args.operator))
    change = load_change(read_json(args.change), op.ws, policy)
    result = verify_invariance(op, change, policy)
    _add_report_records(report, result.records)
    if args.emit:
        with open(args.emit, "w") as fh:
            json.dump(dump_operator(pushforward(op, change)), fh, indent=2,
                      sort_keys=True)
        report.note("transformed operator written to", args.emit)
    return report.finish()


def _parse_catalog_params(args, entry) -> dict:
    params = catalog.default_params(entry)
    if args.eps is not None:
        params["eps"] = Fraction(args.eps)
    if args.kappa is not None:
        params["kappa"] = Fraction(args.kappa)
    for binding in args.set:
        name, _, text = binding.partition("=")
        if not text:
            raise FileFormatError(f"--set expects NAME=EXPR, got {binding!r}")
        params[name] = text
    return params


def _cmd_catalog(args, policy) -> int:
    if args.action == "list":
        report = Report(args, [])
        for e in catalog.list_entries():
            slots = list(e.const_slots) + [n for n, _ in e.func_slots]
            report.note(e.id, f"d={e.d} n={e.n} rank {e.rank_label}"
                              + (f" slots {','.join(slots)}" if slots else ""))
        return report.finish()

    if args.action in ("show", "export"):
        if not args.id:
            raise FileFormatError(f"catalog {args.action} needs an entry id")
        entry = catalog.get_entry(args.id)
        op, _ws = catalog.instantiate(args.id,
                                      _parse_catalog_params(args, entry))
        doc = dump_operator(op)
        text = json.dumps(doc, indent=2, sort_keys=True)
        if args.action == "export" and args.output:
            with open(args.output, "w") as fh:
                fh.write(text + "\n")
            print(f"{args.id} written to {args.output}")
        else:
            print(text)
        return EXIT_PASS

    # verify
    report = Report(args, [])
    if args.all or not args.id:
        entries = catalog.list_entries()
    else:
        entries = [catalog.get_entry(args.id)]
    for entry in entries:
        params = _parse_catalog_params(args, entry)
        v = catalog.verify_entry(entry.id, params, policy)
        summary = (f"{v.report.overall}; degenerate={v.degenerate}; "
                   f"rank {v.rank} (label {v.rank_label})")
        if v.trivial is not None:
            summary += f"; trivial={v.trivial}"
        report.note(entry.id, summary)
        for rec in v.report.records:
            if not rec.verdict.is_zero_verdict:
                report.add_check(f"{entry.id}:{rec.relation}", rec.indices,
                                 rec.verdict, rec.residual)
        if not v.ok:
            report.add_check(f"{entry.id}:summary", ("entry",),
                             Verdict("proven_nonzero"))
    return report.finish()


def _cmd_system(args, policy) -> int:
    report = Report(args, [args.operator, args.density])
    op = load_operator(read_json(args.operator))
    density = load_density(read_json(args.density), op)
    sys_ = generate_system(op, density)
    for label, matrix in (("A", sys_.A), ("B", sys_.B)):
        for i, row in enumerate(matrix):
            report.note(f"{label}[{i + 1}]",
                        "[" + ", ".join(ex.print_expr(e) for e in row) + "]")
    if args.classify:
        shape = classify_operator_shape(op, policy)
        report.note("reduced shape", str(shape))
    return report.finish()


def _cmd_dispersion(args, policy) -> int:
    report = Report(args, [args.operator, args.density])
    op = load_operator(read_json(args.operator))
    density = load_density(read_json(args.density), op)
    rel = dispersion(generate_system(op, density))
    for exps, coeff in sorted(rel.coefficients.items()):
        report.note(f"lam^{exps[0]} mu^{exps[1]}", ex.print_expr(coeff))
    return report.finish()


def _cmd_reduction(args, policy) -> int:
    from .ratform import normalize, ratform_to_expr

    report = Report(args, [args.operator, args.density, args.candidate])
    op = load_operator(read_json(args.operator))
    density = load_density(read_json(args.density), op)
    cand = load_candidate(read_json(args.candidate))
    sys_ = generate_system(op, density)

    def checked(name, idx, residual):
        verdict = is_zero(residual, cand.ws, policy)
        shown = residual
        if not verdict.is_zero_verdict:
            shown = ratform_to_expr(normalize(residual, cand.ws))
        report.add_check(name, idx, verdict, shown)

    try:
        if cand.m >= 2:
            for idx, residual in commutativity_residual(cand, policy):
                checked("commutativity", idx, residual)
    except DegenerateCandidateError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    for idx, residual in reduction_residual(cand, sys_):
        checked("reduction", idx, residual)
    if cand.v is not None:
        from .hamsys import hodograph_residual

        coords = {"t": 0, "x": 0, "y": 0}
        if args.at:
            for item in args.at.split(","):
                name, _, value = item.partition("=")
                coords[name.strip()] = Fraction(value.strip())
        point = {f"R{i}": coords.get(f"R{i}", Fraction(i))
                 for i in range(1, cand.m + 1)}
        symbolic, numeric = hodograph_residual(
            cand, point, coords["t"], coords["x"], coords["y"], policy)
        for idx, residual in symbolic:
            checked("hodograph", idx, residual)
        for i, value in numeric:
            report.note(f"hodograph residual at point, i={i}", str(value))
    return report.finish()


def _cmd_fkt(args, policy) -> int:
    report = Report(args, [args.density])
    data = read_json(args.density)
    if "f" not in data:
        raise FileFormatError("density file needs an 'f' entry")
    functions = [(fn["name"], fn["args"]) for fn in data.get("functions", [])]
    density = LagrangianDensity.from_text(data["f"], functions)
    try:
        result = fkt_residual(density, policy)
    except DegenerateLagrangianError as e:
        report.note("inapplicable", str(e))
        report.add_check("fkt", ("H",), Verdict("inconclusive"))
        return report.finish()
    report.note("hessian determinant", ex.print_expr(result.hessian))
    for m in sorted(result.verdicts, reverse=True):
        report.add_check("fkt-coefficient", m, result.verdicts[m],
                         result.residual.coefficients[m])
    first = result.first_failure()
    if first is not None:
        m, coeff = first
        report.note(f"first failing coefficient da^{m[0]} db^{m[1]} dc^{m[2]}",
                    ex.print_expr(coeff))
    fluxes = euler_lagrange_fluxes(density)
    report.note("euler-lagrange fluxes",
                "(" + ", ".join(ex.print_expr(e) for e in fluxes) + ")")
    return report.finish()


def _cmd_legendre(args, policy) -> int:
    report = Report(args, [args.density])
    data = read_json(args.density)
    ws = Workspace()
    ws.add_variables("rho", "u", "v", "rhot")
    for fn in data.get("functions", []):
        ws.add_function(fn["name"], fn["args"])
    ws.freeze()
    h = parse(data["h"], ws)
    inverse = parse(data["inverse"], ws)
    result = legendre(h, ws, inverse, policy)
    report.note("f(a, b, c)", ex.print_expr(result.density.f))
    for label, residual in result.identity_residuals:
        report.add_check("legendre-identity", (label,),
                         is_zero(residual, ws, policy), residual)
    return report.finish()


if __name__ == "__main__":
    raise SystemExit(main())
