"""First-order operators of hydrodynamic type and the Mokhov relations.

An operator is the coefficient bundle (d, n, g^{ij alpha}, b^{ij alpha}_k)
of P^{ij} = sum_alpha g^{ij alpha} d/dx^alpha + b^{ij alpha}_k u^k_{x^alpha}.
The seven relations a1..a7 are necessary and sufficient for skew-symmetry
plus the Jacobi identity; they are checked exactly on rational normal
forms, with all free indices enumerated and cyclic sums written out.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from . import expr as ex
from .calculus import differentiate
from .ratform import (
    build_context,
    coefficients_in,
    ratform_to_expr,
    to_rational_form,
)
from .symbols import Symbol, Workspace
from .zerotest import (
    DEFAULT_POLICY,
    INCONCLUSIVE,
    InconclusiveError,
    Verdict,
    ZeroTestPolicy,
    verdict_for_ratform,
)

ALPHA_LABELS = ("x", "y", "z", "w")

PROVEN_PASS = "proven_pass"
PROBABLY_PASS = "probably_pass"
INCONCLUSIVE_PASS = "inconclusive"
FAIL = "fail"


class OperatorError(Exception):
    pass


@dataclass
class HydroOperator:
    """Dense coefficient bundle; entries are Exprs over the workspace."""

    ws: Workspace
    d: int
    n: int
    g: list  # [alpha][i][j] -> Expr
    b: list  # [alpha][i][j][k] -> Expr

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise OperatorError("dimension and component count must be >= 1")
        if len(self.ws.variables) < self.n:
            raise OperatorError("workspace lacks the operator variables")
        if len(self.g) != self.d or len(self.b) != self.d:
            raise OperatorError("metric/coefficient arrays must have d slices")
        for a in range(self.d):
            _check_shape(self.g[a], (self.n, self.n), "g")
            _check_shape(self.b[a], (self.n, self.n, self.n), "b")
        allowed = set(self.ws.variables) | set(self.ws.constants)
        for e in self.entries():
            bad = ex.free_symbols(e) - allowed
            if bad:
                raise OperatorError(
                    f"entry {e} uses unregistered symbols {sorted(s.name for s in bad)}"
                )

    @property
    def variables(self) -> list[Symbol]:
        return self.ws.variables[: self.n]

    def entries(self):
        for a in range(self.d):
            for i in range(self.n):
                for j in range(self.n):
                    yield self.g[a][i][j]
                    for k in range(self.n):
                        yield self.b[a][i][j][k]

    def part(self, alpha: int) -> "HydroOperator":
        """The 1D operator in the alpha-th independent variable."""
        return HydroOperator(
            self.ws, 1, self.n, [self.g[alpha]], [self.b[alpha]]
        )

    def map_entries(self, fn) -> "HydroOperator":
        g = [[[fn(self.g[a][i][j]) for j in range(self.n)]
              for i in range(self.n)] for a in range(self.d)]
        b = [[[[fn(self.b[a][i][j][k]) for k in range(self.n)]
               for j in range(self.n)] for i in range(self.n)]
             for a in range(self.d)]
        return HydroOperator(self.ws, self.d, self.n, g, b)

    def restricted(self, keep: list[int], ws: Workspace) -> "HydroOperator":
        """Sub-operator on a subset of component indices (0-based)."""
        g = [[[self.g[a][i][j] for j in keep] for i in keep]
             for a in range(self.d)]
        b = [[[[self.b[a][i][j][k] for k in keep] for j in keep]
              for i in keep] for a in range(self.d)]
        return HydroOperator(ws, self.d, len(keep), g, b)


def _check_shape(arr, shape, what):
    if len(arr) != shape[0]:
        raise OperatorError(f"{what} has wrong shape")
    if len(shape) > 1:
        for sub in arr:
            _check_shape(sub, shape[1:], what)


def zero_operator(ws: Workspace, d: int, n: int) -> HydroOperator:
    g = [[[ex.ZERO] * n for _ in range(n)] for _ in range(d)]
    b = [[[[ex.ZERO] * n for _ in range(n)] for _ in range(n)]
         for _ in range(d)]
    return HydroOperator(ws, d, n, g, b)


def operator_from_entries(ws: Workspace, d: int, n: int, g_entries=None,
                          b_entries=None) -> HydroOperator:
    """Build a dense operator from sparse {(alpha,i,j): Expr} and
    {(alpha,i,j,k): Expr} maps with 1-based indices."""
    g = [[[ex.ZERO] * n for _ in range(n)] for _ in range(d)]
    b = [[[[ex.ZERO] * n for _ in range(n)] for _ in range(n)]
         for _ in range(d)]
    for (a, i, j), e in (g_entries or {}).items():
        g[a][i - 1][j - 1] = ex.as_expr(e)
    for (a, i, j, k), e in (b_entries or {}).items():
        b[a][i - 1][j - 1][k - 1] = ex.as_expr(e)
    return HydroOperator(ws, d, n, g, b)


# -- condition reports ---------------------------------------------------------

@dataclass
class ResidualRecord:
    relation: str
    indices: tuple
    residual: ex.Expr
    verdict: Verdict


@dataclass
class ConditionReport:
    records: list[ResidualRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def overall(self) -> str:
        worst = PROVEN_PASS
        for rec in self.records:
            k = rec.verdict.kind
            if k in ("proven_nonzero", "probably_nonzero"):
                return FAIL
            if k == INCONCLUSIVE:
                worst = INCONCLUSIVE_PASS
            elif k == "probably_zero" and worst == PROVEN_PASS:
                worst = PROBABLY_PASS
        return worst

    @property
    def passed(self) -> bool:
        return self.overall in (PROVEN_PASS, PROBABLY_PASS)

    def failures(self) -> list[ResidualRecord]:
        return [
            r for r in self.records
            if r.verdict.kind in ("proven_nonzero", "probably_nonzero")
        ]

    def merged(self, *others: "ConditionReport") -> "ConditionReport":
        out = ConditionReport(list(self.records), self.wall_time)
        for o in others:
            out.records.extend(o.records)
            out.wall_time += o.wall_time
        return out


# -- the checker ----------------------------------------------------------------

class MokhovChecker:
    """Precomputes g, b and their derivative tables as rational forms, then
    assembles each relation's residuals by ring arithmetic."""

    def __init__(self, op: HydroOperator):
        self.op = op
        self.ws = op.ws
        d, n = op.d, op.n
        vars_ = op.variables
        diff = differentiate

        g = op.g
        b = op.b
        dg = [[[[diff(g[a][i][j], vars_[k]) for k in range(n)]
                for j in range(n)] for i in range(n)] for a in range(d)]
        db = [[[[[diff(b[a][i][j][k], vars_[l]) for l in range(n)]
                 for k in range(n)] for j in range(n)] for i in range(n)]
              for a in range(d)]
        d2b = [[[[[[diff(db[a][i][j][k][l], vars_[m]) for m in range(n)]
                   for l in range(n)] for k in range(n)] for j in range(n)]
                for i in range(n)] for a in range(d)]

        exprs = []
        for tab in (g, dg):
            exprs.extend(_flatten(tab))
        for tab in (b, db, d2b):
            exprs.extend(_flatten(tab))
        self.ctx = build_context(self.ws, exprs)
        cache: dict = {}
        conv = lambda e: to_rational_form(e, self.ctx, cache)
        self.G = _map_nested(g, conv)
        self.DG = _map_nested(dg, conv)
        self.B = _map_nested(b, conv)
        self.DB = _map_nested(db, conv)
        self.D2B = _map_nested(d2b, conv)
        self.d, self.n = d, n
        self._zero = to_rational_form(ex.ZERO, self.ctx, cache)

    # each generator yields (relation, indices, RationalForm)

    def residuals_a1(self):
        G = self.G
        for a in range(self.d):
            for i in range(self.n):
                for j in range(i + 1, self.n):
                    yield "a1", (ALPHA_LABELS[a], i + 1, j + 1), \
                        G[a][i][j] - G[a][j][i]

    def residuals_a2(self):
        G, DG, B = self.G, self.DG, self.B
        rng = range(self.n)
        for a in range(self.d):
            for i in rng:
                for j in rng:
                    for k in rng:
                        yield "a2", (ALPHA_LABELS[a], i + 1, j + 1, k + 1), \
                            self.DG[a][i][j][k] - B[a][i][j][k] - B[a][j][i][k]

    def residuals_a3(self):
        G, B = self.G, self.B
        rng = range(self.n)
        for a in range(self.d):
            for bB in range(self.d):
                for i in rng:
                    for j in rng:
                        for r in rng:
                            acc = self._zero
                            for al, be in ((a, bB), (bB, a)):
                                for s in rng:
                                    acc = acc + G[al][s][i] * B[be][j][r][s]
                                    acc = acc - G[be][s][j] * B[al][i][r][s]
                            yield "a3", (
                                ALPHA_LABELS[a], ALPHA_LABELS[bB],
                                i + 1, j + 1, r + 1,
                            ), acc

    def residuals_a4(self):
        G, B = self.G, self.B
        rng = range(self.n)
        for a in range(self.d):
            for be in range(self.d):
                for i in rng:
                    for j in rng:
                        for r in rng:
                            acc = self._zero
                            for ii, jj, rr in ((i, j, r), (j, r, i), (r, i, j)):
                                for s in rng:
                                    acc = acc + G[a][s][ii] * B[be][jj][rr][s]
                                    acc = acc - G[be][s][jj] * B[a][ii][rr][s]
                            yield "a4", (
                                ALPHA_LABELS[a], ALPHA_LABELS[be],
                                i + 1, j + 1, r + 1,
                            ), acc

    def _a5_bracket(self, al, be, i, j, r, q):
        """sum_s g^{si al}(d_q b^{jr be}_s - d_s b^{jr be}_q)
        + b^{ij al}_s b^{sr be}_q - b^{ir al}_s b^{sj be}_q."""
        G, B, DB = self.G, self.B, self.DB
        acc = self._zero
        for s in range(self.n):
            acc = acc + G[al][s][i] * (DB[be][j][r][s][q] - DB[be][j][r][q][s])
            acc = acc + B[al][i][j][s] * B[be][s][r][q]
            acc = acc - B[al][i][r][s] * B[be][s][j][q]
        return acc

    def residuals_a5(self):
        rng = range(self.n)
        for a in range(self.d):
            for be in range(self.d):
                for i, j, r, q in itertools.product(rng, repeat=4):
                    acc = self._a5_bracket(a, be, i, j, r, q) + \
                        self._a5_bracket(be, a, i, j, r, q)
                    yield "a5", (
                        ALPHA_LABELS[a], ALPHA_LABELS[be],
                        i + 1, j + 1, r + 1, q + 1,
                    ), acc

    def residuals_a6(self):
        G, B, DB = self.G, self.B, self.DB
        rng = range(self.n)
        for a in range(self.d):
            for be in range(self.d):
                for i, j, r, q in itertools.product(rng, repeat=4):
                    acc = self._zero
                    for s in rng:
                        acc = acc + G[be][s][i] * DB[a][j][r][q][s]
                        acc = acc - B[be][i][j][s] * B[a][s][r][q]
                        acc = acc - B[be][i][r][s] * B[a][j][s][q]
                        acc = acc - G[a][s][j] * DB[be][i][r][q][s]
                        acc = acc + B[a][j][i][s] * B[be][s][r][q]
                        acc = acc + B[be][i][s][q] * B[a][j][r][s]
                    yield "a6", (
                        ALPHA_LABELS[a], ALPHA_LABELS[be],
                        i + 1, j + 1, r + 1, q + 1,
                    ), acc

    def _a5_bracket_deriv(self, al, be, i, j, r, q, k):
        """d/du^k of the a5 bracket, expanded by the product rule."""
        G, B, DB, DG, D2B = self.G, self.B, self.DB, self.DG, self.D2B
        acc = self._zero
        for s in range(self.n):
            acc = acc + DG[al][s][i][k] * (
                DB[be][j][r][s][q] - DB[be][j][r][q][s]
            )
            acc = acc + G[al][s][i] * (
                D2B[be][j][r][s][q][k] - D2B[be][j][r][q][s][k]
            )
            acc = acc + DB[al][i][j][s][k] * B[be][s][r][q]
            acc = acc + B[al][i][j][s] * DB[be][s][r][q][k]
            acc = acc - DB[al][i][r][s][k] * B[be][s][j][q]
            acc = acc - B[al][i][r][s] * DB[be][s][j][q][k]
        return acc

    def _a7_cyclic(self, al, be, i, j, r, q, k):
        """sum over cyclic (i,j,r) of
        b^{si be}_q (d_s b^{jr al}_k - d_k b^{jr al}_s)."""
        B, DB = self.B, self.DB
        acc = self._zero
        for ii, jj, rr in ((i, j, r), (j, r, i), (r, i, j)):
            for s in range(self.n):
                acc = acc + B[be][s][ii][q] * (
                    DB[al][jj][rr][k][s] - DB[al][jj][rr][s][k]
                )
        return acc

    def residuals_a7(self):
        rng = range(self.n)
        for a in range(self.d):
            for be in range(self.d):
                for i, j, r in itertools.product(rng, repeat=3):
                    for k, q in itertools.product(rng, repeat=2):
                        acc = self._a5_bracket_deriv(a, be, i, j, r, q, k)
                        acc = acc + self._a7_cyclic(a, be, i, j, r, q, k)
                        acc = acc + self._a5_bracket_deriv(be, a, i, j, r, k, q)
                        acc = acc + self._a7_cyclic(be, a, i, j, r, k, q)
                        yield "a7", (
                            ALPHA_LABELS[a], ALPHA_LABELS[be],
                            i + 1, j + 1, r + 1, k + 1, q + 1,
                        ), acc

    def residuals(self, relations):
        gens = {
            "a1": self.residuals_a1,
            "a2": self.residuals_a2,
            "a3": self.residuals_a3,
            "a4": self.residuals_a4,
            "a5": self.residuals_a5,
            "a6": self.residuals_a6,
            "a7": self.residuals_a7,
        }
        for rel in relations:
            yield from gens[rel]()


def _flatten(nested):
    if isinstance(nested, ex.Expr):
        yield nested
        return
    for item in nested:
        yield from _flatten(item)


def _map_nested(nested, fn):
    if isinstance(nested, ex.Expr):
        return fn(nested)
    return [_map_nested(item, fn) for item in nested]


def _records_from(checker: MokhovChecker, relations,
                  policy: ZeroTestPolicy) -> ConditionReport:
    t0 = time.perf_counter()
    records = []
    for rel, idx, rf in checker.residuals(relations):
        try:
            verdict = verdict_for_ratform(rf, checker.ws, policy)
        except InconclusiveError:
            verdict = Verdict(INCONCLUSIVE)
        residual = ex.ZERO if rf.is_zero else ratform_to_expr(rf)
        records.append(ResidualRecord(rel, idx, residual, verdict))
    return ConditionReport(records, time.perf_counter() - t0)


def check_symmetry(op: HydroOperator,
                   policy: ZeroTestPolicy = DEFAULT_POLICY) -> ConditionReport:
    return _records_from(MokhovChecker(op), ("a1",), policy)


def check_skew(op: HydroOperator,
               policy: ZeroTestPolicy = DEFAULT_POLICY) -> ConditionReport:
    return _records_from(MokhovChecker(op), ("a2",), policy)


def check_jacobi(op: HydroOperator,
                 policy: ZeroTestPolicy = DEFAULT_POLICY) -> ConditionReport:
    return _records_from(MokhovChecker(op), ("a3", "a4", "a5", "a6", "a7"),
                         policy)


def check_hamiltonian(op: HydroOperator,
                      policy: ZeroTestPolicy = DEFAULT_POLICY) -> ConditionReport:
    return _records_from(
        MokhovChecker(op), ("a1", "a2", "a3", "a4", "a5", "a6", "a7"), policy
    )


# -- metric pencil analysis ----------------------------------------------------

PENCIL_PARAMS = ("lam1", "lam2", "lam3", "lam4")


@dataclass
class MetricPencil:
    op: HydroOperator
    ws: Workspace               # extended with the formal lambda constants
    params: list[Symbol]
    matrix: list                # n x n Exprs, polynomial in the lambdas

    @classmethod
    def of(cls, op: HydroOperator) -> "MetricPencil":
        ws = op.ws.extended(list(PENCIL_PARAMS[: op.d]))
        params = ws.constants[len(op.ws.constants):]
        n = op.n
        matrix = [
            [
                ex.add(*(ex.mul(ex.Var(params[a]), op.g[a][i][j])
                         for a in range(op.d)))
                for j in range(n)
            ]
            for i in range(n)
        ]
        return cls(op, ws, params, matrix)


def _det(matrix, size) -> ex.Expr:
    if size == 1:
        return matrix[0][0]
    terms = []
    for perm in itertools.permutations(range(size)):
        sign = _perm_sign(perm)
        factors = [matrix[i][perm[i]] for i in range(size)]
        if any(f == ex.ZERO for f in factors):
            continue
        terms.append(ex.mul(ex.Rat(sign), *factors))
    return ex.add(*terms)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def pencil_determinant(op: HydroOperator) -> dict[tuple, ex.Expr]:
    """det(sum_alpha lam_alpha g^alpha) expanded by lambda exponents."""
    pencil = MetricPencil.of(op)
    det = _det(pencil.matrix, op.n)
    ctx = build_context(pencil.ws, [det])
    rf = to_rational_form(det, ctx)
    coeffs = coefficients_in(rf, [p.name for p in pencil.params])
    return {exps: ratform_to_expr(c) for exps, c in coeffs.items()
            if not c.is_zero} or {(0,) * op.d: ex.ZERO}


@dataclass
class DegeneracyResult:
    degenerate: bool
    certificate: ex.Expr | None  # a nonzero coefficient when not degenerate


def is_degenerate(op: HydroOperator,
                  policy: ZeroTestPolicy = DEFAULT_POLICY) -> DegeneracyResult:
    """True iff every lambda-coefficient of the pencil determinant is
    provably zero.  Probabilistic coefficient verdicts raise
    InconclusiveError."""
    pencil = MetricPencil.of(op)
    for exps, coeff in pencil_determinant(op).items():
        verdict = _proven_verdict(coeff, pencil.ws, policy)
        if verdict.kind == "proven_nonzero":
            monom = ex.mul(*(
                ex.pow_(ex.Var(pencil.params[a]), e)
                for a, e in enumerate(exps) if e
            ))
            return DegeneracyResult(False, ex.mul(coeff, monom))
    return DegeneracyResult(True, None)


def _proven_verdict(e: ex.Expr, ws: Workspace,
                    policy: ZeroTestPolicy) -> Verdict:
    from .zerotest import is_zero

    verdict = is_zero(e, ws, policy)
    if not verdict.proven:
        raise InconclusiveError(
            f"verdict for {e} is only probabilistic: {verdict}"
        )
    return verdict


def generic_rank(op: HydroOperator,
                 policy: ZeroTestPolicy = DEFAULT_POLICY) -> int:
    """Largest r with an r x r pencil minor not identically zero in the
    lambdas and u."""
    pencil = MetricPencil.of(op)
    n = op.n
    for r in range(n, 0, -1):
        for rows in itertools.combinations(range(n), r):
            for cols in itertools.combinations(range(n), r):
                sub = [[pencil.matrix[i][j] for j in cols] for i in rows]
                minor = _det(sub, r)
                if minor == ex.ZERO:
                    continue
                verdict = _proven_verdict(minor, pencil.ws, policy)
                if verdict.kind == "proven_nonzero":
                    return r
    return 0


@dataclass
class TrivialityResult:
    trivial: bool
    xi: ex.Expr | None
    note: str = ""


def is_trivial_pair(op: HydroOperator,
                    policy: ZeroTestPolicy = DEFAULT_POLICY) -> TrivialityResult:
    """Is the 2D operator identically zero, or its y-part a constant
    multiple of its x-part (g~ = xi g, b~ = xi b)?"""
    if op.d != 2:
        raise OperatorError("triviality is defined for d = 2 operators")
    ws = op.ws
    x_entries = list(_part_entries(op, 0))
    y_entries = list(_part_entries(op, 1))

    ref = None
    for xe, ye in zip(x_entries, y_entries):
        if _proven_verdict(xe, ws, policy).kind == "proven_nonzero":
            ref = (xe, ye)
            break
    if ref is None:
        # x-part vanishes identically: trivial only if y does as well
        for ye in y_entries:
            if _proven_verdict(ye, ws, policy).kind == "proven_nonzero":
                return TrivialityResult(False, None,
                                        "x-part zero but y-part nonzero")
        return TrivialityResult(True, ex.ZERO, "identically zero operator")

    x_ref, y_ref = ref
    xi = ex.div(y_ref, x_ref)
    for v in op.ws.variables:
        dxi = differentiate(xi, v)
        if _proven_verdict(dxi, ws, policy).kind == "proven_nonzero":
            return TrivialityResult(
                False, None,
                f"proportionality factor {xi} is not constant",
            )
    for xe, ye in zip(x_entries, y_entries):
        residual = ex.add(ex.mul(ye, x_ref), ex.neg(ex.mul(xe, y_ref)))
        if _proven_verdict(residual, ws, policy).kind == "proven_nonzero":
            return TrivialityResult(False, None, "not proportional")
    return TrivialityResult(True, xi)


def _part_entries(op: HydroOperator, alpha: int):
    n = op.n
    for i in range(n):
        for j in range(n):
            yield op.g[alpha][i][j]
            for k in range(n):
                yield op.b[alpha][i][j][k]


# -- pencil compatibility --------------------------------------------------------

def pencil_compatibility(opx: HydroOperator, opy: HydroOperator,
                         policy: ZeroTestPolicy = DEFAULT_POLICY,
                         lam_name: str = "lam") -> ConditionReport:
    """Forms the 1D operator g_x + lam g_y, b_x + lam b_y with a formal
    constant lam and checks a1..a7 identically in lam; one record per
    lambda power of each residual."""
    if opx.d != 1 or opy.d != 1:
        raise OperatorError("compatibility expects two 1D operators")
    if opx.n != opy.n or opx.ws is not opy.ws:
        raise OperatorError("operators must share components and workspace")
    ws = opx.ws.extended([lam_name])
    lam = ws.constants[-1]
    n = opx.n
    g = [[[ex.add(opx.g[0][i][j], ex.mul(ex.Var(lam), opy.g[0][i][j]))
           for j in range(n)] for i in range(n)]]
    b = [[[[ex.add(opx.b[0][i][j][k], ex.mul(ex.Var(lam), opy.b[0][i][j][k]))
            for k in range(n)] for j in range(n)] for i in range(n)]]
    pencil_op = HydroOperator(ws, 1, n, g, b)

    t0 = time.perf_counter()
    checker = MokhovChecker(pencil_op)
    records = []
    for rel, idx, rf in checker.residuals(
        ("a1", "a2", "a3", "a4", "a5", "a6", "a7")
    ):
        if rf.is_zero:
            records.append(ResidualRecord(rel, idx + ("lam^0",),
                                          ex.ZERO, Verdict("proven_zero")))
            continue
        for exps, coeff in coefficients_in(rf, [lam.name]).items():
            try:
                verdict = verdict_for_ratform(coeff, ws, policy)
            except InconclusiveError:
                verdict = Verdict(INCONCLUSIVE)
            residual = ex.ZERO if coeff.is_zero else ratform_to_expr(coeff)
            records.append(
                ResidualRecord(rel, idx + (f"lam^{exps[0]}",), residual,
                               verdict)
            )
    return ConditionReport(records, time.perf_counter() - t0)
