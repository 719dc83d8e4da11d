"""2+1 quasilinear systems generated by (operator, Hamiltonian density).

u_t + A u_x + B u_y = 0 with A^i_k = sum_j (g^{ij,x} h_{jk} + b^{ij,x}_k h_j)
and B likewise from the y coefficients.  Includes the dispersion relation,
the commuting-flow and reduction residuals, the hodograph residuals, and
the structural classifier for systems generated with an abstract density.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import expr as ex
from .calculus import differentiate, substitute
from .operators import HydroOperator, _det
from .ratform import (
    build_context,
    coefficients_in,
    normalize,
    ratform_to_expr,
    to_rational_form,
)
from .symbols import Symbol, Workspace
from .zerotest import DEFAULT_POLICY, ZeroTestPolicy, is_zero


class HamsysError(Exception):
    pass


class DegenerateCandidateError(HamsysError):
    """Two characteristic speeds coincide as expressions."""


@dataclass
class HamiltonianDensity:
    h: ex.Expr
    ws: Workspace

    @classmethod
    def abstract(cls, ws: Workspace, n: int, name: str = "h"):
        """A fully generic density h(u^1..u^n) as an abstract atom."""
        arg_names = [s.name for s in ws.variables[:n]]
        fresh = name
        k = 0
        while ws.lookup(fresh) is not None:
            k += 1
            fresh = f"{name}{k}"
        ws2 = _clone_with_function(ws, fresh, arg_names)
        atom = ex.func_atom(ws2.functions[fresh])
        return cls(atom, ws2)


def _clone_with_function(ws: Workspace, name: str, arg_names) -> Workspace:
    ws2 = Workspace()
    ws2.add_variables(*(s.name for s in ws.variables))
    if ws.constants:
        ws2.add_constants(*(s.name for s in ws.constants))
    for fn in ws.functions.values():
        # carried over as objects: declared arguments may name symbols that
        # are no longer registered (frozen components)
        ws2.functions[fn.name] = fn
        ws2._by_name[fn.name] = fn
    if name not in ws2.functions:
        ws2.add_function(name, list(arg_names))
    return ws2.freeze()


@dataclass
class QuasilinearSystem:
    ws: Workspace
    n: int
    A: list  # n x n Exprs
    B: list
    operator: HydroOperator | None = None
    density: ex.Expr | None = None

    def row_entries(self, i: int):
        return list(self.A[i]) + list(self.B[i])


def generate_system(op: HydroOperator, h: HamiltonianDensity | ex.Expr,
                    simplify: bool = True) -> QuasilinearSystem:
    """A^i_k = sum_j (g^{ij,x} h_{u^j u^k} + b^{ij,x}_k h_{u^j}); B from the
    y part.  d = 1 operators get B = 0."""
    if op.d > 2:
        raise HamsysError("system generation supports d <= 2")
    if isinstance(h, HamiltonianDensity):
        ws, h_expr = h.ws, h.h
    else:
        ws, h_expr = op.ws, h
    n = op.n
    vars_ = ws.variables[:n]
    bad = ex.free_symbols(h_expr) - set(ws.variables) - set(ws.constants)
    if bad:
        raise HamsysError(
            f"density uses unregistered symbols {sorted(s.name for s in bad)}"
        )
    dh = [differentiate(h_expr, v) for v in vars_]
    d2h = [[differentiate(dh[j], v) for v in vars_] for j in range(n)]

    def matrix(alpha: int):
        if alpha >= op.d:
            return [[ex.ZERO] * n for _ in range(n)]
        out = []
        for i in range(n):
            row = []
            for k in range(n):
                terms = []
                for j in range(n):
                    if op.g[alpha][i][j] != ex.ZERO:
                        terms.append(ex.mul(op.g[alpha][i][j], d2h[j][k]))
                    if op.b[alpha][i][j][k] != ex.ZERO:
                        terms.append(ex.mul(op.b[alpha][i][j][k], dh[j]))
                e = ex.add(*terms)
                if simplify and terms:
                    e = ratform_to_expr(normalize(e, ws))
                row.append(e)
            out.append(row)
        return out

    return QuasilinearSystem(ws, n, matrix(0), matrix(1), op, h_expr)


DISPERSION_PARAMS = ("lam", "mu")


@dataclass
class DispersionRelation:
    ws: Workspace
    params: list[Symbol]
    det: ex.Expr
    coefficients: dict  # (i, j) exponents of (lam, mu) -> Expr


def dispersion(sys: QuasilinearSystem) -> DispersionRelation:
    """det(E + lam A + mu B) expanded as a polynomial in the formal
    constants lam, mu."""
    ws = sys.ws.extended(list(DISPERSION_PARAMS))
    lam, mu = ws.constants[-2:]
    n = sys.n
    m = [
        [
            ex.add(
                ex.ONE if i == k else ex.ZERO,
                ex.mul(ex.Var(lam), sys.A[i][k]),
                ex.mul(ex.Var(mu), sys.B[i][k]),
            )
            for k in range(n)
        ]
        for i in range(n)
    ]
    det = _det(m, n)
    ctx = build_context(ws, [det])
    rf = to_rational_form(det, ctx)
    coeffs = {
        exps: ratform_to_expr(c)
        for exps, c in coefficients_in(rf, [lam.name, mu.name]).items()
        if not c.is_zero
    }
    return DispersionRelation(ws, [lam, mu], det, coeffs)


# -- hydrodynamic reduction candidates ----------------------------------------

@dataclass
class ReductionCandidate:
    """u = u(R^1..R^m) with R^i_t = lambda^i R^i_x, R^i_y = mu^i R^i_x."""

    ws: Workspace                # workspace of the R variables
    m: int
    u: list[ex.Expr]             # n expressions in R
    lam: list[ex.Expr]           # m characteristic speeds
    mu: list[ex.Expr]
    v: list[ex.Expr] | None = None   # optional commuting-flow speeds

    @property
    def r_vars(self) -> list[Symbol]:
        return self.ws.variables[: self.m]


def commutativity_residual(c: ReductionCandidate,
                           policy: ZeroTestPolicy = DEFAULT_POLICY):
    """Cleared-denominator commutation constraints
    d_j lam^i (mu^j - mu^i) - d_j mu^i (lam^j - lam^i), i != j."""
    if c.m < 2:
        raise HamsysError("commutativity needs m >= 2")
    for i in range(c.m):
        for j in range(c.m):
            if i == j:
                continue
            if is_zero(c.lam[i] - c.lam[j], c.ws, policy).is_zero_verdict or \
               is_zero(c.mu[i] - c.mu[j], c.ws, policy).is_zero_verdict:
                raise DegenerateCandidateError(
                    f"speeds {i + 1} and {j + 1} coincide"
                )
    out = []
    R = c.r_vars
    for i in range(c.m):
        for j in range(c.m):
            if i == j:
                continue
            residual = ex.add(
                ex.mul(differentiate(c.lam[i], R[j]),
                       ex.add(c.mu[j], ex.neg(c.mu[i]))),
                ex.neg(ex.mul(differentiate(c.mu[i], R[j]),
                              ex.add(c.lam[j], ex.neg(c.lam[i])))),
            )
            out.append(((i + 1, j + 1), residual))
    return out


def reduction_residual(c: ReductionCandidate, sys: QuasilinearSystem):
    """(E + lam^i A + mu^i B) d_i u after substituting u = u(R); n*m
    expressions over the R variables."""
    n = sys.n
    u_vars = sys.ws.variables[:n]
    binding = dict(zip(u_vars, c.u))
    A = [[substitute(sys.A[i][k], binding) for k in range(n)]
         for i in range(n)]
    B = [[substitute(sys.B[i][k], binding) for k in range(n)]
         for i in range(n)]
    out = []
    for i in range(c.m):
        du = [differentiate(c.u[a], c.r_vars[i]) for a in range(n)]
        for row in range(n):
            terms = [du[row]]
            for k in range(n):
                if du[k] == ex.ZERO:
                    continue
                terms.append(ex.mul(c.lam[i], A[row][k], du[k]))
                terms.append(ex.mul(c.mu[i], B[row][k], du[k]))
            out.append(((i + 1, row + 1), ex.add(*terms)))
    return out


def hodograph_residual(c: ReductionCandidate, point: dict, t, x, y,
                       policy: ZeroTestPolicy = DEFAULT_POLICY):
    """Symbolic residuals of the commuting-flow linear system for v^i, and
    numeric residuals v^i(R0) - x - lam^i t - mu^i y at the given point."""
    if c.v is None:
        raise HamsysError("candidate carries no commuting-flow speeds v")
    R = c.r_vars
    symbolic = []
    for i in range(c.m):
        for j in range(c.m):
            if i == j:
                continue
            # d_j v^i (lam^j - lam^i) = d_j lam^i (v^j - v^i), and the same
            # against the mu family
            for fam_name, fam in (("lam", c.lam), ("mu", c.mu)):
                residual = ex.add(
                    ex.mul(differentiate(c.v[i], R[j]),
                           ex.add(fam[j], ex.neg(fam[i]))),
                    ex.neg(ex.mul(differentiate(fam[i], R[j]),
                                  ex.add(c.v[j], ex.neg(c.v[i])))),
                )
                symbolic.append(((i + 1, j + 1, fam_name), residual))
    from .zerotest import Point, evaluate

    pt = Point(values={R[i]: Fraction(point[R[i].name])
                       for i in range(c.m)})
    numeric = []
    for i in range(c.m):
        expr = ex.add(
            c.v[i], ex.neg(ex.as_expr(Fraction(x))),
            ex.neg(ex.mul(ex.as_expr(Fraction(t)), c.lam[i])),
            ex.neg(ex.mul(ex.as_expr(Fraction(y)), c.mu[i])),
        )
        numeric.append((i + 1, evaluate(expr, pt, policy.precision, c.ws)))
    return symbolic, numeric


# -- reduced-shape classification ----------------------------------------------

TRIVIAL = "trivial"
TRANSPORT_1D = "transport-1D"
DECOUPLED_2C = "decoupled-2-component"
EULER_LAGRANGE = "euler-lagrange-reducible"
UNCLASSIFIED = "unclassified"


@dataclass
class ShapeResult:
    kind: str
    form: object = None          # 1 | 2 | 3 | "1d" for decoupled systems
    frozen: list[str] = field(default_factory=list)

    def __str__(self):
        tag = self.kind if self.form is None else f"{self.kind}({self.form})"
        if self.frozen:
            tag += f" [frozen: {', '.join(self.frozen)}]"
        return tag


def shape_classify(sys: QuasilinearSystem,
                   policy: ZeroTestPolicy = DEFAULT_POLICY) -> ShapeResult:
    """Classify the reduced shape of a system generated with an abstract
    density, by the freezing cascade and coordinate-change invariants."""
    if sys.operator is None:
        raise HamsysError("shape classification needs the source operator")
    return classify_operator_shape(sys.operator, policy)


def classify_operator_shape(op: HydroOperator,
                            policy: ZeroTestPolicy = DEFAULT_POLICY) -> ShapeResult:
    frozen_names: list[str] = []
    current = op
    while True:
        sys = generate_system(current, HamiltonianDensity.abstract(
            current.ws, current.n))
        if current.n == 1:
            # a zero row freezes the last component (fully trivial system);
            # a surviving transport row is the reduced outcome itself
            diag_zero = (
                is_zero(sys.A[0][0], sys.ws, policy).is_zero_verdict
                and is_zero(sys.B[0][0], sys.ws, policy).is_zero_verdict
            )
            if diag_zero:
                frozen_names.append(current.ws.variables[0].name)
                return ShapeResult(TRIVIAL, frozen=frozen_names)
            return ShapeResult(TRANSPORT_1D, frozen=frozen_names)
        row = _freezable_row(sys, policy)
        if row is None:
            break
        frozen_names.append(current.ws.variables[row].name)
        current, _ws = _freeze_component(current, row)

    n = current.n
    if n == 2:
        form = _decoupled_form(current, policy)
        return ShapeResult(DECOUPLED_2C, form, frozen_names)
    if n == 3 and _is_euler_lagrange(current, policy):
        return ShapeResult(EULER_LAGRANGE, frozen=frozen_names)
    return ShapeResult(UNCLASSIFIED, frozen=frozen_names)


def _freezable_row(sys: QuasilinearSystem, policy) -> int | None:
    """First row i with A^i_k = B^i_k = 0 for every k != i (so the row reads
    u^i_t + phi u^i_x + psi u^i_y = 0)."""
    for i in range(sys.n):
        ok = True
        for k in range(sys.n):
            if k == i:
                continue
            if not is_zero(sys.A[i][k], sys.ws, policy).is_zero_verdict:
                ok = False
                break
            if not is_zero(sys.B[i][k], sys.ws, policy).is_zero_verdict:
                ok = False
                break
        if ok:
            return i
    return None


_FROZEN_PREFIX = "c"


def _freeze_component(op: HydroOperator, index: int):
    """Remove component `index`, replacing the variable by a fresh formal
    constant in the remaining entries."""
    old_ws = op.ws
    keep = [i for i in range(op.n) if i != index]
    frozen_sym = old_ws.variables[index]
    const_name = f"{_FROZEN_PREFIX}{frozen_sym.name}"

    ws = Workspace()
    ws.add_variables(*(old_ws.variables[i].name for i in keep),
                     *(s.name for s in old_ws.variables[op.n:]))
    ws.add_constants(*(s.name for s in old_ws.constants), const_name)
    for fn in old_ws.functions.values():
        ws.functions[fn.name] = fn
        ws._by_name[fn.name] = fn
    ws.freeze()

    binding = {frozen_sym: ex.Var(ws.require_symbol(const_name))}
    sub = lambda e: substitute(e, binding)
    g = [[[sub(op.g[a][i][j]) for j in keep] for i in keep]
         for a in range(op.d)]
    b = [[[[sub(op.b[a][i][j][k]) for k in keep] for j in keep]
          for i in keep] for a in range(op.d)]
    return HydroOperator(ws, op.d, len(keep), g, b), ws


def _decoupled_form(op: HydroOperator, policy):
    """Invariants of the frozen 2x2 pair: proportional pair -> "1d";
    non-constant metrics -> Mokhov form 3; else the pencil-determinant
    discriminant separates diag(d_x, d_y) (two roots) from the triangular
    form (double root)."""
    from .operators import is_trivial_pair

    if is_trivial_pair(op, policy).trivial:
        return "1d"
    vars_ = op.variables
    constant_metrics = True
    for a in range(op.d):
        for i in range(op.n):
            for j in range(op.n):
                for v in vars_:
                    d = differentiate(op.g[a][i][j], v)
                    if not is_zero(d, op.ws, policy).is_zero_verdict:
                        constant_metrics = False
                        break
    if not constant_metrics:
        return 3
    disc = _pencil_discriminant(op)
    if is_zero(disc, op.ws, policy).is_zero_verdict:
        return 2
    return 1


def _pencil_discriminant(op: HydroOperator) -> ex.Expr:
    """Discriminant of det(lam g_x + mu g_y) as a binary quadratic."""
    gx, gy = op.g[0], op.g[1]

    def det2(m):
        return ex.add(ex.mul(m[0][0], m[1][1]),
                      ex.neg(ex.mul(m[0][1], m[1][0])))

    a = det2(gx)                      # lam^2 coefficient
    c = det2(gy)                      # mu^2 coefficient
    mixed = ex.add(                   # lam*mu coefficient
        ex.mul(gx[0][0], gy[1][1]), ex.mul(gy[0][0], gx[1][1]),
        ex.neg(ex.mul(gx[0][1], gy[1][0])), ex.neg(ex.mul(gy[0][1], gx[1][0])),
    )
    return ex.add(ex.pow_(mixed, 2), ex.neg(ex.mul(ex.Rat(4), a, c)))


def _is_euler_lagrange(op: HydroOperator, policy) -> bool:
    """Does the abstract-h system match the potential three-component form
    u1_t + (h_2)_x + (h_3)_y, u2_t + (h_1)_x, u3_t + (h_1)_y up to row-wise
    multiples of the potentiality combination u2_y - u3_x?"""
    density = HamiltonianDensity.abstract(op.ws, op.n)
    sys = generate_system(op, density)
    ws = sys.ws
    h = density.h.func
    vars_ = ws.variables[:3]
    h1, h2, h3 = (
        ex.func_atom(h, deriv=tuple(1 if t == s else 0 for t in range(3)))
        for s in range(3)
    )
    dd = lambda e, v: differentiate(e, v)
    # target flux rows: (x-flux, y-flux) per row
    targets = [(h2, h3), (h1, None), (None, h1)]
    ok = True
    for row in range(3):
        fx, fy = targets[row]
        dA = [ex.add(sys.A[row][k],
                     ex.neg(dd(fx, vars_[k])) if fx is not None else ex.ZERO)
              for k in range(3)]
        dB = [ex.add(sys.B[row][k],
                     ex.neg(dd(fy, vars_[k])) if fy is not None else ex.ZERO)
              for k in range(3)]
        # residual row must be c(u) * (u2_y - u3_x): only dA[2] and dB[1]
        # may survive, with dB[1] = -dA[2]
        if not is_zero(dA[0], ws, policy).is_zero_verdict:
            ok = False
        if not is_zero(dA[1], ws, policy).is_zero_verdict:
            ok = False
        if not is_zero(dB[0], ws, policy).is_zero_verdict:
            ok = False
        if not is_zero(dB[2], ws, policy).is_zero_verdict:
            ok = False
        if not is_zero(ex.add(dB[1], dA[2]), ws, policy).is_zero_verdict:
            ok = False
        if not ok:
            return False
    return True
