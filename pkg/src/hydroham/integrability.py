"""Fourth-order integrability test for first-order Lagrangian densities
f(a, b, c), plus the partial Legendre transform that produces them from
Hamiltonian densities.

The test is run in denominator-cleared form H*d4f - d3f*dH - 3*det(dM),
a homogeneous quartic in the differentials (da, db, dc); the density is
integrable iff all 15 coefficients vanish.  The clearing by H is valid off
the H = 0 locus; densities with identically vanishing Hessian determinant
are rejected as inapplicable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from . import expr as ex
from .calculus import differentiate, substitute
from .operators import _det
from .parser import parse
from .symbols import Symbol, Workspace
from .zerotest import DEFAULT_POLICY, ZeroTestPolicy, is_zero


class IntegrabilityError(Exception):
    pass


class DegenerateLagrangianError(IntegrabilityError):
    """H is identically zero; the fourth-order test does not apply."""


LAGRANGIAN_VARS = ("a", "b", "c")


def lagrangian_workspace(functions=()) -> Workspace:
    ws = Workspace()
    ws.add_variables(*LAGRANGIAN_VARS)
    for name, args in functions:
        ws.add_function(name, list(args))
    return ws.freeze()


@dataclass
class LagrangianDensity:
    f: ex.Expr
    ws: Workspace

    def __post_init__(self):
        vars_ = set(self.ws.variables[:3])
        extra = ex.free_symbols(self.f) - vars_ - set(self.ws.constants)
        if extra:
            raise IntegrabilityError(
                f"density may only use a, b, c; found "
                f"{sorted(s.name for s in extra)}"
            )

    @classmethod
    def from_text(cls, text: str, functions=()) -> "LagrangianDensity":
        ws = lagrangian_workspace(functions)
        return cls(parse(text, ws), ws)

    def vars(self) -> list[Symbol]:
        return self.ws.variables[:3]


def _multi_indices(order: int):
    for i in range(order, -1, -1):
        for j in range(order - i, -1, -1):
            yield (i, j, order - i - j)


@dataclass
class HomogeneousForm:
    """Coefficients of a homogeneous form in (da, db, dc)."""

    order: int
    coefficients: dict  # (i, j, k) with i+j+k = order -> Expr

    def __mul__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        out: dict = {}
        for m1, c1 in self.coefficients.items():
            if c1 == ex.ZERO:
                continue
            for m2, c2 in other.coefficients.items():
                if c2 == ex.ZERO:
                    continue
                m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                out[m] = ex.add(out.get(m, ex.ZERO), ex.mul(c1, c2))
        order = self.order + other.order
        return HomogeneousForm(
            order,
            {m: out.get(m, ex.ZERO) for m in _multi_indices(order)},
        )

    def scaled(self, factor) -> "HomogeneousForm":
        return HomogeneousForm(self.order, {
            m: ex.mul(ex.as_expr(factor), c)
            for m, c in self.coefficients.items()
        })

    def minus(self, other: "HomogeneousForm") -> "HomogeneousForm":
        return HomogeneousForm(self.order, {
            m: ex.add(self.coefficients[m], ex.neg(other.coefficients[m]))
            for m in self.coefficients
        })


QuarticForm = HomogeneousForm


def _partial(f: ex.Expr, vars_, counts) -> ex.Expr:
    out = f
    for v, c in zip(vars_, counts):
        for _ in range(c):
            out = differentiate(out, v)
    return out


def sym_diff(density: LagrangianDensity, order: int) -> HomogeneousForm:
    """The symmetric differential d^r f: coefficient of da^i db^j dc^k is
    (r! / i!j!k!) * the matching partial derivative."""
    if order not in (1, 2, 3, 4):
        raise IntegrabilityError("symmetric differentials of order 1..4 only")
    vars_ = density.vars()
    coeffs = {}
    for m in _multi_indices(order):
        mult = Fraction(factorial(order),
                        factorial(m[0]) * factorial(m[1]) * factorial(m[2]))
        coeffs[m] = ex.mul(ex.Rat(mult), _partial(density.f, vars_, m))
    return HomogeneousForm(order, coeffs)


def hessian_determinant(density: LagrangianDensity) -> ex.Expr:
    vars_ = density.vars()
    m = [[_partial(density.f, vars_, _unit2(i, j)) for j in range(3)]
         for i in range(3)]
    return _det(m, 3)


def _unit2(i, j):
    counts = [0, 0, 0]
    counts[i] += 1
    counts[j] += 1
    return counts


def bordered_matrix(density: LagrangianDensity) -> list:
    """The 4x4 matrix M = [[0, f_a, f_b, f_c], [f_a, Hessian row], ...]."""
    vars_ = density.vars()
    first = [ex.ZERO] + [differentiate(density.f, v) for v in vars_]
    rows = [first]
    for i in range(3):
        row = [first[i + 1]]
        for j in range(3):
            row.append(_partial(density.f, vars_, _unit2(i, j)))
        rows.append(row)
    return rows


def bordered_matrix_derivatives(density: LagrangianDensity) -> list:
    """M_a, M_b, M_c: entrywise derivatives of M with the (1,1) corner 0."""
    vars_ = density.vars()
    m = bordered_matrix(density)
    out = []
    for v in vars_:
        out.append([
            [differentiate(m[i][j], v) for j in range(4)] for i in range(4)
        ])
    return out


def det_dM(density: LagrangianDensity) -> QuarticForm:
    """det(M_a da + M_b db + M_c dc) expanded as a quartic form."""
    mats = bordered_matrix_derivatives(density)
    coeffs = {m: ex.ZERO for m in _multi_indices(4)}
    for perm in itertools.permutations(range(4)):
        sign = _perm_sign(perm)
        # each factor row picks one of the three matrices; expand the product
        for choice in itertools.product(range(3), repeat=4):
            entries = [mats[choice[r]][r][perm[r]] for r in range(4)]
            if any(e == ex.ZERO for e in entries):
                continue
            m = (choice.count(0), choice.count(1), choice.count(2))
            coeffs[m] = ex.add(coeffs[m], ex.mul(ex.Rat(sign), *entries))
    return HomogeneousForm(4, coeffs)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        i, length = start, 0
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass
class FktResult:
    residual: QuarticForm
    verdicts: dict              # multi-index -> Verdict
    hessian: ex.Expr

    @property
    def integrable(self) -> bool:
        return all(v.is_zero_verdict for v in self.verdicts.values())

    @property
    def proven(self) -> bool:
        return all(v.proven for v in self.verdicts.values())

    def first_failure(self):
        for m in _multi_indices(4):
            v = self.verdicts[m]
            if not v.is_zero_verdict:
                return m, self.residual.coefficients[m]
        return None


def fkt_residual(density: LagrangianDensity,
                 policy: ZeroTestPolicy = DEFAULT_POLICY) -> FktResult:
    """The cleared-denominator fourth-order integrability residual
    H*d4f - d3f*dH - 3*det(dM); integrable iff all 15 coefficients are
    zero."""
    H = hessian_determinant(density)
    if is_zero(H, density.ws, policy).is_zero_verdict:
        raise DegenerateLagrangianError(
            "the Hessian determinant vanishes identically; the fourth-order "
            "test is inapplicable"
        )
    d4 = sym_diff(density, 4).scaled(H)
    dH = HomogeneousForm(1, {
        m: _partial(H, density.vars(), m) for m in _multi_indices(1)
    })
    d3_dH = sym_diff(density, 3) * dH
    residual = d4.minus(d3_dH).minus(det_dM(density).scaled(3))
    from .ratform import normalize, ratform_to_expr

    residual = HomogeneousForm(4, {
        m: ratform_to_expr(normalize(c, density.ws))
        for m, c in residual.coefficients.items()
    })
    verdicts = {
        m: is_zero(c, density.ws, policy)
        for m, c in residual.coefficients.items()
    }
    return FktResult(residual, verdicts, H)


def euler_lagrange_fluxes(density: LagrangianDensity):
    """(f_a, f_b, f_c): the fluxes whose x, y, t divergence is the
    Euler-Lagrange equation of the density."""
    return tuple(differentiate(density.f, v) for v in density.vars())


# -- partial Legendre transform -------------------------------------------------

@dataclass
class LegendreResult:
    density: LagrangianDensity
    h_tilde: ex.Expr            # h - rho*h_rho in (rho_t, u, v)
    identity_residuals: list    # the three derivative identities


def legendre(h: ex.Expr, ws: Workspace, inverse: ex.Expr,
             policy: ZeroTestPolicy = DEFAULT_POLICY,
             names=("rho", "u", "v", "rhot")) -> LegendreResult:
    """Partial Legendre transform rho_t = h_rho, h~ = h - rho h_rho.

    `h` is an expression in (rho, u, v); `inverse` expresses rho through
    (rhot, u, v) and must satisfy h_rho(inverse, u, v) = rhot.  The result
    is the Lagrangian density f(a, b, c) = h~ with (u, v, rho_t) renamed to
    (a, b, c), together with the verified derivative identities
    h~_rhot = -rho, h~_u = h_u, h~_v = h_v.
    """
    rho, u, v, rhot = (ws.require_symbol(n) for n in names)
    h_rho = differentiate(h, rho)
    sub_inv = {rho: inverse}
    check = substitute(h_rho, sub_inv) - ex.Var(rhot)
    if not is_zero(check, ws, policy).is_zero_verdict:
        raise IntegrabilityError(
            "inverse does not satisfy h_rho(inverse, u, v) = rhot"
        )
    h_tilde = substitute(h - ex.Var(rho) * h_rho, sub_inv)

    residuals = [
        ("h~_rhot + rho", differentiate(h_tilde, rhot) + inverse),
        ("h~_u - h_u", differentiate(h_tilde, u)
         - substitute(differentiate(h, u), sub_inv)),
        ("h~_v - h_v", differentiate(h_tilde, v)
         - substitute(differentiate(h, v), sub_inv)),
    ]
    for label, r in residuals:
        if not is_zero(r, ws, policy).is_zero_verdict:
            raise IntegrabilityError(f"derivative identity {label} failed")

    lag_ws = lagrangian_workspace(
        [(fn.name, [a.name for a in fn.args]) for fn in ws.functions.values()]
    )
    a, b, c = (lag_ws.require_symbol(n) for n in LAGRANGIAN_VARS)
    f = substitute(h_tilde, {u: ex.Var(a), v: ex.Var(b), rhot: ex.Var(c)})
    from .ratform import normalize, ratform_to_expr

    f = ratform_to_expr(normalize(f, lag_ws))
    return LegendreResult(LagrangianDensity(f, lag_ws), h_tilde,
                          [(lbl, r) for lbl, r in residuals])
