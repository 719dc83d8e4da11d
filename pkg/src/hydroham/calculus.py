"""Exact differentiation and syntactic substitution on expression trees."""

from __future__ import annotations

from . import expr as ex
from .symbols import Symbol


def differentiate(e: ex.Expr, v: Symbol) -> ex.Expr:
    """Exact partial derivative with respect to a registered variable.

    Abstract-function atoms increment their multi-index and chain through
    their argument expressions.
    """
    if isinstance(e, ex.Rat):
        return ex.ZERO
    if isinstance(e, ex.Var):
        return ex.ONE if e.symbol == v else ex.ZERO
    if isinstance(e, ex.Sum):
        return ex.add(*(differentiate(t, v) for t in e.terms))
    if isinstance(e, ex.Prod):
        terms = []
        factors = e.factors
        for i, f in enumerate(factors):
            df = differentiate(f, v)
            if df == ex.ZERO:
                continue
            terms.append(ex.mul(*factors[:i], df, *factors[i + 1:]))
        return ex.add(*terms)
    if isinstance(e, ex.Pow):
        db = differentiate(e.base, v)
        if db == ex.ZERO:
            return ex.ZERO
        return ex.mul(ex.Rat(e.exponent), ex.pow_(e.base, e.exponent - 1), db)
    if isinstance(e, ex.Quot):
        dn = differentiate(e.num, v)
        dd = differentiate(e.den, v)
        if dd == ex.ZERO:
            return ex.div(dn, e.den)
        return ex.div(
            ex.add(ex.mul(dn, e.den), ex.neg(ex.mul(e.num, dd))),
            ex.pow_(e.den, 2),
        )
    if isinstance(e, ex.Call):
        da = differentiate(e.arg, v)
        if da == ex.ZERO:
            return ex.ZERO
        if e.fn == "exp":
            return ex.mul(e, da)
        if e.fn == "ln":
            return ex.div(da, e.arg)
        if e.fn == "sqrt":
            return ex.div(da, ex.mul(ex.Rat(2), e))
    if isinstance(e, ex.FuncAtom):
        terms = []
        for t, arg in enumerate(e.args):
            da = differentiate(arg, v)
            if da == ex.ZERO:
                continue
            bumped = tuple(
                d + 1 if s == t else d for s, d in enumerate(e.deriv)
            )
            terms.append(ex.mul(ex.FuncAtom(e.func, e.args, bumped), da))
        return ex.add(*terms)
    raise ex.ExprError(f"cannot differentiate {type(e)}")


def substitute(e: ex.Expr, bindings: dict[Symbol, ex.Expr]) -> ex.Expr:
    """Simultaneous syntactic substitution of variables by expressions."""
    if not bindings:
        return e
    if isinstance(e, ex.Rat):
        return e
    if isinstance(e, ex.Var):
        return bindings.get(e.symbol, e)
    if isinstance(e, ex.Sum):
        return ex.add(*(substitute(t, bindings) for t in e.terms))
    if isinstance(e, ex.Prod):
        return ex.mul(*(substitute(f, bindings) for f in e.factors))
    if isinstance(e, ex.Pow):
        return ex.pow_(substitute(e.base, bindings), e.exponent)
    if isinstance(e, ex.Quot):
        return ex.div(substitute(e.num, bindings), substitute(e.den, bindings))
    if isinstance(e, ex.Call):
        return ex.call(e.fn, substitute(e.arg, bindings))
    if isinstance(e, ex.FuncAtom):
        args = tuple(substitute(a, bindings) for a in e.args)
        return ex.FuncAtom(e.func, args, e.deriv)
    raise ex.ExprError(f"cannot substitute in {type(e)}")


def specialize(e: ex.Expr, func, replacement: ex.Expr) -> ex.Expr:
    """Replace an abstract function by a concrete expression everywhere.

    ``replacement`` is an expression in the function's declared argument
    variables.  Atoms carrying a derivative multi-index become the matching
    derivative of the replacement, evaluated at the atom's arguments.
    """
    if isinstance(e, (ex.Rat, ex.Var)):
        return e
    if isinstance(e, ex.Sum):
        return ex.add(*(specialize(t, func, replacement) for t in e.terms))
    if isinstance(e, ex.Prod):
        return ex.mul(*(specialize(f, func, replacement) for f in e.factors))
    if isinstance(e, ex.Pow):
        return ex.pow_(specialize(e.base, func, replacement), e.exponent)
    if isinstance(e, ex.Quot):
        return ex.div(
            specialize(e.num, func, replacement),
            specialize(e.den, func, replacement),
        )
    if isinstance(e, ex.Call):
        return ex.call(e.fn, specialize(e.arg, func, replacement))
    if isinstance(e, ex.FuncAtom):
        args = tuple(specialize(a, func, replacement) for a in e.args)
        if e.func != func:
            return ex.FuncAtom(e.func, args, e.deriv)
        out = replacement
        for t, order in enumerate(e.deriv):
            for _ in range(order):
                out = differentiate(out, func.args[t])
        return substitute(out, dict(zip(func.args, args)))
    raise ex.ExprError(f"cannot substitute in {type(e)}")
