"""Canonical rational forms: fractions of multivariate polynomials.

The extended variable set is the workspace's variables and constants in
registration order, followed by one opaque generator per distinct atom
(abstract-function derivative atoms and exp/ln/sqrt applications), ordered
by a canonical signature.  Monomial order is graded reverse lexicographic.
Polynomial arithmetic is delegated to sympy's polynomial rings over QQ.
"""

from __future__ import annotations

from fractions import Fraction

from sympy.polys.domains import QQ
from sympy.polys.orderings import grevlex
from sympy.polys.rings import ring as _sympy_ring

from . import expr as ex
from .symbols import Workspace


class NormalizeError(Exception):
    pass


class ZeroDenominatorError(NormalizeError):
    """The denominator is identically zero as a rational function."""


_RING_CACHE: dict[tuple[str, ...], tuple] = {}


def _get_ring(names: tuple[str, ...]):
    hit = _RING_CACHE.get(names)
    if hit is None:
        hit = _sympy_ring(list(names), QQ, grevlex)
        _RING_CACHE[names] = hit
    return hit


class PolyContext:
    """A fixed ring over the workspace symbols plus discovered atoms."""

    def __init__(self, ws: Workspace, atom_entries: list[tuple[str, ex.Expr]]):
        self.ws = ws
        self.var_names = tuple(s.name for s in ws.variables) + tuple(
            s.name for s in ws.constants
        )
        # atoms sorted by signature for a reproducible order
        atom_entries = sorted(atom_entries, key=lambda kv: kv[0])
        self.atom_sigs = tuple(sig for sig, _ in atom_entries)
        self.atom_exprs = {sig: e for sig, e in atom_entries}
        names = self.var_names + tuple(
            f"@a{i}" for i in range(len(self.atom_sigs))
        )
        self.ring, *gens = _get_ring(names)
        self.gen_by_name = dict(zip(self.var_names, gens))
        self.gen_by_sig = dict(zip(self.atom_sigs, gens[len(self.var_names):]))
        self.n_vars = len(self.var_names)

    def gen_expr(self, index: int) -> ex.Expr:
        """The Expr a ring generator stands for."""
        if index < self.n_vars:
            name = self.var_names[index]
            return ex.Var(self.ws.require_symbol(name))
        return self.atom_exprs[self.atom_sigs[index - self.n_vars]]


class RationalForm:
    """num/den with gcd(num, den) = 1 and monic denominator."""

    __slots__ = ("num", "den", "ctx")

    def __init__(self, num, den, ctx: PolyContext, reduced=False):
        if not den:
            raise ZeroDenominatorError("denominator is identically zero")
        if not reduced:
            num, den = _cancel(num, den)
        self.num = num
        self.den = den
        self.ctx = ctx

    @property
    def is_zero(self) -> bool:
        return not self.num

    def __eq__(self, other):
        return (
            isinstance(other, RationalForm)
            and self.ctx.ring == other.ctx.ring
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.den == other.den:
            return RationalForm(self.num + other.num, self.den, self.ctx)
        return RationalForm(
            self.num * other.den + other.num * self.den,
            self.den * other.den,
            self.ctx,
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return RationalForm(-self.num, self.den, self.ctx, reduced=True)

    def __mul__(self, other):
        if self.is_zero or other.is_zero:
            return zero_form(self.ctx)
        one = self.ctx.ring.one
        if self.den == one and other.den == one:
            return RationalForm(self.num * other.num, one, self.ctx,
                                reduced=True)
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        return RationalForm(
            self.num.quo(g1) * other.num.quo(g2),
            self.den.quo(g2) * other.den.quo(g1),
            self.ctx,
        )

    def __truediv__(self, other):
        if other.is_zero:
            raise ZeroDenominatorError("division by an identically zero form")
        return self * RationalForm(other.den, other.num, other.ctx)

    def __pow__(self, k: int):
        if k == 0:
            return one_form(self.ctx)
        if k < 0:
            return one_form(self.ctx) / (self ** (-k))
        return RationalForm(self.num ** k, self.den ** k, self.ctx, reduced=True)

    def __str__(self):
        if self.den == self.ctx.ring.one:
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__


def _cancel(num, den):
    if not num:
        return num, den.ring.one
    g = num.gcd(den)
    if g != g.ring.one:
        num, den = num.quo(g), den.quo(g)
    lc = den.LC
    if lc != 1:
        num, den = num.quo_ground(lc), den.quo_ground(lc)
    return num, den


def zero_form(ctx: PolyContext) -> RationalForm:
    cached = getattr(ctx, "_zero_form", None)
    if cached is None:
        cached = RationalForm(ctx.ring.zero, ctx.ring.one, ctx, reduced=True)
        ctx._zero_form = cached
    return cached


def one_form(ctx: PolyContext) -> RationalForm:
    cached = getattr(ctx, "_one_form", None)
    if cached is None:
        cached = RationalForm(ctx.ring.one, ctx.ring.one, ctx, reduced=True)
        ctx._one_form = cached
    return cached


# -- atom signatures ---------------------------------------------------------

def atom_signature(atom: ex.Expr, ws: Workspace, _cache=None) -> str:
    """A canonical string identifying an atom up to rational-function
    equality of its arguments."""
    if _cache is None:
        _cache = {}
    key = atom.key()
    hit = _cache.get(key)
    if hit is not None:
        return hit
    if isinstance(atom, ex.Call):
        inner = _canonical_string(atom.arg, ws, _cache)
        sig = f"{atom.fn}({inner})"
    elif isinstance(atom, ex.FuncAtom):
        args = ",".join(_canonical_string(a, ws, _cache) for a in atom.args)
        sig = f"{atom.func.name}[{','.join(map(str, atom.deriv))}]({args})"
    else:
        raise NormalizeError(f"not an atom: {atom}")
    _cache[key] = sig
    return sig


def _canonical_string(e: ex.Expr, ws: Workspace, cache) -> str:
    rf = _normalize_cached(e, ws, cache)
    return str(rf)


def build_context(ws: Workspace, exprs, _cache=None) -> PolyContext:
    if _cache is None:
        _cache = {}
    entries: dict[str, ex.Expr] = {}
    for e in exprs:
        for atom in ex.atoms(e):
            sig = atom_signature(atom, ws, _cache)
            entries.setdefault(sig, atom)
    return PolyContext(ws, list(entries.items()))


def to_rational_form(e: ex.Expr, ctx: PolyContext, _cache=None) -> RationalForm:
    ring = ctx.ring
    if isinstance(e, ex.Rat):
        v = e.value
        return RationalForm(
            ring.ground_new(QQ(v.numerator, v.denominator)), ring.one, ctx,
            reduced=True,
        )
    if isinstance(e, ex.Var):
        gen = ctx.gen_by_name.get(e.symbol.name)
        if gen is None:
            raise NormalizeError(f"symbol {e.symbol.name!r} not in context")
        return RationalForm(gen, ring.one, ctx, reduced=True)
    if isinstance(e, ex.Sum):
        out = zero_form(ctx)
        for t in e.terms:
            out = out + to_rational_form(t, ctx, _cache)
        return out
    if isinstance(e, ex.Prod):
        out = one_form(ctx)
        for f in e.factors:
            out = out * to_rational_form(f, ctx, _cache)
            if out.is_zero:
                return out
        return out
    if isinstance(e, ex.Pow):
        return to_rational_form(e.base, ctx, _cache) ** e.exponent
    if isinstance(e, ex.Quot):
        num = to_rational_form(e.num, ctx, _cache)
        den = to_rational_form(e.den, ctx, _cache)
        if den.is_zero:
            raise ZeroDenominatorError(
                f"denominator {e.den} is identically zero"
            )
        return num / den
    if isinstance(e, (ex.Call, ex.FuncAtom)):
        sig = atom_signature(e, ctx.ws, _cache if _cache is not None else {})
        gen = ctx.gen_by_sig.get(sig)
        if gen is None:
            raise NormalizeError(f"atom {e} not in context")
        return RationalForm(gen, ring.one, ctx, reduced=True)
    raise NormalizeError(f"cannot normalize {type(e)}")


def _normalize_cached(e: ex.Expr, ws: Workspace, cache) -> RationalForm:
    ctx = build_context(ws, [e], cache)
    return to_rational_form(e, ctx, cache)


def normalize(e: ex.Expr, ws: Workspace) -> RationalForm:
    """Canonical form; equal rational functions of the extended variable
    set map to the identical (num, den) pair."""
    return _normalize_cached(e, ws, {})


# -- back-conversion and parameter extraction --------------------------------

def _monom_expr(ctx: PolyContext, monom) -> ex.Expr:
    factors = []
    for i, p in enumerate(monom):
        if p:
            factors.append(ex.pow_(ctx.gen_expr(i), p))
    return ex.mul(*factors) if factors else ex.ONE


def poly_to_expr(p, ctx: PolyContext) -> ex.Expr:
    terms = []
    for monom, coeff in sorted(p.terms(), key=lambda t: ctx.ring.order(t[0]),
                               reverse=True):
        c = Fraction(int(coeff.numerator), int(coeff.denominator))
        terms.append(ex.mul(ex.Rat(c), _monom_expr(ctx, monom)))
    return ex.add(*terms)


def ratform_to_expr(rf: RationalForm) -> ex.Expr:
    num = poly_to_expr(rf.num, rf.ctx)
    if rf.den == rf.ctx.ring.one:
        return num
    return ex.div(num, poly_to_expr(rf.den, rf.ctx))


def coefficients_in(rf: RationalForm, param_names: list[str]):
    """Split num by exponents of the given parameter generators.

    Returns {exponent tuple: RationalForm}; requires a parameter-free
    denominator.
    """
    ctx = rf.ctx
    idx = []
    for name in param_names:
        gen = ctx.gen_by_name.get(name)
        if gen is None:
            raise NormalizeError(f"parameter {name!r} not in context")
        idx.append(ctx.var_names.index(name))
    for monom, _ in rf.den.terms():
        if any(monom[i] for i in idx):
            raise NormalizeError("denominator depends on formal parameters")
    buckets: dict[tuple, object] = {}
    ring = ctx.ring
    for monom, coeff in rf.num.terms():
        exps = tuple(monom[i] for i in idx)
        rest = list(monom)
        for i in idx:
            rest[i] = 0
        term = ring.term_new(tuple(rest), coeff)
        buckets[exps] = buckets.get(exps, ring.zero) + term
    return {
        exps: RationalForm(num, rf.den, ctx)
        for exps, num in sorted(buckets.items())
    }


def uses_transcendental(rf: RationalForm) -> bool:
    """Does the numerator involve any exp/ln/sqrt generator?"""
    ctx = rf.ctx
    for i, sig in enumerate(ctx.atom_sigs):
        if sig.startswith(("exp(", "ln(", "sqrt(")):
            gi = ctx.n_vars + i
            for monom, _ in rf.num.terms():
                if monom[gi]:
                    return True
    return False
