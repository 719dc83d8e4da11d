"""Pushforward of operators under invertible changes of dependent variables.

The metric moves as a (2,0)-tensor; the b coefficients pick up the usual
inhomogeneous connection-like term.  The law is not trusted: the invariance
suite (Hamiltonian property preserved, round-trip to the original) is the
oracle that pins the sign conventions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import expr as ex
from .calculus import differentiate, substitute
from .operators import (
    ConditionReport,
    HydroOperator,
    ResidualRecord,
    _det,
    check_hamiltonian,
)
from .ratform import normalize, ratform_to_expr
from .symbols import Symbol, Workspace
from .zerotest import (
    DEFAULT_POLICY,
    INCONCLUSIVE,
    InconclusiveError,
    Verdict,
    ZeroTestPolicy,
    is_zero,
)


class InvalidChangeError(Exception):
    pass


@dataclass
class CoordinateChange:
    """u = phi(v) with an explicitly supplied inverse v = phi^{-1}(u)."""

    src_ws: Workspace            # u side
    dst_ws: Workspace            # v side
    forward: list[ex.Expr]       # phi^i, expressions over dst_ws
    inverse: list[ex.Expr]       # (phi^{-1})^i, expressions over src_ws

    def __post_init__(self):
        if len(self.forward) != len(self.inverse):
            raise InvalidChangeError("forward/inverse arity mismatch")

    @property
    def n(self) -> int:
        return len(self.forward)

    @property
    def u_vars(self) -> list[Symbol]:
        return self.src_ws.variables[: self.n]

    @property
    def v_vars(self) -> list[Symbol]:
        return self.dst_ws.variables[: self.n]

    def jacobian(self) -> list[list[ex.Expr]]:
        """J^i_k = d phi^i / d v^k, over the v side."""
        return [
            [differentiate(self.forward[i], v) for v in self.v_vars]
            for i in range(self.n)
        ]

    def inverse_jacobian(self) -> list[list[ex.Expr]]:
        """K^i_p = d (phi^{-1})^i / d u^p, over the u side."""
        return [
            [differentiate(self.inverse[i], u) for u in self.u_vars]
            for i in range(self.n)
        ]

    def to_v(self, e: ex.Expr) -> ex.Expr:
        """Express a u-side expression in v coordinates."""
        return substitute(e, dict(zip(self.u_vars, self.forward)))

    def inverted(self) -> "CoordinateChange":
        return CoordinateChange(self.dst_ws, self.src_ws, self.inverse,
                                self.forward)

    def validate(self, policy: ZeroTestPolicy = DEFAULT_POLICY):
        """Checks phi(phi^{-1}(u)) = u, phi^{-1}(phi(v)) = v and det J != 0."""
        back = dict(zip(self.v_vars, self.inverse))
        for i, u in enumerate(self.u_vars):
            residual = substitute(self.forward[i], back) - ex.Var(u)
            if not is_zero(residual, self.src_ws, policy).is_zero_verdict:
                raise InvalidChangeError(
                    f"forward o inverse is not the identity on {u.name}"
                )
        fwd = dict(zip(self.u_vars, self.forward))
        for i, v in enumerate(self.v_vars):
            residual = substitute(self.inverse[i], fwd) - ex.Var(v)
            if not is_zero(residual, self.dst_ws, policy).is_zero_verdict:
                raise InvalidChangeError(
                    f"inverse o forward is not the identity on {v.name}"
                )
        det = _det(self.jacobian(), self.n)
        if is_zero(det, self.dst_ws, policy).is_zero_verdict:
            raise InvalidChangeError("Jacobian determinant vanishes identically")
        return self


def coordinate_change(src_ws: Workspace, forward: dict[str, ex.Expr],
                      inverse: dict[str, ex.Expr], dst_ws: Workspace,
                      policy: ZeroTestPolicy = DEFAULT_POLICY,
                      validate: bool = True) -> CoordinateChange:
    """Build a change from name-keyed maps (u name -> forward expr over the
    v side, v name -> inverse expr over the u side)."""
    u_names = [s.name for s in src_ws.variables]
    v_names = [s.name for s in dst_ws.variables]
    fwd = [forward[name] for name in u_names[: len(forward)]]
    inv = [inverse[name] for name in v_names[: len(inverse)]]
    change = CoordinateChange(src_ws, dst_ws, fwd, inv)
    if validate:
        change.validate(policy)
    return change


def pushforward(op: HydroOperator, change: CoordinateChange,
                simplify: bool = True) -> HydroOperator:
    """The transformed operator on the v side.

    ghat^{ij a} = K^i_p K^j_q g^{pq a} o phi,
    bhat^{ij a}_k = [K^i_p K^j_q b^{pq a}_r
                     + K^i_p g^{pq a} d^2(phi^{-1})^j/du^q du^r] o phi * J^r_k.
    """
    n = op.n
    if change.n != n:
        raise InvalidChangeError("change arity does not match the operator")
    K = change.inverse_jacobian()
    dK = [
        [
            [differentiate(K[j][q], u) for u in change.u_vars]
            for q in range(n)
        ]
        for j in range(n)
    ]
    J = change.jacobian()
    to_v = change.to_v

    Kv = [[to_v(K[i][p]) for p in range(n)] for i in range(n)]
    gv = [[[to_v(op.g[a][p][q]) for q in range(n)] for p in range(n)]
          for a in range(op.d)]
    bv = [[[[to_v(op.b[a][p][q][r]) for r in range(n)] for q in range(n)]
           for p in range(n)] for a in range(op.d)]
    dKv = [[[to_v(dK[j][q][r]) for r in range(n)] for q in range(n)]
           for j in range(n)]

    g_all, b_all = [], []
    for a in range(op.d):
        g_a = [
            [
                ex.add(*(
                    ex.mul(Kv[i][p], Kv[j][q], gv[a][p][q])
                    for p in range(n) for q in range(n)
                    if gv[a][p][q] != ex.ZERO
                ))
                for j in range(n)
            ]
            for i in range(n)
        ]
        b_a = []
        for i in range(n):
            row = []
            for j in range(n):
                col = []
                for k in range(n):
                    terms = []
                    for r in range(n):
                        if J[r][k] == ex.ZERO:
                            continue
                        for p in range(n):
                            for q in range(n):
                                if bv[a][p][q][r] != ex.ZERO:
                                    terms.append(ex.mul(
                                        Kv[i][p], Kv[j][q], bv[a][p][q][r],
                                        J[r][k],
                                    ))
                                if gv[a][p][q] != ex.ZERO and \
                                        dKv[j][q][r] != ex.ZERO:
                                    terms.append(ex.mul(
                                        Kv[i][p], gv[a][p][q], dKv[j][q][r],
                                        J[r][k],
                                    ))
                    col.append(ex.add(*terms))
                row.append(col)
            b_a.append(row)
        g_all.append(g_a)
        b_all.append(b_a)

    out = HydroOperator(change.dst_ws, op.d, n, g_all, b_all)
    if simplify:
        ws = change.dst_ws
        out = out.map_entries(lambda e: ratform_to_expr(normalize(e, ws)))
    return out


def operator_difference_records(op1: HydroOperator, op2: HydroOperator,
                                policy: ZeroTestPolicy = DEFAULT_POLICY,
                                label: str = "roundtrip") -> list[ResidualRecord]:
    """Entrywise residuals op1 - op2 (same shape, same variable names)."""
    if (op1.d, op1.n) != (op2.d, op2.n):
        raise InvalidChangeError("operator shapes differ")
    rename = dict(zip(op2.variables, (ex.Var(v) for v in op1.variables)))
    records = []
    from .operators import ALPHA_LABELS

    for a in range(op1.d):
        for i in range(op1.n):
            for j in range(op1.n):
                pairs = [
                    ((ALPHA_LABELS[a], "g", i + 1, j + 1),
                     op1.g[a][i][j], op2.g[a][i][j]),
                ] + [
                    ((ALPHA_LABELS[a], "b", i + 1, j + 1, k + 1),
                     op1.b[a][i][j][k], op2.b[a][i][j][k])
                    for k in range(op1.n)
                ]
                for idx, e1, e2 in pairs:
                    residual = e1 - substitute(e2, rename)
                    try:
                        verdict = is_zero(residual, op1.ws, policy)
                    except InconclusiveError:
                        verdict = Verdict(INCONCLUSIVE)
                    records.append(
                        ResidualRecord(label, idx, residual, verdict)
                    )
    return records


def verify_invariance(op: HydroOperator, change: CoordinateChange,
                      policy: ZeroTestPolicy = DEFAULT_POLICY) -> ConditionReport:
    """check_hamiltonian of the pushforward plus the round-trip residuals
    pushforward(pushforward(op, c), c^{-1}) - op."""
    t0 = time.perf_counter()
    pushed = pushforward(op, change)
    report = check_hamiltonian(pushed, policy)
    back = pushforward(pushed, change.inverted())
    records = operator_difference_records(op, back, policy)
    out = ConditionReport(report.records + records,
                          time.perf_counter() - t0)
    return out
