"""JSON file formats: operators, coordinate changes, densities, reduction
candidates.  All expression fields are strings in the expression grammar."""

from __future__ import annotations

import json

from . import expr as ex
from .hamsys import HamiltonianDensity, ReductionCandidate, _clone_with_function
from .operators import ALPHA_LABELS, HydroOperator
from .parser import parse
from .symbols import Workspace
from .transform import CoordinateChange, coordinate_change
from .zerotest import DEFAULT_POLICY


class FileFormatError(Exception):
    pass


def _require(data: dict, key: str, kind=None):
    if key not in data:
        raise FileFormatError(f"missing required key {key!r}")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise FileFormatError(f"key {key!r} has the wrong type")
    return value


def workspace_from_json(data: dict) -> Workspace:
    ws = Workspace()
    ws.add_variables(*_require(data, "variables", list))
    for c in data.get("constants", []):
        ws.add_constants(c)
    for fn in data.get("functions", []):
        ws.add_function(_require(fn, "name", str), _require(fn, "args", list))
    return ws.freeze()


def load_operator(data: dict) -> HydroOperator:
    d = _require(data, "dimension", int)
    n = _require(data, "components", int)
    ws = workspace_from_json(data)
    if len(ws.variables) != n:
        raise FileFormatError("variables list must have `components` entries")
    metrics = _require(data, "metrics", dict)
    bs = _require(data, "b", dict)
    labels = ALPHA_LABELS[:d]
    for block in (metrics, bs):
        extra = set(block) - set(labels)
        if extra:
            raise FileFormatError(
                f"unexpected independent-variable keys {sorted(extra)} "
                f"for dimension {d}"
            )
    g, b = [], []
    for a, label in enumerate(labels):
        gm = metrics.get(label)
        bm = bs.get(label)
        if gm is None or bm is None:
            raise FileFormatError(f"missing {label!r} block")
        if len(gm) != n or any(len(row) != n for row in gm):
            raise FileFormatError(f"metrics[{label!r}] must be {n}x{n}")
        if len(bm) != n or any(
            len(row) != n or any(len(col) != n for col in row) for row in bm
        ):
            raise FileFormatError(f"b[{label!r}] must be {n}x{n}x{n}")
        g.append([[parse(cell, ws) for cell in row] for row in gm])
        b.append([[[parse(cell, ws) for cell in col] for col in row]
                  for row in bm])
    return HydroOperator(ws, d, n, g, b)


def dump_operator(op: HydroOperator) -> dict:
    data = {
        "dimension": op.d,
        "components": op.n,
        "variables": [s.name for s in op.ws.variables[: op.n]],
    }
    if op.ws.constants:
        data["constants"] = [s.name for s in op.ws.constants]
    if op.ws.functions:
        data["functions"] = [
            {"name": fn.name, "args": [a.name for a in fn.args]}
            for fn in op.ws.functions.values()
        ]
    metrics, bs = {}, {}
    for a in range(op.d):
        label = ALPHA_LABELS[a]
        metrics[label] = [
            [ex.print_expr(op.g[a][i][j]) for j in range(op.n)]
            for i in range(op.n)
        ]
        bs[label] = [
            [
                [ex.print_expr(op.b[a][i][j][k]) for k in range(op.n)]
                for j in range(op.n)
            ]
            for i in range(op.n)
        ]
    data["metrics"] = metrics
    data["b"] = bs
    return data


def load_change(data: dict, src_ws: Workspace,
                policy=DEFAULT_POLICY) -> CoordinateChange:
    forward = _require(data, "forward", dict)
    inverse = _require(data, "inverse", dict)
    if set(forward) != {s.name for s in src_ws.variables}:
        raise FileFormatError("forward keys must be the operator variables")
    dst_ws = Workspace()
    dst_ws.add_variables(*inverse.keys())
    if src_ws.constants:
        dst_ws.add_constants(*(s.name for s in src_ws.constants))
    for fn in src_ws.functions.values():
        dst_ws.functions[fn.name] = fn
        dst_ws._by_name[fn.name] = fn
    dst_ws.freeze()
    fwd = {name: parse(text, dst_ws) for name, text in forward.items()}
    inv = {name: parse(text, src_ws) for name, text in inverse.items()}
    return coordinate_change(src_ws, fwd, inv, dst_ws, policy)


def load_density(data: dict, op: HydroOperator) -> HamiltonianDensity:
    text = _require(data, "h", str)
    ws = op.ws
    for fn in data.get("functions", []):
        name = _require(fn, "name", str)
        if ws.lookup(name) is None:
            ws = _clone_with_function(ws, name, _require(fn, "args", list))
    return HamiltonianDensity(parse(text, ws), ws)


def load_candidate(data: dict) -> ReductionCandidate:
    m = _require(data, "m", int)
    if m < 1:
        raise FileFormatError("m must be >= 1")
    ws = Workspace()
    ws.add_variables(*(f"R{i}" for i in range(1, m + 1)))
    for fn in data.get("functions", []):
        ws.add_function(_require(fn, "name", str), _require(fn, "args", list))
    ws.freeze()
    u = [parse(t, ws) for t in _require(data, "u", list)]
    lam = [parse(t, ws) for t in _require(data, "lambda", list)]
    mu = [parse(t, ws) for t in _require(data, "mu", list)]
    if len(lam) != m or len(mu) != m:
        raise FileFormatError("lambda and mu must each list m speeds")
    v = None
    if data.get("v") is not None:
        v = [parse(t, ws) for t in data["v"]]
        if len(v) != m:
            raise FileFormatError("v must list m speeds")
    return ReductionCandidate(ws, m, u, lam, mu, v)


def read_json(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return json.loads(fh.read().decode("utf-8"))
    except OSError as e:
        raise FileFormatError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path} is not valid JSON: {e}")
