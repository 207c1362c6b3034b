"""Scenario files: a 0-cell plus a Q-system candidate, stored as JSON.

Complex entries are ``[re, im]`` pairs and matrices are lists of rows.  A
scenario names its Q-system in one of two ways:

* ``generated``: a dual pair ``(kind, n)`` over the 0-cell, optionally moved
  by a seeded random gauge and with m scaled at some levels;
* ``explicit``: per-level multiplicities of Q, the connection blocks and the
  components of m and i.

Empty blocks may be written as ``[]``; their shape follows from the functors.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterOutOfRange, ParseError, QSplitError, ValidationError
from .funcalc import NatTrans, canonical, functor_apply, functor_compose
from .gen import dual_pair, zero_cell
from .numkit import TolerancePolicy
from .qsys import QSystem, canonicalize, from_dual_pair, identity_qsystem, random_gauge, scale_m
from .uc2 import OneCell, TwoCell, ZeroCell, identity_one_cell, one_cell_compose

MAX_DEPTH = 5
DEFAULT_DEPTH = {"trivial": 3, "amp": 4, "fib": 4, "forced_l": 4}
FORCED_FACTOR = 1.01


@dataclass
class Scenario:
    name: str
    depth: int
    labels: list            # labels[k] per level
    gammas: list            # K integer matrices
    q_source: dict
    tolerances: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)

    def policy(self) -> TolerancePolicy:
        return TolerancePolicy(**{k: float(v) for k, v in self.tolerances.items()})

    def zero_cell(self) -> ZeroCell:
        z = zero_cell([np.array(g, dtype=int) for g in self.gammas], self.labels[0])
        # zero_cell relabels only when the simple count changes; keep the file's labels
        return z if all(c.labels == tuple(lab) for c, lab in zip(z.cats, self.labels)) \
            else _relabel(z, self.labels)

    def qsystem(self) -> QSystem:
        try:
            if self.q_source["type"] == "generated":
                return _generated(self)
            return _explicit(self)
        except QSplitError as exc:
            if isinstance(exc, (ParseError, ValidationError, ParameterOutOfRange)):
                raise
            raise ValidationError(f"q_source does not give a Q-system candidate: {exc}") from exc

    def to_json(self) -> dict:
        out = {"name": self.name, "depth": self.depth,
               "categories": [{"labels": list(lab)} for lab in self.labels],
               "gammas": [np.asarray(g).tolist() for g in self.gammas],
               "q_source": self.q_source}
        if self.tolerances:
            out["tolerances"] = self.tolerances
        if self.expect:
            out["expect"] = self.expect
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def _relabel(z: ZeroCell, labels) -> ZeroCell:
    from .sscat import SCat
    cats = [SCat(tuple(lab), c.name) for c, lab in zip(z.cats, labels)]
    gammas = [canonical(cats[k - 1], cats[k], g.mult, name=g.name) for k, g in enumerate(z.gammas, 1)]
    return ZeroCell(cats, gammas, z.name)


# -- parsing -----------------------------------------------------------------------

def _need(d, key, where, kind=None):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"missing field {where}{key}", field=f"{where}{key}")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ParseError(f"field {where}{key} has the wrong type", field=f"{where}{key}")
    return v


def _int_matrix(raw, where):
    try:
        a = np.array(raw)
    except ValueError as exc:
        raise ParseError(f"{where}: ragged rows", field=where) from exc
    if a.ndim != 2 or a.size == 0 or not np.issubdtype(a.dtype, np.integer):
        raise ParseError(f"{where}: expected a non-empty integer matrix", field=where)
    return a


def complex_matrix(raw, shape, where):
    """Decode rows of [re, im] pairs, checking the expected shape."""
    if shape[0] * shape[1] == 0:
        if raw not in ([], [[]]) and np.asarray(raw).size:
            raise ValidationError(f"{where}: expected an empty block of shape {shape}")
        return np.zeros(shape, complex)
    try:
        a = np.array(raw, dtype=float)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{where}: malformed complex matrix", field=where) from exc
    if a.ndim != 3 or a.shape[2] != 2:
        raise ParseError(f"{where}: entries must be [re, im] pairs", field=where)
    if a.shape[:2] != tuple(shape):
        raise ValidationError(f"{where}: shape {a.shape[:2]} but {tuple(shape)} expected")
    return a[..., 0] + 1j * a[..., 1]


def encode_matrix(m):
    m = np.asarray(m, complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def validate_gammas(gammas, counts):
    for k, g in enumerate(gammas, start=1):
        if g.shape != (counts[k], counts[k - 1]):
            raise ValidationError(f"Γ_{k} has shape {g.shape}, expected {(counts[k], counts[k - 1])}")
        if (g < 0).any():
            raise ValidationError(f"negative entry in Γ_{k}")
        if (g.sum(axis=0) == 0).any():
            raise ValidationError(f"zero column in Γ_{k}")
        if (g.sum(axis=1) == 0).any():
            raise ValidationError(f"zero row in Γ_{k}")


def scenario_from_dict(d) -> Scenario:
    if not isinstance(d, dict):
        raise ParseError("top level must be an object")
    name = _need(d, "name", "", str)
    depth = _need(d, "depth", "", int)
    if not 1 <= depth <= MAX_DEPTH:
        raise ValidationError(f"depth {depth} outside 1..{MAX_DEPTH}")
    cats = _need(d, "categories", "", list)
    if len(cats) != depth + 1:
        raise ValidationError(f"{len(cats)} categories for depth {depth}")
    labels = [list(map(str, _need(c, "labels", f"categories[{k}].", list))) for k, c in enumerate(cats)]
    if any(not lab for lab in labels):
        raise ValidationError("a category without simples")
    graw = _need(d, "gammas", "", list)
    if len(graw) != depth:
        raise ValidationError(f"{len(graw)} Γ matrices for depth {depth}")
    gammas = [_int_matrix(g, f"gammas[{k}]") for k, g in enumerate(graw)]
    validate_gammas(gammas, [len(lab) for lab in labels])
    src = _need(d, "q_source", "", dict)
    kind = _need(src, "type", "q_source.", str)
    if kind not in ("generated", "explicit"):
        raise ValidationError(f"unknown q_source type {kind!r}")
    tols = d.get("tolerances", {})
    try:
        TolerancePolicy(**{k: float(v) for k, v in tols.items()})
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad tolerances: {exc}") from exc
    sc = Scenario(name, depth, labels, [g.tolist() for g in gammas], src, dict(tols),
                  dict(d.get("expect", {})))
    if kind == "explicit":
        sc.qsystem()        # dimension-check every block now
    return sc


def scenario_parse(path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", line=exc.lineno) from exc
    return scenario_from_dict(d)


# -- building the Q-system -------------------------------------------------------------

def _generated(sc: Scenario) -> QSystem:
    src = sc.q_source
    base = sc.zero_cell()
    kind = src.get("construction", "tensor")
    if kind == "identity":
        Q = identity_qsystem(base)
        Q = canonicalize(Q)
    else:
        n = int(src.get("n", 1))
        Q = canonicalize(from_dual_pair(dual_pair(base, kind, n), detect=False))
    seed = int(src.get("seed", 0))
    if seed:
        Q = random_gauge(Q, np.random.default_rng(seed))
    pert = src.get("perturb")
    if pert:
        Q = scale_m(Q, set(pert["levels"]), float(pert["factor"]))
    return Q


def _blocks_for(F, G, raw, where):
    if not isinstance(raw, list) or len(raw) != F.src.n:
        raise ValidationError(f"{where}: one component per simple expected")
    blocks = []
    for s in range(F.src.n):
        x = F.src.simple(s)
        a, b = functor_apply(F, x), functor_apply(G, x)
        if not isinstance(raw[s], list) or len(raw[s]) != F.dst.n:
            raise ValidationError(f"{where}[{s}]: one block per target simple expected")
        blocks.append([complex_matrix(raw[s][t], (b.mult[t], a.mult[t]), f"{where}[{s}][{t}]")
                       for t in range(F.dst.n)])
    return NatTrans.from_blocks(F, G, blocks)


def _explicit(sc: Scenario) -> QSystem:
    src = sc.q_source
    base = sc.zero_cell()
    K = base.depth
    mults = _need(src, "mult", "q_source.", list)
    if len(mults) != K + 1:
        raise ValidationError(f"q_source.mult: {len(mults)} levels for depth {K}")
    lams = []
    for k, raw in enumerate(mults):
        m = _int_matrix(raw, f"q_source.mult[{k}]")
        n = base.cats[k].n
        if m.shape != (n, n) or (m < 0).any():
            raise ValidationError(f"q_source.mult[{k}] must be a non-negative {n}×{n} matrix")
        lams.append(canonical(base.cats[k], base.cats[k], m, name=f"Q{k}"))
    conn_raw = _need(src, "connections", "q_source.", list)
    if len(conn_raw) != K:
        raise ValidationError(f"q_source.connections: {len(conn_raw)} for depth {K}")
    conns = []
    for k in range(1, K + 1):
        g = base.gamma(k)
        conns.append(_blocks_for(functor_compose(g, lams[k - 1]), functor_compose(lams[k], g),
                                 conn_raw[k - 1], f"q_source.connections[{k - 1}]"))
    q = OneCell(base, base, lams, conns, name="Q")
    qq = one_cell_compose(q, q)
    one = identity_one_cell(base)
    cells = {}
    for key, s_cell in (("m", qq), ("i", one)):
        raw = _need(src, key, "q_source.", dict)
        start = _need(raw, "start", f"q_source.{key}.", int)
        comps = _need(raw, "components", f"q_source.{key}.", list)
        if not 0 <= start <= K or len(comps) != K - start + 1:
            raise ValidationError(f"q_source.{key}: components must cover levels start..{K}")
        cells[key] = TwoCell(s_cell, q, start, [
            _blocks_for(s_cell.lam(k), q.lam(k), comps[k - start], f"q_source.{key}.components[{k - start}]")
            for k in range(start, K + 1)])
    return QSystem(base, q, cells["m"], cells["i"], qq, one)


def explicit_source(Q: QSystem) -> dict:
    """Serialize a Q-system whose level functors are canonical."""
    K = Q.depth
    for lam in Q.q.lambdas:
        if lam.kind == "chain":
            raise ValidationError("explicit form needs canonical level functors; canonicalize first")

    def enc(eta):
        return [[encode_matrix(b) for b in c.blocks] for c in eta.comps]

    return {"type": "explicit",
            "mult": [lam.mult.tolist() for lam in Q.q.lambdas],
            "connections": [enc(Q.q.conn(k)) for k in range(1, K + 1)],
            "m": {"start": Q.m.start, "components": [enc(Q.m.at(k)) for k in range(Q.m.start, K + 1)]},
            "i": {"start": Q.i.start, "components": [enc(Q.i.at(k)) for k in range(Q.i.start, K + 1)]}}


def truncate_qsystem(Q: QSystem, depth: int) -> QSystem:
    """Keep levels 0..depth."""
    if not 0 <= depth <= Q.depth:
        raise ParameterOutOfRange(f"depth {depth} outside 0..{Q.depth}")
    if depth == Q.depth:
        return Q
    base = Q.base.truncate(depth)
    q = OneCell(base, base, Q.q.lambdas[:depth + 1], Q.q.conns[:depth], Q.q.name)
    qq = one_cell_compose(q, q)
    one = identity_one_cell(base)
    if Q.m.start > depth or Q.i.start > depth:
        raise ParameterOutOfRange(f"m or i starts above depth {depth}")
    ms = [Q.m.at(k).retype(qq.lam(k), q.lam(k)) for k in range(Q.m.start, depth + 1)]
    is_ = [Q.i.at(k).retype(one.lam(k), q.lam(k)) for k in range(Q.i.start, depth + 1)]
    return QSystem(base, q, TwoCell(qq, q, Q.m.start, ms), TwoCell(one, q, Q.i.start, is_), qq, one)


# -- fixture generation ----------------------------------------------------------------------

_KIND = re.compile(r"^(trivial|fib|amp|forced_l)(?:[(:_]?(\d+)\)?)?$")


def parse_kind(kind: str):
    m = _KIND.match(kind.strip())
    if not m:
        raise ParameterOutOfRange(f"unknown fixture kind {kind!r}")
    base, arg = m.group(1), m.group(2)
    if base in ("trivial", "fib") and arg is not None:
        raise ParameterOutOfRange(f"{base} takes no parameter")
    if base in ("amp", "forced_l") and arg is None:
        raise ParameterOutOfRange(f"{base} needs a parameter, e.g. {base}2")
    return base, None if arg is None else int(arg)


def fixture_generate(kind: str, seed: int = 0, depth: int = None) -> Scenario:
    """Scenario for a named fixture; seed 0 keeps the canonical gauge."""
    base, arg = parse_kind(kind)
    if depth is None:
        # amp3 grows by 9x per level; depth 2 keeps it at desk scale
        depth = 2 if (base, arg) == ("amp", 3) else DEFAULT_DEPTH[base]
    if not 1 <= depth <= MAX_DEPTH:
        raise ParameterOutOfRange(f"depth {depth} outside 1..{MAX_DEPTH}")
    if seed < 0:
        raise ParameterOutOfRange("seed must be non-negative")
    expect = {}
    if base == "trivial":
        gam, src, name = [[1]], {"construction": "identity"}, "trivial"
    elif base == "fib":
        gam, src, name = [[1, 1], [1, 0]], {"construction": "fib", "n": 1}, "fib"
    elif base == "amp":
        if not 1 <= arg <= 3:
            raise ParameterOutOfRange(f"amp(n) needs 1 ≤ n ≤ 3, got {arg}")
        gam, src, name = [[arg]], {"construction": "tensor", "n": arg}, f"amp{arg}"
    else:
        if not 0 <= arg <= 2:
            raise ParameterOutOfRange(f"forced_l(l0) needs 0 ≤ l0 ≤ 2, got {arg}")
        if depth < arg + 1:
            raise ParameterOutOfRange(f"forced_l({arg}) needs depth ≥ {arg + 1}")
        gam, src, name = [[2]], {"construction": "tensor", "n": 2}, f"forced_l{arg}"
        if arg:
            src["perturb"] = {"levels": list(range(arg)), "factor": FORCED_FACTOR}
        expect["l"] = arg
    if base != "forced_l":
        expect["l"] = 0
    src = {"type": "generated", **src, "seed": int(seed)}
    labels = [[f"s{i}" for i in range(len(gam[0]))] for _ in range(depth + 1)]
    return Scenario(name, depth, labels, [gam] * depth, src, {}, expect)
