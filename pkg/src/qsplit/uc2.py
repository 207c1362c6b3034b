"""Truncated unitary-connection 2-category.

A 0-cell is a Bratteli sequence M_0 -> ... -> M_K, a 1-cell a level-wise
functor sequence with unitary connections, and a 2-cell a sequence of
natural transformations from a start level on, compatible with the
connections.  Tensor products of 1-cells are written right to left:
``compose(O, L)`` means "L first, then O".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LevelOutOfRange, NoSolution, StructuralMismatch
from .funcalc import (Functor, NatTrans, bifaithful_check, functor_apply,
                      functor_compose, identity_functor, nat_distance, nat_star,
                      naturality_residual, unitarity_residual, vertical, whisker_left,
                      whisker_right)
from .numkit import DEFAULT, TolerancePolicy, dag, opnorm
from .sscat import Mor, simple_resolution


@dataclass(frozen=True, eq=False)
class ZeroCell:
    cats: tuple
    gammas: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cats", tuple(self.cats))
        object.__setattr__(self, "gammas", tuple(self.gammas))
        if len(self.gammas) != len(self.cats) - 1:
            raise StructuralMismatch("need one Γ per consecutive pair of levels")
        for k, g in enumerate(self.gammas, start=1):
            if g.src != self.cats[k - 1] or g.dst != self.cats[k]:
                raise StructuralMismatch(f"Γ_{k} endpoints do not match the level categories")

    @property
    def depth(self):
        return len(self.cats) - 1

    def gamma(self, k) -> Functor:
        if not 1 <= k <= self.depth:
            raise LevelOutOfRange(f"Γ_{k} outside 1..{self.depth}")
        return self.gammas[k - 1]

    def bifaithful(self):
        return all(bifaithful_check(g) for g in self.gammas)

    def truncate(self, depth):
        return ZeroCell(self.cats[:depth + 1], self.gammas[:depth], self.name)


@dataclass(frozen=True, eq=False)
class OneCell:
    src: ZeroCell
    dst: ZeroCell
    lambdas: tuple
    conns: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(self.lambdas))
        object.__setattr__(self, "conns", tuple(self.conns))
        K = self.src.depth
        if self.dst.depth != K or len(self.lambdas) != K + 1 or len(self.conns) != K:
            raise StructuralMismatch("depths of 1-cell data disagree")
        for k, lam in enumerate(self.lambdas):
            if lam.src != self.src.cats[k] or lam.dst != self.dst.cats[k]:
                raise StructuralMismatch(f"Λ_{k} endpoints do not match")
        for k in range(1, K + 1):
            w = self.conns[k - 1]
            want_src = functor_compose(self.dst.gamma(k), self.lambdas[k - 1])
            want_dst = functor_compose(self.lambdas[k], self.src.gamma(k))
            if not (w.src.same_as(want_src) and w.dst.same_as(want_dst)):
                raise StructuralMismatch(f"W_{k} has endpoints {w!r}")

    @property
    def depth(self):
        return self.src.depth

    def lam(self, k) -> Functor:
        if not 0 <= k <= self.depth:
            raise LevelOutOfRange(f"level {k} outside 0..{self.depth}")
        return self.lambdas[k]

    def conn(self, k) -> NatTrans:
        if not 1 <= k <= self.depth:
            raise LevelOutOfRange(f"W_{k} outside 1..{self.depth}")
        return self.conns[k - 1]


def same_cell(a: OneCell, b: OneCell) -> bool:
    if a is b:
        return True
    return (a.src is b.src and a.dst is b.dst
            and all(x.same_as(y) for x, y in zip(a.lambdas, b.lambdas)))


def identity_one_cell(z: ZeroCell) -> OneCell:
    lams = [identity_functor(c) for c in z.cats]
    conns = [NatTrans.identity(g) for g in z.gammas]
    return OneCell(z, z, lams, conns, name=f"1[{z.name}]")


def one_cell_check(c: OneCell, tol: TolerancePolicy = DEFAULT, n_tests=20):
    levels = []
    for k in range(1, c.depth + 1):
        w = c.conn(k)
        levels.append({"k": k, "unitarity": unitarity_residual(w),
                       "naturality": naturality_residual(w, n_tests=n_tests, seed=k)})
    faithful = all(bifaithful_check(lam) for lam in c.lambdas)
    ok = faithful and all(max(l["unitarity"], l["naturality"]) <= tol.eps_num for l in levels)
    return {"levels": levels, "bifaithful": faithful, "pass": ok}


def one_cell_compose(o: OneCell, l: OneCell, name="") -> OneCell:
    """``O ⊠ L``: L first.  Connection ``(Ω_k W^L_k) ∘ (W^O_k L_{k-1})``."""
    if l.dst is not o.src:
        raise StructuralMismatch("1-cells are not composable")
    lams = [functor_compose(o.lam(k), l.lam(k)) for k in range(l.depth + 1)]
    conns = []
    for k in range(1, l.depth + 1):
        upper = whisker_right(o.conn(k), l.lam(k - 1))
        lower = whisker_left(o.lam(k), l.conn(k))
        conns.append(vertical(lower, upper))
    return OneCell(l.src, o.dst, lams, conns, name=name or f"{o.name}⊠{l.name}")


def _endpoint_check(eta, src, dst, k):
    if not (eta.src.same_as(src.lam(k)) and eta.dst.same_as(dst.lam(k))):
        raise StructuralMismatch(f"level-{k} component has wrong endpoints: {eta!r}")


def _exchange_sides(eta_k, eta_k1, src: OneCell, dst: OneCell, k):
    delta = src.dst.gamma(k + 1)
    gamma = src.src.gamma(k + 1)
    lhs = vertical(dst.conn(k + 1), whisker_left(delta, eta_k))
    rhs = vertical(whisker_right(eta_k1, gamma), src.conn(k + 1))
    return lhs, rhs


def exchange_residual(eta_k: NatTrans, eta_k1: NatTrans, src: OneCell, dst: OneCell, k: int) -> float:
    if not 0 <= k < src.depth:
        raise LevelOutOfRange(f"exchange needs levels {k} and {k + 1} within 0..{src.depth}")
    _endpoint_check(eta_k, src, dst, k)
    _endpoint_check(eta_k1, src, dst, k + 1)
    lhs, rhs = _exchange_sides(eta_k, eta_k1, src, dst, k)
    return max(opnorm(a - b) for m, n in zip(lhs.comps, rhs.comps)
               for a, b in zip(m.blocks, n.blocks)) if lhs.comps else 0.0


def _extract_at_simples(target, lam: Functor, om: Functor, gamma: Functor):
    """Average ``Ω(u)* Y_s Λ(u)`` over coordinate isometries ``u: t -> Γ(s)``."""
    src_cat, dst_cat = gamma.src, gamma.dst
    acc = [None] * dst_cat.n
    cnt = [0] * dst_cat.n
    for s in range(src_cat.n):
        y = target.comps[s]
        for (t, _), u in simple_resolution(functor_apply(gamma, src_cat.simple(s))):
            piece = [dag(a) @ b @ c for a, b, c in
                     zip(functor_apply(om, u).blocks, y.blocks, functor_apply(lam, u).blocks)]
            acc[t] = piece if acc[t] is None else [p + q for p, q in zip(acc[t], piece)]
            cnt[t] += 1
    comps = []
    for t in range(dst_cat.n):
        if not cnt[t]:
            raise NoSolution(f"simple {t} is not reached by Γ (not bi-faithful)")
        x = dst_cat.simple(t)
        comps.append(Mor(functor_apply(lam, x), functor_apply(om, x), [p / cnt[t] for p in acc[t]]))
    return NatTrans(lam, om, comps)


def exchange_transport(eta_k: NatTrans, src: OneCell, dst: OneCell, k: int,
                       tol: TolerancePolicy = DEFAULT, return_residual=False, strict=True):
    """Solve the exchange relation for η_{k+1} given η_k.

    The components at level k+1 are read off from
    ``W^Ω (Δ η_k) W^Λ*`` on the coordinate pieces of Γ(s); the average over
    all occurrences is the least-squares solution.
    """
    if not 0 <= k < src.depth:
        raise LevelOutOfRange(f"cannot transport from level {k}")
    _endpoint_check(eta_k, src, dst, k)
    delta = src.dst.gamma(k + 1)
    target = vertical(vertical(dst.conn(k + 1), whisker_left(delta, eta_k)), nat_star(src.conn(k + 1)))
    eta = _extract_at_simples(target, src.lam(k + 1), dst.lam(k + 1), src.src.gamma(k + 1))
    res = exchange_residual(eta_k, eta, src, dst, k)
    if strict and res > tol.eps_num * max(1.0, eta_k.norm()):
        raise NoSolution(f"exchange residual {res:.3e} at level {k}")
    return (eta, res) if return_residual else eta


def exchange_transport_down(eta_k1: NatTrans, src: OneCell, dst: OneCell, k: int,
                            tol: TolerancePolicy = DEFAULT, return_residual=False, strict=True):
    """Solve for η_k given η_{k+1}: invert ``Δ`` on ``W^Ω* (η_{k+1} Γ) W^Λ``."""
    if not 0 <= k < src.depth:
        raise LevelOutOfRange(f"cannot transport down to level {k}")
    _endpoint_check(eta_k1, src, dst, k + 1)
    delta = src.dst.gamma(k + 1)
    gamma = src.src.gamma(k + 1)
    z = vertical(vertical(nat_star(dst.conn(k + 1)), whisker_right(eta_k1, gamma)), src.conn(k + 1))
    lam, om = src.lam(k), dst.lam(k)
    comps = []
    for s in range(gamma.src.n):
        x = gamma.src.simple(s)
        lx, ox = functor_apply(lam, x), functor_apply(om, x)
        blocks = [np.zeros((ox.mult[j], lx.mult[j]), complex) for j in range(lam.dst.n)]
        res_l = simple_resolution(lx)
        res_o = simple_resolution(ox)
        dl = {key: functor_apply(delta, u) for key, u in res_l}
        for (j, a), v in res_o:
            dv = functor_apply(delta, v)
            for (j2, b), _ in res_l:
                if j2 != j:
                    continue
                du = dl[(j, b)]
                tr = sum(np.trace(dag(p) @ q @ r) for p, q, r in zip(dv.blocks, z.comps[s].blocks, du.blocks))
                blocks[j][a, b] = tr / max(sum(delta.mult[:, j]), 1)
        comps.append(Mor(lx, ox, blocks))
    eta = NatTrans(lam, om, comps)
    res = exchange_residual(eta, eta_k1, src, dst, k)
    if strict and res > tol.eps_num * max(1.0, eta_k1.norm()):
        raise NoSolution(f"exchange residual {res:.3e} at level {k}")
    return (eta, res) if return_residual else eta


class TwoCell:
    """Components ``comps[k - start]`` for levels start..K."""

    __slots__ = ("src", "dst", "start", "comps")

    def __init__(self, src: OneCell, dst: OneCell, start: int, comps):
        comps = tuple(comps)
        if src.src is not dst.src or src.dst is not dst.dst:
            raise StructuralMismatch("2-cell between 1-cells of different type")
        if len(comps) != src.depth - start + 1 or start < 0:
            raise StructuralMismatch("need one component per level start..K")
        for k, eta in enumerate(comps, start=start):
            _endpoint_check(eta, src, dst, k)
        self.src, self.dst, self.start, self.comps = src, dst, start, comps

    @property
    def depth(self):
        return self.src.depth

    def at(self, k) -> NatTrans:
        if not self.start <= k <= self.depth:
            raise LevelOutOfRange(f"level {k} outside {self.start}..{self.depth}")
        return self.comps[k - self.start]

    def exchange_residuals(self):
        return [exchange_residual(self.at(k), self.at(k + 1), self.src, self.dst, k)
                for k in range(self.start, self.depth)]

    def restrict(self, start):
        return TwoCell(self.src, self.dst, start, self.comps[start - self.start:])

    @classmethod
    def identity(cls, c: OneCell, start=0):
        return cls(c, c, start, [NatTrans.identity(c.lam(k)) for k in range(start, c.depth + 1)])

    @classmethod
    def transported(cls, eta0: NatTrans, src: OneCell, dst: OneCell, start: int, **kw):
        comps = [eta0]
        for k in range(start, src.depth):
            comps.append(exchange_transport(comps[-1], src, dst, k, **kw))
        return cls(src, dst, start, comps)


def two_cell_vertical(theta: TwoCell, eta: TwoCell) -> TwoCell:
    if not same_cell(eta.dst, theta.src):
        raise StructuralMismatch("2-cells are not vertically composable")
    n = max(theta.start, eta.start)
    return TwoCell(eta.src, theta.dst, n,
                   [vertical(theta.at(k), eta.at(k)) for k in range(n, eta.depth + 1)])


def two_cell_horizontal(theta: TwoCell, eta: TwoCell, src=None, dst=None) -> TwoCell:
    """``θ ⊠ η`` with η: Λ→Ω (a→b), θ: Λ'→Ω' (b→c); level k is ``(θ_k Ω_k)(Λ'_k η_k)``.

    ``src``/``dst`` may pass precomputed composite 1-cells.
    """
    src = src or one_cell_compose(theta.src, eta.src)
    dst = dst or one_cell_compose(theta.dst, eta.dst)
    n = max(theta.start, eta.start)
    comps = []
    for k in range(n, eta.depth + 1):
        left = whisker_left(theta.src.lam(k), eta.at(k))
        right = whisker_right(theta.at(k), eta.dst.lam(k))
        comps.append(vertical(right, left).retype(src.lam(k), dst.lam(k)))
    return TwoCell(src, dst, n, comps)


def two_cell_whisker_left(o: OneCell, eta: TwoCell, src=None, dst=None) -> TwoCell:
    return two_cell_horizontal(TwoCell.identity(o), eta, src, dst)


def two_cell_whisker_right(eta: TwoCell, l: OneCell, src=None, dst=None) -> TwoCell:
    return two_cell_horizontal(eta, TwoCell.identity(l), src, dst)


def two_cell_star(eta: TwoCell) -> TwoCell:
    return TwoCell(eta.dst, eta.src, eta.start, [nat_star(c) for c in eta.comps])


def equal_eventually(a: TwoCell, b: TwoCell, tol: TolerancePolicy = DEFAULT) -> bool:
    if not (same_cell(a.src, b.src) and same_cell(a.dst, b.dst)):
        raise StructuralMismatch("2-cells have different endpoints")
    n = max(a.start, b.start)
    return all(nat_distance(a.at(k), b.at(k)) <= tol.eps_num for k in range(n, a.depth + 1))


def two_cell_ops(op, *args, **kw):
    table = {"vertical": two_cell_vertical, "horizontal": two_cell_horizontal,
             "star": two_cell_star, "equal_eventually": equal_eventually}
    if op not in table:
        raise ValueError(f"unknown 2-cell op {op!r}")
    return table[op](*args, **kw)


@dataclass(frozen=True, eq=False)
class DualityData:
    """``cell P: a -> b`` with dual ``P̄``; ``ev: P̄P => 1_a``, ``coev: 1_b => PP̄``."""

    cell: OneCell
    dual: OneCell
    ev: TwoCell
    coev: TwoCell


def zigzag_residuals(d: DualityData, k: int):
    """Return ``(‖(P ev)(coev P) − 1‖, ‖(ev P̄)(P̄ coev) − 1‖)`` at level k."""
    p, pb = d.cell.lam(k), d.dual.lam(k)
    ev, coev = d.ev.at(k), d.coev.at(k)
    one = vertical(whisker_left(p, ev), whisker_right(coev, p))
    two = vertical(whisker_right(ev, pb), whisker_left(pb, coev))
    r1 = max(opnorm(b - np.eye(b.shape[0])) for c in one.comps for b in c.blocks if b.size) \
        if any(b.size for c in one.comps for b in c.blocks) else 0.0
    r2 = max(opnorm(b - np.eye(b.shape[0])) for c in two.comps for b in c.blocks if b.size) \
        if any(b.size for c in two.comps for b in c.blocks) else 0.0
    return r1, r2


def separability_residual(d: DualityData, k: int) -> float:
    ev = d.ev.at(k)
    eve = vertical(ev, nat_star(ev))
    return max((opnorm(b - np.eye(b.shape[0])) for c in eve.comps for b in c.blocks if b.size),
               default=0.0)


def duality_check(d: DualityData, tol: TolerancePolicy = DEFAULT, start=None):
    start = max(d.ev.start, d.coev.start) if start is None else start
    levels = []
    for k in range(start, d.cell.depth + 1):
        z1, z2 = zigzag_residuals(d, k)
        levels.append({"k": k, "zigzag_cell": z1, "zigzag_dual": z2,
                       "separability": separability_residual(d, k)})
    ex_ev = max(d.ev.restrict(start).exchange_residuals(), default=0.0)
    ex_coev = max(d.coev.restrict(start).exchange_residuals(), default=0.0)
    worst = max([ex_ev, ex_coev] + [max(l["zigzag_cell"], l["zigzag_dual"], l["separability"])
                                    for l in levels])
    return {"levels": levels, "exchange_ev": ex_ev, "exchange_coev": ex_coev,
            "worst": worst, "pass": worst <= tol.eps_num}
