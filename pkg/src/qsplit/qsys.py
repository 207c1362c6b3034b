"""Q-systems in the truncated 2-category: axioms, stability level, d_Q."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import AxiomFailure, LevelOutOfRange, NeverStable, NotSeparable
from .funcalc import (Functor, NatTrans, canonical, functor_apply, identity_functor,
                      nat_distance, nat_star, solve_natural_unitary, vertical,
                      whisker_left, whisker_right)
from .numkit import DEFAULT, TolerancePolicy, apply_spectral_function, min_eig, opnorm
from .sscat import Mor
from .uc2 import (DualityData, OneCell, TwoCell, ZeroCell, exchange_residual,
                  identity_one_cell, one_cell_compose, separability_residual)


class QSystem:
    """``q`` is an endo 1-cell of ``base``; ``m: q⊠q => q`` and ``i: 1 => q``."""

    def __init__(self, base: ZeroCell, q: OneCell, m: TwoCell, i: TwoCell, qq: OneCell = None,
                 one: OneCell = None, l=None):
        if q.src is not base or q.dst is not base:
            raise ValueError("q must be an endo 1-cell of the base")
        self.base, self.q, self.m, self.i = base, q, m, i
        self.qq = qq or m.src
        self.one = one or i.src
        self.l = l

    @property
    def depth(self):
        return self.base.depth

    def Q(self, k) -> Functor:
        return self.q.lam(k)

    def with_level(self, tol=DEFAULT):
        self.l = stability_level(self, tol)
        return self


class Residuals(NamedTuple):
    associativity: float
    unitality: float
    frobenius: float
    separability: float

    def worst(self):
        return max(self)


def _id(F):
    return NatTrans.identity(F)


def axioms_check(Q: QSystem, k: int) -> Residuals:
    if not 0 <= k <= Q.depth:
        raise LevelOutOfRange(f"level {k} outside 0..{Q.depth}")
    F = Q.Q(k)
    m, i = Q.m.at(k), Q.i.at(k)
    ms = nat_star(m)
    left = vertical(m, whisker_right(m, F))
    right = vertical(m, whisker_left(F, m)).retype(left.src, left.dst)
    assoc = nat_distance(left, right)
    idq = _id(F)
    u1 = vertical(m, whisker_right(i, F)).retype(F, F)
    u2 = vertical(m, whisker_left(F, i)).retype(F, F)
    unit = max(nat_distance(u1, idq), nat_distance(u2, idq))
    mm = vertical(ms, m)
    f1 = vertical(whisker_left(F, m), whisker_right(ms, F)).retype(mm.src, mm.dst)
    f2 = vertical(whisker_right(m, F), whisker_left(F, ms)).retype(mm.src, mm.dst)
    frob = max(nat_distance(f1, mm), nat_distance(f2, mm))
    sep = nat_distance(vertical(m, ms), idq)
    return Residuals(assoc, unit, frob, sep)


def _level_row(Q: QSystem, k: int, tol: TolerancePolicy):
    r = axioms_check(Q, k)
    row = {"k": k, "axioms": r._asdict()}
    if k < Q.depth:
        row["exchange_m"] = exchange_residual(Q.m.at(k), Q.m.at(k + 1), Q.qq, Q.q, k)
        row["exchange_i"] = exchange_residual(Q.i.at(k), Q.i.at(k + 1), Q.one, Q.q, k)
    worst = max([r.worst(), row.get("exchange_m", 0.0), row.get("exchange_i", 0.0)])
    row["pass"] = worst <= tol.eps_num
    return row


def level_report(Q: QSystem, tol: TolerancePolicy = DEFAULT, jobs: int = 1):
    """Per-level axiom residuals and exchange residuals of (m_k, m_{k+1}), (i_k, i_{k+1}).

    ``jobs > 1`` spreads the levels over threads; rows stay in level order.
    """
    ks = range(max(Q.m.start, Q.i.start), Q.depth + 1)
    if jobs <= 1:
        return [_level_row(Q, k, tol) for k in ks]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda k: _level_row(Q, k, tol), ks))


def stability_level(Q: QSystem, tol: TolerancePolicy = DEFAULT, rows=None) -> int:
    rows = rows if rows is not None else level_report(Q, tol)
    l = None
    for row in reversed(rows):
        if not row["pass"]:
            break
        l = row["k"]
    if l is None or l > Q.depth - 1:
        raise NeverStable("no level from which the axioms and exchange relations hold")
    return l


class DqData(NamedTuple):
    k: int
    d: np.ndarray
    d_inv: np.ndarray
    s: np.ndarray
    norm: float
    checks: dict
    classification: str


def _scalar_nat(F: Functor, values) -> NatTrans:
    """Element of End(Id) with one scalar per simple."""
    comps = []
    for s, v in enumerate(values):
        x = F.src.simple(s)
        comps.append(Mor(x, x, [np.array([[v]]) if t == s else np.zeros((0, 0))
                                for t in range(F.src.n)]))
    return NatTrans(F, F, comps)


def dq_calculus(Q: QSystem, k: int, tol: TolerancePolicy = DEFAULT) -> DqData:
    r = axioms_check(Q, k)
    if r.worst() > tol.eps_num:
        raise AxiomFailure(f"axioms fail at level {k}: {r}")
    i = Q.i.at(k)
    one = i.src
    dnat = vertical(nat_star(i), i)
    d = np.array([dnat.comps[s].blocks[s][0, 0].real for s in range(one.src.n)])
    d_inv = np.diag(apply_spectral_function(np.diag(d), "pseudo_inverse", tol)).real
    s = np.diag(apply_spectral_function(np.diag(d), "support_projection", tol)).real
    norm = float(np.abs(d).max())
    F = Q.Q(k)
    m = Q.m.at(k)
    ev = vertical(nat_star(i), m)              # QQ => 1, the cap with a unit dot
    cap_cup = vertical(nat_star(ev), ev)       # coev_Q ∘ ev_Q on QQ
    dn = _scalar_nat(identity_functor(one.src), d)
    middle = whisker_right(dn, Q.qq.lam(k))    # d_Q beside the two Q strands
    cap_cup_gap = min(min_eig(b1 - b0) for c1, c0 in zip(middle.comps, cap_cup.comps)
                   for b1, b0 in zip(c1.blocks, c0.blocks) if b0.size)
    norm_gap = min(min_eig(norm * np.eye(b.shape[0]) - b) for c in middle.comps
                   for b in c.blocks if b.size)
    qd = whisker_left(F, dn)                   # d_Q on the right of one Q strand
    qd_gap = min(min_eig(norm * np.eye(b.shape[0]) - b) for c in qd.comps for b in c.blocks if b.size)
    ii = vertical(i, nat_star(i))
    unit_gap = min(min_eig(norm * np.eye(b.shape[0]) - b) for c in ii.comps for b in c.blocks if b.size)
    sn = _scalar_nat(identity_functor(one.src), s)
    qs = whisker_left(F, sn)
    qs_gap = max((opnorm(b - np.eye(b.shape[0])) for c in qs.comps for b in c.blocks if b.size),
              default=0.0)
    checks = {
        "d_times_dinv_minus_s": float(np.abs(d * d_inv - s).max()),
        "s_idempotent": float(np.abs(s * s - s).max()),
        "d_min": float(d.min()),
        "cap_cup_le_d": cap_cup_gap,
        "d_le_norm": norm_gap,
        "Q_s_eq_id": qs_gap,
        "Q_d_le_norm": qd_gap,
        "i_istar_le_norm": unit_gap,
    }
    tau = tol.tau_spec(norm)
    if (d > tau).all():
        cls = "non-degenerate"
    elif np.abs(d * d - d).max() <= tol.eps_num:
        cls = "summand"
    else:
        cls = "degenerate support"
    return DqData(k, d, d_inv, s, norm, checks, cls)


def self_duality_residual(Q: QSystem, k: int) -> float:
    """Zig-zag for ev_Q = i*m and coev_Q = m*i on one Q strand."""
    F = Q.Q(k)
    m, i = Q.m.at(k), Q.i.at(k)
    ev = vertical(nat_star(i), m)
    coev = nat_star(ev)
    z1 = vertical(whisker_left(F, ev), whisker_right(coev, F)).retype(F, F)
    z2 = vertical(whisker_right(ev, F), whisker_left(F, coev)).retype(F, F)
    idq = _id(F)
    return max(nat_distance(z1, idq), nat_distance(z2, idq))


def from_dual_pair(d: DualityData, tol: TolerancePolicy = DEFAULT, detect=True) -> QSystem:
    """Q = P ⊠ P̄ with m = P ev P̄ and i = coev, where P = d.cell."""
    start = max(d.ev.start, d.coev.start)
    for k in range(start, d.cell.depth + 1):
        r = separability_residual(d, k)
        if r > tol.eps_num:
            raise NotSeparable(f"ev ev* differs from the identity by {r:.3e} at level {k}")
    x, xb = d.cell, d.dual
    base = x.dst
    q = one_cell_compose(x, xb, name=f"{x.name}⊠{xb.name}")
    qq = one_cell_compose(q, q)
    one = identity_one_cell(base)
    ms, is_ = [], []
    for k in range(start, x.depth + 1):
        mk = whisker_left(x.lam(k), whisker_right(d.ev.at(k), xb.lam(k)))
        ms.append(mk.retype(qq.lam(k), q.lam(k)))
        is_.append(d.coev.at(k).retype(one.lam(k), q.lam(k)))
    Q = QSystem(base, q, TwoCell(qq, q, start, ms), TwoCell(one, q, start, is_), qq, one)
    if detect:
        Q.l = stability_level(Q, tol)
    return Q


def gauge(Q: QSystem, us, lams=None) -> QSystem:
    """Transport along level-wise unitaries ``us[k]: Q_k => Q'_k``.

    The new connection is ``(u_k Γ) W_k (Γ u_{k-1}*)``; m and i follow.
    Without ``lams`` the functors of Q are kept (a gauge change).
    """
    base, q = Q.base, Q.q
    K = Q.depth
    lams = tuple(lams) if lams is not None else q.lambdas
    conns = []
    for k in range(1, K + 1):
        g = base.gamma(k)
        a = whisker_left(g, nat_star(us[k - 1]))
        b = whisker_right(us[k], g)
        conns.append(vertical(b, vertical(q.conn(k), a)))
    qn = OneCell(base, base, lams, conns, name=q.name + "'")
    qq = one_cell_compose(qn, qn)
    one = identity_one_cell(base)
    ms, is_ = [], []
    for k in range(Q.m.start, K + 1):
        u = us[k]
        uu = vertical(whisker_right(u, lams[k]), whisker_left(q.lam(k), u))
        ms.append(vertical(u, vertical(Q.m.at(k), nat_star(uu))).retype(qq.lam(k), lams[k]))
    for k in range(Q.i.start, K + 1):
        is_.append(vertical(us[k], Q.i.at(k)).retype(one.lam(k), lams[k]))
    return QSystem(base, qn, TwoCell(qq, qn, Q.m.start, ms), TwoCell(one, qn, Q.i.start, is_),
                   qq, one, Q.l)


def canonicalize(Q: QSystem, prefix="Q") -> QSystem:
    """Replace chain functors Q_k by canonical ones with the same mult."""
    lams = [canonical(f.src, f.dst, f.mult, name=f"{prefix}{k}") for k, f in enumerate(Q.q.lambdas)]
    us = [solve_natural_unitary(f, g) for f, g in zip(Q.q.lambdas, lams)]
    return gauge(Q, us, lams)


def random_gauge(Q: QSystem, rng) -> QSystem:
    """Conjugate by seeded random unitaries at every level."""
    from .numkit import random_unitary
    us = []
    for k in range(Q.depth + 1):
        F = Q.Q(k)
        comps = []
        for s in range(F.src.n):
            y = functor_apply(F, F.src.simple(s))
            comps.append(Mor(y, y, [random_unitary(mlt, rng) for mlt in y.mult]))
        us.append(NatTrans(F, F, comps))
    return gauge(Q, us)


def identity_qsystem(base: ZeroCell) -> QSystem:
    one = identity_one_cell(base)
    qq = one_cell_compose(one, one)
    m = TwoCell(qq, one, 0, [NatTrans.identity(f) for f in one.lambdas])
    i = TwoCell(one, one, 0, [NatTrans.identity(f) for f in one.lambdas])
    return QSystem(base, one, m, i, qq, one, 0)


def scale_m(Q: QSystem, levels, factor) -> QSystem:
    """Copy of Q with m_k scaled at the given levels."""
    ms = [Q.m.at(k).scale(factor) if k in levels else Q.m.at(k)
          for k in range(Q.m.start, Q.depth + 1)]
    return QSystem(Q.base, Q.q, TwoCell(Q.qq, Q.q, Q.m.start, ms), Q.i, Q.qq, Q.one, None)
