"""Generated Q-systems: Q = X ⊠ X̄ for an explicit dualizable 1-cell X.

Two shapes of X over a 0-cell with constant Γ:

* ``tensor``: X = n·Id with the tensor-flip connection;
* ``fib``: X = Γ on the golden-mean graph, with the connection given by the
  Fibonacci F-matrix on the two-path block and signs elsewhere.

The dual X̄ carries the mate connection, and ev/coev are the standard
weighted cups and caps.  Weights come from a Perron-Frobenius vector so that
ev ev* = 1.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterOutOfRange
from .funcalc import (NatTrans, canonical, chain, functor_apply, nat_star, vertical, whisker_left,
                      whisker_right)
from .sscat import SCat
from .uc2 import DualityData, OneCell, TwoCell, ZeroCell, identity_one_cell, one_cell_compose


def zero_cell(gamma_mults, labels=None, name="M") -> ZeroCell:
    """0-cell with ``len(gamma_mults)`` levels above M_0."""
    n0 = np.asarray(gamma_mults[0]).shape[1]
    labels = labels or [f"s{i}" for i in range(n0)]
    cats = [SCat(tuple(labels), f"{name}{0}")]
    gammas = []
    for k, g in enumerate(gamma_mults, start=1):
        g = np.asarray(g, dtype=int)
        lab = labels if g.shape[0] == len(labels) else [f"s{i}" for i in range(g.shape[0])]
        cats.append(SCat(tuple(lab), f"{name}{k}"))
        gammas.append(canonical(cats[k - 1], cats[k], g, name=f"Γ{k}"))
    return ZeroCell(cats, gammas, name=name)


FIB = np.array([[1, 1], [1, 0]])
PHI = (1 + 5 ** 0.5) / 2


def _fib_block(s, t, dim):
    # bi-unitary square for X = Γ on the golden-mean graph; paths are indexed
    # by the middle vertex, so ΓX and XΓ share one basis
    if dim == 2:
        return np.array([[1 / PHI, PHI ** -0.5], [PHI ** -0.5, -1 / PHI]])
    return np.array([[-1.0 if (s, t) == (1, 1) else 1.0]])


def _perron(mat):
    w, v = np.linalg.eig(np.asarray(mat, dtype=float))
    j = int(np.argmax(w.real))
    vec = np.abs(v[:, j].real)
    return float(w[j].real), vec / vec.max()


def _pair_index(F_outer, F_inner, s, t):
    """Positions in block t of (F_outer ∘ F_inner)(s), keyed by (middle, outer copy, inner copy)."""
    pos, p = {}, 0
    for j in range(F_inner.dst.n):
        for b in range(F_outer.mult[t, j]):
            for a in range(F_inner.mult[j, s]):
                pos[(j, b, a)] = p
                p += 1
    return pos


def dual_pair(base: ZeroCell, kind="tensor", n=1) -> DualityData:
    K = base.depth
    cats = base.cats
    if kind == "tensor":
        xm = [np.eye(c.n, dtype=int) * n for c in cats]
        weights = [np.full((c.n, c.n), 1 / np.sqrt(n)) for c in cats]
    elif kind == "fib":
        g0 = base.gamma(1).mult
        if any(not np.array_equal(g.mult, FIB) for g in base.gammas):
            raise ParameterOutOfRange("kind 'fib' needs Γ = [[1,1],[1,0]] at every level")
        lam, mu = _perron(g0.T)
        xm = [g0.copy() for _ in cats]
        c = np.sqrt(mu[None, :] / (lam * mu[:, None]))   # c[s, t]
        weights = [c for _ in cats]
    else:
        raise ParameterOutOfRange(f"unknown dual-pair kind {kind!r}")

    X = [canonical(cats[k], cats[k], xm[k], name=f"X{k}") for k in range(K + 1)]
    Xb = [canonical(cats[k], cats[k], xm[k].T, name=f"X̄{k}") for k in range(K + 1)]

    conns = []
    for k in range(1, K + 1):
        g = base.gamma(k)
        src = whisker_right(NatTrans.identity(g), X[k - 1]).src    # Γ∘X
        dst = whisker_right(NatTrans.identity(X[k]), g).src         # X∘Γ
        blocks = []
        for s in range(cats[k - 1].n):
            a_pos = [_pair_index(g, X[k - 1], s, t) for t in range(cats[k].n)]
            b_pos = [_pair_index(X[k], g, s, t) for t in range(cats[k].n)]
            row = []
            for t in range(cats[k].n):
                dim = len(a_pos[t])
                mat = np.zeros((dim, dim))
                if kind == "tensor":
                    for (j, cg, cx), p in a_pos[t].items():
                        mat[b_pos[t][(t, cx, cg)], p] = 1.0
                else:
                    mat = _fib_block(s, t, dim)
                row.append(mat)
            blocks.append(row)
        conns.append(NatTrans.from_blocks(src, dst, blocks))
    xcell = OneCell(base, base, X, conns, name="X")

    # ev: X̄X => 1 at s, weight c[s, t] on the diagonal pairs (t, a, a)
    one = identity_one_cell(base)
    evs, coevs = [], []
    for k in range(K + 1):
        c = weights[k]
        xbx = whisker_right(NatTrans.identity(Xb[k]), X[k]).src
        xxb = whisker_right(NatTrans.identity(X[k]), Xb[k]).src
        ev_blocks, coev_blocks = [], []
        n_s = cats[k].n
        for s in range(n_s):
            pos = _pair_index(Xb[k], X[k], s, s)
            vec = np.zeros((1, len(pos)))
            for (t, b, a), p in pos.items():
                if a == b:
                    vec[0, p] = c[s, t]
            ev_blocks.append([vec if t == s else np.zeros((0, functor_apply(xbx, cats[k].simple(s)).mult[t]))
                              for t in range(n_s)])
            pos = _pair_index(X[k], Xb[k], s, s)
            col = np.zeros((len(pos), 1))
            for (t, b, a), p in pos.items():
                if a == b:
                    col[p, 0] = 1.0 / c[t, s]
            coev_blocks.append([col if t == s else np.zeros((functor_apply(xxb, cats[k].simple(s)).mult[t], 0))
                                for t in range(n_s)])
        evs.append(NatTrans.from_blocks(xbx, one.lam(k), ev_blocks))
        coevs.append(NatTrans.from_blocks(one.lam(k), xxb, coev_blocks))

    # mate connection of X̄: (X̄Γ coev*) (X̄ W* X̄) (ev* Γ X̄)
    bconns = []
    for k in range(1, K + 1):
        g = base.gamma(k)
        step1 = whisker_right(nat_star(evs[k]), chain(g, Xb[k - 1]))
        step2 = whisker_left(Xb[k], whisker_right(nat_star(conns[k - 1]), Xb[k - 1]))
        step3 = whisker_left(chain(Xb[k], g), nat_star(coevs[k - 1]))
        bconns.append(vertical(step3, vertical(step2, step1)))
    xbcell = OneCell(base, base, Xb, bconns, name="X̄")
    xbx_cell = one_cell_compose(xbcell, xcell)
    xxb_cell = one_cell_compose(xcell, xbcell)
    ev = TwoCell(xbx_cell, one, 0, [e.retype(xbx_cell.lam(k), one.lam(k)) for k, e in enumerate(evs)])
    coev = TwoCell(one, xxb_cell, 0, [e.retype(one.lam(k), xxb_cell.lam(k)) for k, e in enumerate(coevs)])
    return DualityData(xcell, xbcell, ev, coev)


