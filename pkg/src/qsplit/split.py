"""Splitting a Q-system Q as X̄ ⊠ X through new 0-cells of module categories.

Levels k of the base 0-cell Γ (Hilbert spaces M_k) carry

* Σ_k: right A_k-modules, A_k = End(x_k), with induction along Γ;
* Δ_k: right B_k-modules, B_k = S_k for k ≥ l and
  B_k = {c in C_k : ι_{k→l}(c) in S_l} below l;
* F: Γ → Σ, F_k = Hom(x_k, ·), and Λ: Σ → Δ, Λ_k = •⊠_A B_k along Q;
* Λ̄: Δ → Σ, •⊠_B H_k from l on and restriction through C_k below;
* X = Λ ⊠ F, with β: Λ̄ΛF ⇒ FQ and γ: X̄X ⇒ Q.

Everything is realized by concrete generators (see ``corr``) so that each
natural transformation comes from an explicit carrier map.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .corr import (CFunctor, MMAlgebra, Realm, algebra_realm, cf_chain, cf_compose,
                   hilbert_realm, identity_cfunctor, make_cfunctor, nat_from_carrier,
                   same_carrier, square_connection)
from .errors import MissingSimple, SquareSolveFailure
from .funcalc import (NatTrans, functor_apply, nat_distance, nat_star, unitarity_residual,
                      vertical, whisker_left, whisker_right)
from .numkit import DEFAULT, TolerancePolicy
from .qsys import QSystem, from_dual_pair, stability_level
from .sscat import SCat, mor_star
from .tower import (Level, coord, hom_basis, mor_vec, tower_objects, wedderburn,
                    wedderburn_of_A)
from .uc2 import (DualityData, OneCell, TwoCell, ZeroCell, duality_check, identity_one_cell,
                  one_cell_check, one_cell_compose, separability_residual, zigzag_residuals)


def _mor_comb(basis, coeffs):
    out = basis[0].scale(coeffs[0])
    for b, c in zip(basis[1:], coeffs[1:]):
        out = out + b.scale(c)
    return out


@dataclass
class Split:
    Q: QSystem
    l: int
    levels: list
    xs: list
    M: list = field(default_factory=list)        # realms
    A: list = field(default_factory=list)
    B: list = field(default_factory=list)
    C: list = field(default_factory=list)
    cf: dict = field(default_factory=dict)       # (name, k) -> CFunctor
    cells: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)

    @property
    def depth(self):
        return self.Q.depth

    def f(self, name, k) -> CFunctor:
        return self.cf[(name, k)]


# -- algebras B_k ---------------------------------------------------------------

def _iota_up(sp: Split, k, target):
    """ι_{k→target}: C_k → C_target, c ↦ W Γ(c) W* iterated."""
    def go(c):
        for j in range(k, target):
            c = sp.levels[j].include_C(c)
        return c
    return go


def _b_basis_below(sp: Split, k):
    """Basis of {c in C_k : ι_{k→l}(c) in S_l}, by a null-space computation."""
    lev_l = sp.levels[sp.l]
    up = _iota_up(sp, k, sp.l)
    cbasis = hom_basis(sp.levels[k].qx, sp.levels[k].qx)
    cols = np.array([mor_vec(lev_l.m @ lev_l.Qf(up(c)) - up(c) @ lev_l.m) for c in cbasis]).T
    u, s, vh = np.linalg.svd(cols, full_matrices=True)
    scale = max(s.max() if s.size else 1.0, 1.0)
    rank = int(np.sum(s > 1e-9 * scale))
    null = vh[rank:].conj()
    return [_mor_comb(cbasis, v) for v in null]


def build_B(sp: Split, k, seed=0) -> MMAlgebra:
    lev = sp.levels[k]
    if k >= sp.l:
        def sample(rng, lev=lev):
            return lev.phi1(lev.random_h(rng))
        dim = lev.h_dim
    else:
        basis = _b_basis_below(sp, k)
        dim = len(basis)

        def sample(rng, basis=basis):
            c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
            return _mor_comb(basis, c)
    wed = wedderburn(sample, lev.qx, dim, seed=seed + k)
    return MMAlgebra(f"B{k}", wed, sample)


# -- 0-cells ----------------------------------------------------------------------

def _coord_cfunctor(name, functor, src: Realm, dst: Realm) -> CFunctor:
    """CFunctor of a base-type functor on Hilbert spaces: coordinate isometries."""
    def spanners(j, t):
        y = functor_apply(functor, src.cat.simple(j))
        return [coord(y, t, c) for c in range(y.mult[t])]
    return make_cfunctor(name, src, dst, lambda f: functor_apply(functor, f), spanners,
                         functor=functor)


def build_new_zero_cells(sp: Split):
    """Σ (A-modules) and Δ (B-modules); also the C-module functors Ψ below l."""
    base, K = sp.Q.base, sp.depth
    for k in range(K + 1):
        x = sp.xs[k]
        if min(x.mult) == 0:
            raise MissingSimple(f"x_{k} misses a simple: {x.mult}")
        sp.M.append(hilbert_realm(base.cats[k]))
        sp.A.append(Realm(SCat(tuple(f"A{k}.{lab}" for lab in base.cats[k].labels), f"A{k}"),
                          [x] * x.cat.n, [coord(x, j) @ mor_star(coord(x, j)) for j in range(x.cat.n)]))
        wc = wedderburn_of_A(sp.levels[k].qx)
        sp.C.append(algebra_realm(wc, f"C{k}"))
        b = build_B(sp, k)
        sp.cf[("Balg", k)] = b
        sp.B.append(b.realm)
    sig_f, del_f = [], []
    for k in range(1, K + 1):
        g = base.gamma(k)
        gam = lambda f, g=g: functor_apply(g, f)
        sp.cf[("Γ", k)] = _coord_cfunctor(f"Γ{k}", g, sp.M[k - 1], sp.M[k])
        xk = sp.xs[k]

        def sig_span(j, t, g=g, xk=xk, A0=sp.A[k - 1]):
            head = functor_apply(g, A0.units[j])
            return [head @ coord(xk, t, p) @ mor_star(coord(xk, t)) for p in range(xk.mult[t])]
        sig = make_cfunctor(f"Σ{k}", sp.A[k - 1], sp.A[k], gam, sig_span)
        w = sp.levels[k - 1].w
        bprev, bk = sp.cf[("Balg", k - 1)], sp.cf[("Balg", k)]

        def del_span(i, t, g=g, w=w, bprev=bprev, bk=bk):
            head = functor_apply(g, bprev.wed.minimal[i]) @ mor_star(w)
            return [head @ v for v in bk.wed.units[t]]
        dl = make_cfunctor(f"Δ{k}", sp.B[k - 1], sp.B[k], gam, del_span)
        sp.cf[("Σ", k)], sp.cf[("Δ", k)] = sig, dl
        sig_f.append(sig.functor)
        del_f.append(dl.functor)
        if k <= sp.l:
            def psi_span(i, t, g=g, w=w, c0=sp.C[k - 1], c1=sp.C[k], q=sp.levels[k].qx):
                head = functor_apply(g, c0.units[i]) @ mor_star(w)
                return [head @ coord(q, t, r) @ mor_star(coord(q, t)) for r in range(q.mult[t])]
            sp.cf[("Ψ", k)] = make_cfunctor(f"Ψ{k}", sp.C[k - 1], sp.C[k], gam, psi_span)
    sigma = ZeroCell([r.cat for r in sp.A], sig_f, name="Σ")
    delta = ZeroCell([r.cat for r in sp.B], del_f, name="Δ")
    sp.cells["Γ"], sp.cells["Σ"], sp.cells["Δ"] = base, sigma, delta
    sp.report["bratteli"] = {"Σ": [f.mult.tolist() for f in sig_f],
                             "Δ": [f.mult.tolist() for f in del_f],
                             "B_blocks": [sp.cf[("Balg", k)].wed.block_dims for k in range(K + 1)],
                             "bifaithful": sigma.bifaithful() and delta.bifaithful()}
    return sigma, delta


# -- F and F̄ ------------------------------------------------------------------------

def build_F(sp: Split):
    K = sp.depth
    rep = {}
    for k in range(K + 1):
        x = sp.xs[k]

        def f_span(j, t, x=x):
            return [mor_star(coord(x, j))] if t == j else []

        def fb_span(j, t, x=x):
            return [coord(x, j)] if t == j else []
        sp.cf[("F", k)] = make_cfunctor(f"F{k}", sp.M[k], sp.A[k], None, f_span)
        sp.cf[("F̄", k)] = make_cfunctor(f"F̄{k}", sp.A[k], sp.M[k], None, fb_span)
        sp.cf[("1A", k)] = identity_cfunctor(sp.A[k])
        sp.cf[("1M", k)] = identity_cfunctor(sp.M[k])
        sp.cf[("1B", k)] = identity_cfunctor(sp.B[k])
    conns, bconns = [], []
    for k in range(1, K + 1):
        conns.append(nat_from_carrier(cf_compose(sp.f("Σ", k), sp.f("F", k - 1)),
                                      cf_compose(sp.f("F", k), sp.f("Γ", k)), same_carrier, rep))
        bconns.append(nat_from_carrier(cf_compose(sp.f("Γ", k), sp.f("F̄", k - 1)),
                                       cf_compose(sp.f("F̄", k), sp.f("Σ", k)), same_carrier, rep))
    G, S = sp.cells["Γ"], sp.cells["Σ"]
    Fc = OneCell(G, S, [sp.f("F", k).functor for k in range(K + 1)], conns, name="F")
    Fbc = OneCell(S, G, [sp.f("F̄", k).functor for k in range(K + 1)], bconns, name="F̄")
    ffb, fbf = one_cell_compose(Fc, Fbc), one_cell_compose(Fbc, Fc)
    evs, coevs = [], []
    for k in range(K + 1):
        ev = nat_from_carrier(cf_compose(sp.f("F", k), sp.f("F̄", k)), sp.f("1A", k), same_carrier, rep)
        co = nat_from_carrier(sp.f("1M", k), cf_compose(sp.f("F̄", k), sp.f("F", k)), same_carrier, rep)
        evs.append(ev.retype(ffb.lam(k), identity_one_cell(S).lam(k)))
        coevs.append(co.retype(identity_one_cell(G).lam(k), fbf.lam(k)))
    dF = DualityData(Fbc, Fc, TwoCell(ffb, identity_one_cell(S), 0, evs),
                     TwoCell(identity_one_cell(G), fbf, 0, coevs))
    sp.cells.update(F=Fc, Fbar=Fbc, dF=dF)
    sp.report["F_carrier"] = rep.get("carrier", 0.0)
    return dF


# -- Λ and Λ̄ -------------------------------------------------------------------------

def _lambda_functors(sp: Split, k):
    lev, A, Bk = sp.levels[k], sp.A[k], sp.cf[("Balg", k)]
    x, qx = lev.x, lev.qx

    def lam_span(j, t):
        head = lev.Qf(A.units[j])
        return [head @ v for v in Bk.wed.units[t]]
    sp.cf[("Λ", k)] = make_cfunctor(f"Λ{k}", A, sp.B[k], lev.Qf, lam_span)

    def ind_span(i, t, c_realm=sp.C[k]):
        head = Bk.wed.minimal[i]
        return [head @ coord(qx, t, r) @ mor_star(coord(qx, t)) for r in range(qx.mult[t])]

    if k <= sp.l:
        sp.cf[("Ind", k)] = make_cfunctor(f"Ind{k}", sp.B[k], sp.C[k], None, ind_span)

        def r_span(j, t):
            return [coord(qx, j) @ mor_star(coord(x, j))] if t == j else []
        sp.cf[("R", k)] = make_cfunctor(f"R{k}", sp.C[k], A, None, r_span)
    if k >= sp.l:
        def lb_span(i, t):
            head = Bk.wed.minimal[i]
            return [head @ coord(qx, t, r) @ mor_star(coord(x, t)) for r in range(qx.mult[t])]
        sp.cf[("Λ̄", k)] = make_cfunctor(f"Λ̄{k}", sp.B[k], A, None, lb_span)
    else:
        sp.cf[("Λ̄", k)] = cf_compose(sp.f("R", k), sp.f("Ind", k))


def _wbar_squares(sp: Split, k, rep):
    """The two squares shared by the k ≤ l paths: Σ_k R ≅ R Ψ_k and Ψ_k Ind ≅ Ind Δ_k."""
    a = nat_from_carrier(cf_compose(sp.f("Σ", k), sp.f("R", k - 1)),
                         cf_compose(sp.f("R", k), sp.f("Ψ", k)), same_carrier, rep)
    b = square_connection(cf_compose(sp.f("Ψ", k), sp.f("Ind", k - 1)),
                          cf_compose(sp.f("Ind", k), sp.f("Δ", k)), rep)
    ind_prev = sp.f("Ind", k - 1).functor
    return vertical(whisker_left(sp.f("R", k).functor, b), whisker_right(a, ind_prev))


def _wbar(sp: Split, k, rep):
    """W̄_k: Σ_k Λ̄_{k-1} ⇒ Λ̄_k Δ_k along the path for k's range."""
    src = cf_compose(sp.f("Σ", k), sp.f("Λ̄", k - 1))
    dst = cf_compose(sp.f("Λ̄", k), sp.f("Δ", k))
    plain = nat_from_carrier(src, dst, same_carrier, {})
    l = sp.l
    if k < l:
        path = "squares"
        w = _wbar_squares(sp, k, rep)
    elif k == l:
        path = "S-chain"
        lev = sp.levels[l]
        # R_l ∘ (•⊠ C_l) ≅ Λ̄_l through S_l: y ↦ φ₂(φ₁(y))
        c = nat_from_carrier(cf_compose(sp.f("R", l), sp.f("Ind", l)), sp.f("Λ̄", l),
                             lambda j, t, b, y: lev.phi2(lev.phi1(y)), rep)
        w = vertical(whisker_right(c, sp.f("Δ", l).functor), _wbar_squares(sp, k, rep))
    else:
        path = "cap-cup"
        lo, hi = sp.levels[k - 1], sp.levels[k]
        g = sp.Q.base.gamma(k)
        wstar = mor_star(lo.w)

        def T(j, t, b, y):
            xi, alpha = src.parts[j][t][b]
            return functor_apply(g, lo.phi1(xi)) @ wstar @ hi.Qf(alpha) @ hi.i
        w = nat_from_carrier(src, dst, T, rep)
    w = w.retype(src.functor, dst.functor)
    u = unitarity_residual(w)
    if u > 1e-8:
        raise SquareSolveFailure(f"W̄_{k} ({path}) is not unitary: {u:.2e}")
    return w, {"k": k, "path": path, "unitarity": u, "vs_plain": nat_distance(w, plain)}


def build_Lambda(sp: Split):
    K, l = sp.depth, sp.l
    for k in range(K + 1):
        _lambda_functors(sp, k)
    rep, wrep = {}, {}
    conns, bconns, paths = [], [], []
    for k in range(1, K + 1):
        w = sp.levels[k - 1].w
        conns.append(nat_from_carrier(cf_compose(sp.f("Δ", k), sp.f("Λ", k - 1)),
                                      cf_compose(sp.f("Λ", k), sp.f("Σ", k)),
                                      lambda j, t, b, y, w=w: w @ y, rep))
        wb, info = _wbar(sp, k, wrep)
        bconns.append(wb)
        paths.append(info)
    S, D = sp.cells["Σ"], sp.cells["Δ"]
    Lc = OneCell(S, D, [sp.f("Λ", k).functor for k in range(K + 1)], conns, name="Λ")
    Lbc = OneCell(D, S, [sp.f("Λ̄", k).functor for k in range(K + 1)], bconns, name="Λ̄")
    llb, lbl = one_cell_compose(Lc, Lbc), one_cell_compose(Lbc, Lc)
    one_d, one_s = identity_one_cell(D), identity_one_cell(S)
    evs, coevs, seps = [], [], []
    for k in range(l, K + 1):
        lev = sp.levels[k]
        ll, lbl_cf = cf_compose(sp.f("Λ", k), sp.f("Λ̄", k)), cf_compose(sp.f("Λ̄", k), sp.f("Λ", k))
        ev = nat_from_carrier(ll, sp.f("1B", k), lambda j, t, b, y, lev=lev: lev.m @ y, rep)
        co = nat_from_carrier(sp.f("1A", k), lbl_cf, lambda j, t, b, y, lev=lev: lev.i @ y, rep)
        # the other pair: 1 ⇒ ΛΛ̄ by q ↦ Q(q) m*, and Λ̄Λ ⇒ 1 by Y ↦ i* Y
        one = nat_from_carrier(sp.f("1B", k), ll,
                               lambda j, t, b, y, lev=lev: lev.Qf(y) @ mor_star(lev.m), rep)
        four = nat_from_carrier(lbl_cf, sp.f("1A", k),
                                lambda j, t, b, y, lev=lev: mor_star(lev.i) @ y, rep)
        ident = NatTrans.identity(sp.f("1B", k).functor)
        dn = vertical(four, co)
        seps.append({"k": k, "ii_after_i": nat_distance(vertical(ev, one), ident),
                     "i_is_adjoint": nat_distance(one, nat_star(ev)),
                     "iv_after_iii_is_d": max(abs(dn.comps[j].blocks[j][0, 0] - lev.d[j])
                                              for j in range(len(lev.d)))})
        evs.append(ev.retype(llb.lam(k), one_d.lam(k)))
        coevs.append(co.retype(one_s.lam(k), lbl.lam(k)))
    dL = DualityData(Lbc, Lc, TwoCell(llb, one_d, l, evs), TwoCell(one_s, lbl, l, coevs))
    sp.cells.update(Lambda=Lc, Lambdabar=Lbc, dL=dL)
    sp.report["Lambda"] = {"carrier": rep.get("carrier", 0.0), "wbar_carrier": wrep.get("carrier", 0.0),
                           "wbar": paths, "separability": seps}
    return dL


# -- X, β, γ ---------------------------------------------------------------------------

def build_X(sp: Split):
    K, l = sp.depth, sp.l
    Fc, Fbc, Lc, Lbc = (sp.cells[n] for n in ("F", "Fbar", "Lambda", "Lambdabar"))
    dF, dL = sp.cells["dF"], sp.cells["dL"]
    X = one_cell_compose(Lc, Fc, name="X")
    Xb = one_cell_compose(Fbc, Lbc, name="X̄")
    xxb, xbx = one_cell_compose(X, Xb), one_cell_compose(Xb, X)
    one_d, one_g = identity_one_cell(Lc.dst), identity_one_cell(Fc.src)
    evs, coevs = [], []
    for k in range(l, K + 1):
        inner = whisker_left(Lc.lam(k), whisker_right(dF.ev.at(k), Lbc.lam(k)))
        evs.append(vertical(dL.ev.at(k), inner).retype(xxb.lam(k), one_d.lam(k)))
        outer = whisker_left(Fbc.lam(k), whisker_right(dL.coev.at(k), Fc.lam(k)))
        coevs.append(vertical(outer, dF.coev.at(k)).retype(one_g.lam(k), xbx.lam(k)))
    dX = DualityData(Xb, X, TwoCell(xxb, one_d, l, evs), TwoCell(one_g, xbx, l, coevs))
    sp.cells.update(X=X, Xbar=Xb, dX=dX)
    return dX


def build_beta_gamma(sp: Split):
    K, l, Q = sp.depth, sp.l, sp.Q
    Fc, Fbc, Lc, Lbc, X, Xb = (sp.cells[n] for n in ("F", "Fbar", "Lambda", "Lambdabar", "X", "Xbar"))
    src = one_cell_compose(Lbc, one_cell_compose(Lc, Fc))
    dst = one_cell_compose(Fc, Q.q)
    rep = {}
    betas = []
    for k in range(l, K + 1):
        qcf = _coord_cfunctor(f"Q{k}", Q.Q(k), sp.M[k], sp.M[k])
        b = nat_from_carrier(cf_chain(sp.f("Λ̄", k), sp.f("Λ", k), sp.f("F", k)),
                             cf_compose(sp.f("F", k), qcf), same_carrier, rep)
        betas.append(b.retype(src.lam(k), dst.lam(k)))
    beta = TwoCell(src, dst, l, betas)
    xbx = one_cell_compose(Xb, X)
    dF = sp.cells["dF"]
    gammas = []
    for k in range(l, K + 1):
        fb_beta = whisker_left(Fbc.lam(k), beta.at(k))
        cap = whisker_right(nat_star(dF.coev.at(k)), Q.Q(k))
        gammas.append(vertical(cap, fb_beta).retype(xbx.lam(k), Q.Q(k)))
    gamma = TwoCell(xbx, Q.q, l, gammas)
    sp.cells.update(beta=beta, gamma=gamma)
    sp.report["beta_carrier"] = rep.get("carrier", 0.0)
    return beta, gamma


# -- driver ----------------------------------------------------------------------------

def build_split(Q: QSystem, l=None, tol: TolerancePolicy = DEFAULT) -> Split:
    if l is None:
        l = Q.l if Q.l is not None else stability_level(Q, tol)
    xs = tower_objects(Q.base)
    levels = [Level(Q, k, xs) for k in range(Q.depth + 1)]
    sp = Split(Q, l, levels, xs)
    build_new_zero_cells(sp)
    build_F(sp)
    build_Lambda(sp)
    build_X(sp)
    build_beta_gamma(sp)
    return sp


def _max(vals):
    return float(max(vals, default=0.0))


def verify_splitting(Q: QSystem, tol: TolerancePolicy = DEFAULT, l=None, fixture="") -> dict:
    """Build X and γ, then check that γ: X̄X ≅ Q is an isomorphism of Q-systems."""
    t0 = time.time()
    sp = build_split(Q, l, tol)
    K, l = sp.depth, sp.l
    dX = sp.cells["dX"]
    Qp = from_dual_pair(dX, tol, detect=False)
    gamma, beta = sp.cells["gamma"], sp.cells["beta"]
    ex_beta, ex_gamma = beta.exchange_residuals(), gamma.exchange_residuals()
    dchecks = {n: duality_check(sp.cells[k], tol) for n, k in
               (("F", "dF"), ("Lambda", "dL"), ("X", "dX"))}
    seps = {s["k"]: s for s in sp.report["Lambda"]["separability"]}
    wb = {w["k"]: w for w in sp.report["Lambda"]["wbar"]}
    levels = []
    for k in range(l, K + 1):
        g = gamma.at(k)
        gg = vertical(whisker_right(g, Q.Q(k)), whisker_left(Qp.Q(k), g))
        mult = nat_distance(vertical(g, Qp.m.at(k)), vertical(Q.m.at(k), gg).retype(
            Qp.m.at(k).src, Q.m.at(k).dst))
        unit = nat_distance(vertical(g, Qp.i.at(k)), Q.i.at(k).retype(Qp.i.at(k).src, Q.i.at(k).dst))
        z = {n: max(zigzag_residuals(sp.cells[key], k)) for n, key in
             (("F", "dF"), ("Lambda", "dL"), ("X", "dX"))}
        res = {
            "gamma_unitarity": unitarity_residual(g),
            "gamma_mult": mult,
            "gamma_unit": unit,
            "zigzag_F": z["F"], "zigzag_Lambda": z["Lambda"], "zigzag_X": z["X"],
            "ev_X_separable": separability_residual(dX, k),
            "lambda_ii_after_i": seps[k]["ii_after_i"],
            "beta_unitarity": unitarity_residual(beta.at(k)),
        }
        if k < K:
            res["beta_exchange"] = ex_beta[k - l]
            res["gamma_exchange"] = ex_gamma[k - l]
        if k in wb:
            res["wbar_unitarity"] = wb[k]["unitarity"]
        levels.append({"k": k, "residuals": {a: float(b) for a, b in res.items()},
                       "pass": max(res.values()) <= tol.eps_num})
    structural = {
        "F_carrier": sp.report["F_carrier"],
        "Lambda_carrier": sp.report["Lambda"]["carrier"],
        "wbar_carrier": sp.report["Lambda"]["wbar_carrier"],
        "beta_carrier": sp.report["beta_carrier"],
        "one_cells": {n: one_cell_check(sp.cells[n], tol)["pass"]
                      for n in ("F", "Fbar", "Lambda", "Lambdabar")},
    }
    ok = (all(lv["pass"] for lv in levels)
          and max(structural[k] for k in ("F_carrier", "Lambda_carrier", "wbar_carrier",
                                          "beta_carrier")) <= 1e-8
          and all(structural["one_cells"].values())
          and all(d["pass"] for d in dchecks.values()))
    return {
        "fixture": fixture,
        "l": l,
        "depth": K,
        "levels": levels,
        "pass": bool(ok),
        "tolerances": {"eps_num": tol.eps_num, "tau_rel": tol.tau_rel},
        "wbar": [{"k": w["k"], "path": w["path"], "unitarity": w["unitarity"],
                  "vs_plain": w["vs_plain"]} for w in sp.report["Lambda"]["wbar"]],
        "structure": structural,
        "bratteli": sp.report["bratteli"],
        "dualities": {n: {"worst": d["worst"], "pass": d["pass"]} for n, d in dchecks.items()},
        "seconds": round(time.time() - t0, 3),
        "_split": sp,
        "_qprime": Qp,
    }


def certificate_json(cert: dict) -> dict:
    """Drop in-memory objects so the certificate serializes."""
    return {k: v for k, v in cert.items() if not k.startswith("_")}
