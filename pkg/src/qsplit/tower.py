"""Realizations over the base tower x_k = Γ_k···Γ_1 m_0.

A_k = End(x_k), C_k = End(Q_k x_k) and H_k = Hom(x_k, Q_k x_k) with

* product ξ·η = m_x Q(ξ) η, unit i_x, dagger ξ† = Q(ξ*) m_x* i_x;
* inclusion I_{k+1}(ξ) = W_x Γ(ξ);
* S_k = {y in C_k : m Q(y) = y m}, φ₁(ξ) = m Q(ξ), φ₂(y) = y i;
* E_k(ξ) = d⁻¹ i* ξ.

Hom-space elements are ``Mor`` values; vectorization concatenates blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, LevelOutOfRange, MissingSimple, NotAlgebra
from .funcalc import Functor, functor_apply, nat_extend
from .numkit import DEFAULT, TolerancePolicy, dag, min_eig, opnorm
from .sscat import Mor, Obj, mor_compose, mor_star, simple_resolution
from .uc2 import TwoCell, ZeroCell


# -- Mor helpers -----------------------------------------------------------

def mor_vec(f: Mor) -> np.ndarray:
    return np.concatenate([b.ravel() for b in f.blocks]) if f.blocks else np.zeros(0, complex)


def mor_from_vec(src: Obj, dst: Obj, v) -> Mor:
    blocks, p = [], 0
    for i in range(src.cat.n):
        r, c = dst.mult[i], src.mult[i]
        blocks.append(np.asarray(v[p:p + r * c]).reshape(r, c))
        p += r * c
    return Mor(src, dst, blocks)


def hom_dim(src: Obj, dst: Obj) -> int:
    return sum(a * b for a, b in zip(src.mult, dst.mult))


def hom_basis(src: Obj, dst: Obj):
    """Matrix units of Hom(src, dst), orthonormal for the trace pairing."""
    out = []
    for i in range(src.cat.n):
        for r in range(dst.mult[i]):
            for c in range(src.mult[i]):
                blocks = [np.zeros((dst.mult[j], src.mult[j])) for j in range(src.cat.n)]
                blocks[i][r, c] = 1.0
                out.append(Mor(src, dst, blocks))
    return out


def mtrace(f: Mor) -> complex:
    return sum(np.trace(b) for b in f.blocks)


def mdist(f: Mor, g: Mor) -> float:
    return max((opnorm(a - b) for a, b in zip(f.blocks, g.blocks)), default=0.0)


def coord(x: Obj, j: int, c: int = 0) -> Mor:
    """Coordinate isometry ``s_j -> x`` onto copy c of block j."""
    s = x.cat.simple(j)
    blocks = [np.zeros((x.mult[t], s.mult[t])) for t in range(x.cat.n)]
    blocks[j][c, 0] = 1.0
    return Mor(s, x, blocks)


def random_mor(src: Obj, dst: Obj, rng) -> Mor:
    return Mor(src, dst, [rng.standard_normal((dst.mult[i], src.mult[i]))
                          + 1j * rng.standard_normal((dst.mult[i], src.mult[i]))
                          for i in range(src.cat.n)])


# -- base tower ------------------------------------------------------------

def tower_objects(z: ZeroCell):
    m0 = Obj(z.cats[0], (1,) * z.cats[0].n)
    xs = [m0]
    for k in range(1, z.depth + 1):
        xs.append(functor_apply(z.gamma(k), xs[-1]))
    return xs


@dataclass
class TowerAlgebra:
    """A_k = End(x) (or C_k = End(Qx)) as block matrices."""

    k: int
    obj: Obj
    include: object = None   # callable End(obj) -> next level

    @property
    def block_dims(self):
        return self.obj.mult

    @property
    def dim(self):
        return sum(m * m for m in self.obj.mult)

    def basis(self):
        return hom_basis(self.obj, self.obj)

    def unit(self):
        return Mor.identity(self.obj)

    def min_projection(self, j):
        e = coord(self.obj, j)
        return mor_compose(e, mor_star(e))

    def random(self, rng):
        return random_mor(self.obj, self.obj, rng)


def build_A(z: ZeroCell, k: int) -> TowerAlgebra:
    if not 0 <= k <= z.depth:
        raise LevelOutOfRange(f"level {k} outside 0..{z.depth}")
    x = tower_objects(z)[k]
    if min(x.mult) == 0:
        raise MissingSimple(f"x_{k} misses a simple: {x.mult}")
    inc = (lambda a, g=z.gamma(k + 1): functor_apply(g, a)) if k < z.depth else None
    return TowerAlgebra(k, x, inc)


# -- one tower level of a Q-system ----------------------------------------------

class Level:
    """Cached structure maps of an endo 1-cell Q at level k, evaluated at x_k."""

    def __init__(self, Q, k: int, xs=None):
        if not 0 <= k <= Q.depth:
            raise LevelOutOfRange(f"level {k} outside 0..{Q.depth}")
        self.Qsys, self.k = Q, k
        xs = xs or tower_objects(Q.base)
        self.x = xs[k]
        self.F: Functor = Q.Q(k)
        self.qx = functor_apply(self.F, self.x)
        self.qqx = functor_apply(self.F, self.qx)

    @cached_property
    def m(self) -> Mor:
        return nat_extend(self.Qsys.m.at(self.k), self.x)

    @cached_property
    def i(self) -> Mor:
        return nat_extend(self.Qsys.i.at(self.k), self.x)

    @cached_property
    def w(self) -> Mor:
        """W^Q_{k+1} at x_k: Γ Q x_k -> Q Γ x_k = Q x_{k+1}."""
        return nat_extend(self.Qsys.q.conn(self.k + 1), self.x)

    def gamma(self) -> Functor:
        return self.Qsys.base.gamma(self.k + 1)

    def Qf(self, f: Mor) -> Mor:
        return functor_apply(self.F, f)

    # H_k as a C*-algebra
    def prod(self, xi: Mor, eta: Mor) -> Mor:
        return self.m @ self.Qf(xi) @ eta

    def unit(self) -> Mor:
        return self.i

    def dagger(self, xi: Mor) -> Mor:
        return self.Qf(mor_star(xi)) @ mor_star(self.m) @ self.i

    def phi1(self, xi: Mor) -> Mor:
        return self.m @ self.Qf(xi)

    def phi2(self, y: Mor) -> Mor:
        return y @ self.i

    def s_residual(self, y: Mor) -> float:
        """Distance of y in End(Qx) from the S_k constraint m Q(y) = y m."""
        return mdist(self.m @ self.Qf(y), y @ self.m)

    def include_H(self, xi: Mor) -> Mor:
        return self.w @ functor_apply(self.gamma(), xi)

    def include_C(self, c: Mor) -> Mor:
        return self.w @ functor_apply(self.gamma(), c) @ mor_star(self.w)

    def include_A(self, a: Mor) -> Mor:
        return functor_apply(self.gamma(), a)

    @cached_property
    def d(self):
        """d_Q scalars per simple of M_k."""
        i = self.Qsys.i.at(self.k)
        return np.array([np.real(np.vdot(i.comps[s].blocks[s], i.comps[s].blocks[s]))
                         for s in range(self.x.cat.n)])

    @cached_property
    def d_inv(self):
        tau = DEFAULT.tau_spec(self.d.max())
        return np.where(self.d > tau, 1.0 / np.where(self.d > tau, self.d, 1.0), 0.0)

    def scalar_on_x(self, vals) -> Mor:
        return Mor(self.x, self.x, [v * np.eye(m) for v, m in zip(vals, self.x.mult)])

    def E(self, xi: Mor) -> Mor:
        return self.scalar_on_x(self.d_inv) @ mor_star(self.i) @ xi

    def E_prime(self, y: Mor) -> Mor:
        """C_k -> A_k, y ↦ d⁻¹ i* y i."""
        return self.scalar_on_x(self.d_inv) @ mor_star(self.i) @ y @ self.i

    @cached_property
    def pp(self):
        """σ_{j,c} = u_{j,c} ε_j* with u the coordinate isometries of Qx."""
        out = []
        for (j, c), u in simple_resolution(self.qx):
            out.append(u @ mor_star(coord(self.x, j)))
        return out

    def h_basis(self):
        return hom_basis(self.x, self.qx)

    @property
    def h_dim(self):
        return hom_dim(self.x, self.qx)

    def random_h(self, rng) -> Mor:
        return random_mor(self.x, self.qx, rng)


# -- public operations ----------------------------------------------------------

@dataclass
class HSpace:
    k: int
    level: Level
    basis: list

    @property
    def dim(self):
        return len(self.basis)

    def left(self, a: Mor, xi: Mor) -> Mor:
        return self.level.Qf(a) @ xi

    def right(self, xi: Mor, a: Mor) -> Mor:
        return xi @ a

    def ip(self, xi: Mor, zeta: Mor) -> Mor:
        return mor_star(zeta) @ xi

    def include(self, xi: Mor) -> Mor:
        return self.level.include_H(xi)


def build_H(Q, k: int, xs=None) -> HSpace:
    lev = Level(Q, k, xs)
    return HSpace(k, lev, lev.h_basis())


def include_H(H: HSpace, xi: Mor) -> Mor:
    return H.include(xi)


def inclusion_report(Q, k: int, rng=None, n=8) -> dict:
    """Isometry and bimodule compatibility of H_k -> H_{k+1} on random data."""
    rng = rng or np.random.default_rng(k)
    lo, hi = Level(Q, k), Level(Q, k + 1)
    iso = bimod = 0.0
    for _ in range(n):
        xi, eta = lo.random_h(rng), lo.random_h(rng)
        a, b = random_mor(lo.x, lo.x, rng), random_mor(lo.x, lo.x, rng)
        ip_lo = mor_star(eta) @ xi
        ip_hi = mor_star(lo.include_H(eta)) @ lo.include_H(xi)
        iso = max(iso, mdist(lo.include_A(ip_lo), ip_hi))
        lhs = lo.include_H(lo.Qf(a) @ xi @ b)
        rhs = hi.Qf(lo.include_A(a)) @ lo.include_H(xi) @ lo.include_A(b)
        bimod = max(bimod, mdist(lhs, rhs))
    return {"isometry": iso, "bimodule": bimod}


def _coef_index(src: Obj, dst: Obj):
    """Flat dense positions of the matrix units of Hom(src, dst), in basis order."""
    so, do = src.offsets(), dst.offsets()
    idx = []
    for i in range(src.cat.n):
        for r in range(dst.mult[i]):
            for c in range(src.mult[i]):
                idx.append((do[i] + r) * src.dim + so[i] + c)
    return np.array(idx, dtype=int)


def h_algebra(lev: Level, full_limit=128, pair_limit=300, n_samples=2048, seed=0,
              chunk=16) -> dict:
    """Associativity, unit and dagger residuals of H_k on the matrix-unit basis.

    All basis triples are used when dim H_k ≤ ``full_limit``; above that every
    pair is checked (φ₁ multiplicative, dagger anti-multiplicative) and
    triples are sampled.
    """
    basis = lev.h_basis()
    n = len(basis)
    pos = _coef_index(lev.x, lev.qx)
    B = np.array([b.dense() for b in basis])
    L = np.array([lev.phi1(b).dense() for b in basis])
    D = np.array([lev.dagger(b).dense() for b in basis])
    one = lev.unit().dense()
    unit = max(np.abs(np.einsum("aij,jk->aik", L, one) - B).max(),
               np.abs(lev.phi1(lev.unit()).dense()[None] @ B - B).max())
    coef_d = D.reshape(n, -1)[:, pos]
    dag_inv = np.abs(np.einsum("an,nij->aij", coef_d.conj(), D) - B).max()
    star = np.abs(np.einsum("an,nij->aij", coef_d, L) - np.conj(np.swapaxes(L, 1, 2))).max()
    LD = np.einsum("an,nij->aij", coef_d, L)         # φ₁(ξ_a†)
    full = n <= full_limit
    qx, xd = B.shape[1], B.shape[2]
    Lflat = L.reshape(n, -1)
    Dflat = D.reshape(n, -1)
    Bcols = np.transpose(B, (1, 0, 2)).reshape(qx, n * xd)   # [ξ_1 | ξ_2 | ...]
    # keep the per-chunk work arrays near 4e6 entries
    per_row = n * qx * (qx + (n * xd if full else 0))
    chunk = max(1, min(chunk, int(4e6 // max(per_row, 1))))
    assoc = hom = anti = 0.0
    rng = np.random.default_rng(seed)
    rows = range(0, n, chunk) if n <= pair_limit else []
    for a0 in rows:
        La = L[a0:a0 + chunk]
        na = La.shape[0]
        pr = (La.reshape(na * qx, qx) @ Bcols).reshape(na, qx, n, xd).transpose(0, 2, 1, 3)
        cpr = pr.reshape(na * n, -1)[:, pos]
        phi_pr = (cpr @ Lflat).reshape(na, n, qx, qx)
        ll = (La.reshape(na * qx, qx) @ np.transpose(L, (1, 0, 2)).reshape(qx, n * qx))
        ll = ll.reshape(na, qx, n, qx).transpose(0, 2, 1, 3)
        dmat = phi_pr - ll
        hom = max(hom, np.abs(dmat).max())
        if full:
            assoc = max(assoc, np.abs(dmat.reshape(-1, qx) @ Bcols).max())
        lhs = (cpr.conj() @ Dflat).reshape(na, n, qx, xd)
        rhs = np.matmul(LD[None, :, :, :], D[a0:a0 + chunk][:, None, :, :])
        anti = max(anti, np.abs(lhs - rhs).max())
    if not full:
        for a, b, c in rng.integers(0, n, (n_samples, 3)):
            ab = (L[a] @ B[b]).reshape(-1)[pos]
            phi_ab = (ab @ Lflat).reshape(qx, qx)
            assoc = max(assoc, np.abs(phi_ab @ B[c] - L[a] @ (L[b] @ B[c])).max())
            if n > pair_limit:
                hom = max(hom, np.abs(phi_ab - L[a] @ L[b]).max())
                lhs = (ab.conj() @ Dflat).reshape(qx, xd)
                anti = max(anti, np.abs(lhs - LD[b] @ D[a]).max())
    mode = "full" if full else ("pairs+sampled" if n <= pair_limit else "sampled")
    return {"mode": mode, "dim": n, "associativity": float(assoc),
            "unit": float(unit), "dagger_involution": float(dag_inv),
            "dagger_antimultiplicative": float(anti), "phi1_multiplicative": float(hom),
            "phi1_star": float(star)}


def c_star_identity(lev: Level, rng, n=8) -> float:
    """‖ξ†ξ‖ = ‖ξ‖², norms pulled back through φ₁."""
    worst = 0.0
    for _ in range(n):
        xi = lev.random_h(rng)
        a = lev.phi1(lev.prod(lev.dagger(xi), xi)).norm()
        b = lev.phi1(xi).norm() ** 2
        worst = max(worst, abs(a - b) / max(b, 1.0))
    return worst


@dataclass
class SAlgebra:
    k: int
    level: Level
    dim: int
    kernel_dim: int | None
    roundtrip_h: float
    roundtrip_s: float
    membership: float


def s_kernel_dim(lev: Level, tol: TolerancePolicy = DEFAULT) -> int:
    """dim of {y in End(Qx) : m Q(y) = y m} by a null-space computation."""
    basis = hom_basis(lev.qx, lev.qx)
    cols = [mor_vec(lev.m @ lev.Qf(y) - y @ lev.m) for y in basis]
    mat = np.array(cols).T
    s = np.linalg.svd(mat, compute_uv=False)
    scale = max(s[0] if s.size else 1.0, 1.0)
    return int(np.sum(s <= 1e-8 * scale)) + max(0, mat.shape[1] - mat.shape[0])


def build_S_phi(lev: Level, kernel_limit=1100, tol: TolerancePolicy = DEFAULT) -> SAlgebra:
    basis = lev.h_basis()
    rt_h = max(mdist(lev.phi2(lev.phi1(b)), b) for b in basis)
    member = max(lev.s_residual(lev.phi1(b)) for b in basis)
    rng = np.random.default_rng(lev.k)
    rt_s = 0.0
    for _ in range(6):
        y = lev.phi1(lev.random_h(rng))
        rt_s = max(rt_s, mdist(lev.phi1(lev.phi2(y)), y) / max(y.norm(), 1.0))
    vecs = np.array([mor_vec(lev.phi1(b)) for b in basis]) if len(basis) <= 1100 else None
    if vecs is not None:
        sv = np.linalg.svd(vecs, compute_uv=False)
        rank = int(np.sum(sv > 1e-9 * sv[0]))
    else:
        rank = len(basis) if rt_h <= tol.eps_num else -1
    kdim = s_kernel_dim(lev) if hom_dim(lev.qx, lev.qx) <= kernel_limit else None
    dim = kdim if kdim is not None else rank
    if dim != lev.h_dim or rank != lev.h_dim:
        raise DimensionMismatch(f"dim S_{lev.k} = {dim}, rank φ₁ = {rank}, dim H = {lev.h_dim}")
    return SAlgebra(lev.k, lev, dim, kdim, rt_h, rt_s, member)


def cond_exp(lev: Level, rng=None, n=6) -> dict:
    """Checks on E_k(ξ) = d⁻¹ i* ξ."""
    rng = rng or np.random.default_rng(lev.k)
    x = lev.x
    s_on_x = lev.scalar_on_x(lev.d * lev.d_inv)
    unit = mdist(lev.E(lev.unit()), s_on_x)
    bimod = incl = ipid = 0.0
    for _ in range(n):
        xi, eta = lev.random_h(rng), lev.random_h(rng)
        a, b = random_mor(x, x, rng), random_mor(x, x, rng)
        # a·ξ·b in the algebra H: ĩ(a) ξ ĩ(b)
        axb = lev.prod(lev.prod(lev.i @ a, xi), lev.i @ b)
        bimod = max(bimod, mdist(lev.E(axb), a @ lev.E(xi) @ b))
        incl = max(incl, mdist(lev.E(lev.i @ a), s_on_x @ a))
        lhs = lev.E(lev.prod(lev.dagger(eta), xi))
        rhs = lev.scalar_on_x(lev.d_inv) @ mor_star(eta) @ xi
        ipid = max(ipid, mdist(lhs, rhs))
    # faithfulness: tr E(ξ†ξ) / tr(ξ*ξ) bounded below on the basis
    faithful_min = min(np.real(mtrace(lev.E(lev.prod(lev.dagger(b), b))))
                       / np.real(mtrace(mor_star(b) @ b)) for b in lev.h_basis())
    dnorm = float(lev.d.max())
    index = np.inf
    for _ in range(n):
        y = lev.phi1(lev.random_h(rng))
        pos = mor_star(y) @ y
        bound = lev.Qf(lev.E_prime(pos)).scale(dnorm) - pos
        index = min(index, min_eig(bound.dense()))
    return {"unit": unit, "bimodule": bimod, "inclusion": incl, "inner_product": ipid,
            "faithful_min": faithful_min, "index_min_eig": float(index), "d_norm": dnorm}


def pp_basis(lev: Level, rng=None, n=10) -> dict:
    rng = rng or np.random.default_rng(lev.k)
    sig = lev.pp
    total = sig[0] @ mor_star(sig[0])
    for s in sig[1:]:
        total = total + s @ mor_star(s)
    partition = mdist(total, Mor.identity(lev.qx))
    recon = 0.0
    for _ in range(n):
        xi = lev.random_h(rng)
        back = sig[0] @ (mor_star(sig[0]) @ xi)
        for s in sig[1:]:
            back = back + s @ (mor_star(s) @ xi)
        recon = max(recon, mdist(back, xi))
    # surjectivity identity Σ σ i* φ₁(σ†) = 1 on Qx
    acc = None
    for s in sig:
        term = s @ mor_star(lev.i) @ lev.phi1(lev.dagger(s))
        acc = term if acc is None else acc + term
    surj = mdist(acc, Mor.identity(lev.qx))
    return {"size": len(sig), "partition": partition, "reconstruction": recon,
            "surjectivity": surj}


def flatten_two_cell(eta: TwoCell, k: int, xs=None, rng=None, n=6) -> dict:
    """Φ_k(ξ) = η_x ∘ ξ on Hom(x_k, Λ_k x_k); drift against Φ_{k+1} through the inclusions."""
    if not eta.start <= k < eta.depth:
        raise LevelOutOfRange(f"flattening needs levels {k}, {k + 1}")
    rng = rng or np.random.default_rng(k)
    src, dst = eta.src, eta.dst
    xs = xs or tower_objects(src.src)
    x = xs[k]
    g = src.src.gamma(k + 1)
    e0, e1 = nat_extend(eta.at(k), x), nat_extend(eta.at(k + 1), xs[k + 1])
    w_src = nat_extend(src.conn(k + 1), x)
    w_dst = nat_extend(dst.conn(k + 1), x)
    lx = functor_apply(src.lam(k), x)
    drift = lin = 0.0
    for _ in range(n):
        xi = random_mor(x, lx, rng)
        up_then = e1 @ (w_src @ functor_apply(g, xi))
        then_up = w_dst @ functor_apply(g, e0 @ xi)
        drift = max(drift, mdist(up_then, then_up))
        a = random_mor(x, x, rng)
        lin = max(lin, mdist(e0 @ (xi @ a), (e0 @ xi) @ a))
    return {"k": k, "drift": drift, "right_linearity": lin}


# -- Wedderburn decomposition --------------------------------------------------

@dataclass
class Wedderburn:
    """Blocks of a concrete *-algebra B ⊂ End(w)."""

    obj: Obj
    central: list          # central projections p_t
    minimal: list          # chosen minimal projection f_t per block
    units: list            # units[t][a]: partial isometries with v*v = f_t, Σ v v* = p_t
    block_dims: list

    @property
    def dim(self):
        return sum(n * n for n in self.block_dims)

    @property
    def n(self):
        return len(self.block_dims)


def _herm_part(f: Mor) -> Mor:
    return (f + mor_star(f)).scale(0.5)


def wedderburn(sample, obj: Obj, dim: int, seed=0, retries=5, seeds=None) -> Wedderburn:
    """Decompose B ⊂ End(obj) given a sampler ``sample(rng) -> element``.

    Minimal projections are eigenprojections of a random Hermitian element
    (compressed by the seed projections, if given); two minimal projections
    sit in the same block iff a random element links them.
    """
    for attempt in range(retries):
        rng = np.random.default_rng(seed + 7919 * attempt)
        try:
            return _wedderburn_once(sample, obj, dim, rng, seeds)
        except NotAlgebra:
            continue
    raise NotAlgebra(f"no consistent block decomposition after {retries} attempts")


def _eigprojections(h: Mor, e: Mor, rng):
    mats = []
    dense = h.dense()
    pe = e.dense()
    w, v = np.linalg.eigh((dense + dag(dense)) / 2)
    # keep the part supported on e
    rank_e = int(round(np.real(np.trace(pe))))
    wt = np.real(np.einsum("ij,ji->i", dag(v), pe @ v))
    keep = wt > 0.5
    w, v = w[keep], v[:, keep]
    if v.shape[1] != rank_e:
        raise NotAlgebra("seed projection is not reduced by the sample")
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    scale = max(np.abs(w).max(), 1.0)
    groups, start = [], 0
    for j in range(1, len(w) + 1):
        if j == len(w) or w[j] - w[j - 1] > 1e-7 * scale:
            groups.append(v[:, start:j])
            start = j
    for g in groups:
        mats.append(g @ dag(g))
    return mats


def _dense_to_mor(obj, mat):
    offs = obj.offsets()
    blocks = [mat[offs[i]:offs[i + 1], offs[i]:offs[i + 1]] for i in range(obj.cat.n)]
    return Mor(obj, obj, blocks)


def _wedderburn_once(sample, obj, dim, rng, seeds):
    seeds = seeds or [Mor.identity(obj)]
    projs = []
    for e in seeds:
        h = _herm_part(e @ sample(rng) @ e)
        for p in _eigprojections(h, e, rng):
            projs.append(_dense_to_mor(obj, p))
    # group by linking
    probes = [sample(rng) for _ in range(2)]
    blocks = []
    for p in projs:
        for blk in blocks:
            q = blk[0]
            if any((p @ b @ q).norm() > 1e-7 * max(b.norm(), 1.0) for b in probes):
                blk.append(p)
                break
        else:
            blocks.append([p])
    # order blocks deterministically by the first coordinate they touch
    def first_pos(blk):
        d = np.real(np.diag(blk[0].dense()))
        return int(np.argmax(d > 0.5))
    blocks.sort(key=first_pos)
    central, minimal, units, dims = [], [], [], []
    for blk in blocks:
        ranks = {int(round(np.real(mtrace(p)))) for p in blk}
        if len(ranks) != 1:
            raise NotAlgebra("minimal projections of unequal rank in one block")
        blk.sort(key=lambda p: int(np.argmax(np.real(np.diag(p.dense())) > 0.5)))
        f = blk[0]
        vs = []
        for q in blk:
            if q is f:
                vs.append(f)
                continue
            b = sample(rng)
            y = q @ b @ f
            c = np.real(mtrace(mor_star(y) @ y)) / np.real(mtrace(f))
            if c <= 1e-12:
                raise NotAlgebra("could not link minimal projections")
            vs.append(y.scale(1 / np.sqrt(c)))
        p = blk[0]
        for q in blk[1:]:
            p = p + q
        central.append(p)
        minimal.append(f)
        units.append(vs)
        dims.append(len(blk))
    if sum(n * n for n in dims) != dim:
        raise NotAlgebra(f"block dims {dims} do not account for dim {dim}")
    total = central[0]
    for p in central[1:]:
        total = total + p
    if mdist(total, Mor.identity(obj)) > 1e-8:
        raise NotAlgebra("central projections do not sum to 1")
    for vs, f in zip(units, minimal):
        for v in vs:
            if mdist(mor_star(v) @ v, f) > 1e-7:
                raise NotAlgebra("matrix unit is not a partial isometry")
    return Wedderburn(obj, central, minimal, units, dims)


def wedderburn_of_A(x: Obj) -> Wedderburn:
    central, minimal, units = [], [], []
    for j in range(x.cat.n):
        e = [coord(x, j, c) for c in range(x.mult[j])]
        f = e[0] @ mor_star(e[0])
        minimal.append(f)
        units.append([ec @ mor_star(e[0]) for ec in e])
        p = f
        for ec in e[1:]:
            p = p + ec @ mor_star(ec)
        central.append(p)
    return Wedderburn(x, central, minimal, units, list(x.mult))


def build_C(lev: Level) -> dict:
    """C_k = End(Qx) with the conjugation inclusion; checks Q(A) ⊆ S ⊆ C."""
    rng = np.random.default_rng(lev.k)
    c_alg = TowerAlgebra(lev.k, lev.qx, lev.include_C if lev.k < lev.Qsys.depth else None)
    qa_in_s = 0.0
    for _ in range(4):
        a = random_mor(lev.x, lev.x, rng)
        qa_in_s = max(qa_in_s, lev.s_residual(lev.Qf(a)))
    unital = incl_star = None
    if lev.k < lev.Qsys.depth:
        unital = mdist(lev.include_C(Mor.identity(lev.qx)), Mor.identity(
            functor_apply(lev.Qsys.Q(lev.k + 1), functor_apply(lev.gamma(), lev.x))))
        c = random_mor(lev.qx, lev.qx, rng)
        incl_star = mdist(lev.include_C(mor_star(c)), mor_star(lev.include_C(c)))
    return {"algebra": c_alg, "dim": c_alg.dim, "QA_in_S": qa_in_s,
            "unital": unital, "star": incl_star}
