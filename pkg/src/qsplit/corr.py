"""Concrete modules, correspondences and relative tensor products.

Every module category met here is semisimple.  A *realm* fixes one
concrete generator ``u_j`` per simple: the identity of ``s_j`` for Hilbert
spaces, a minimal projection ``f_j`` for right modules over a multi-matrix
algebra.  A concrete functor ``F`` then carries

* ``tau``: how F acts on carriers (identity, a base functor, conjugation…);
* ``gens[j][t]``: orthonormal generators of ``F(S_j)`` in block t, each a
  ``Mor`` into ``tau(w_j)`` with ``tau(u_j) g = g``.

From this the multiplicity matrix, composites and natural transformations
given by carrier maps all follow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (BadBasis, DimensionMismatch, NonCommutingSquare, NotUnital,
                     ShapeMismatch)
from .funcalc import Functor, NatTrans, canonical, chain
from .numkit import DEFAULT, TolerancePolicy, gram_orthonormal_basis, hermitian_eig
from .sscat import Mor, SCat, mor_star
from .tower import (Level, Wedderburn, hom_dim, mdist, mtrace, mor_vec, random_mor,
                    wedderburn_of_A)


# -- realms and concrete functors --------------------------------------------------

@dataclass
class Realm:
    cat: SCat
    objs: list      # carrier object per simple
    units: list     # generator u_j per simple
    kind: str = "R"

    @property
    def norms(self):
        return [float(np.real(mtrace(u))) for u in self.units]

    def overlap(self, t, a: Mor, b: Mor) -> complex:
        """⟨a, b⟩ normalized so that an orthonormal generator has overlap 1."""
        return mtrace(mor_star(a) @ b) / self.norms[t]


def hilbert_realm(cat: SCat) -> Realm:
    objs = [cat.simple(j) for j in range(cat.n)]
    return Realm(cat, objs, [Mor.identity(o) for o in objs], kind="M")


def algebra_realm(w: Wedderburn, name="B") -> Realm:
    cat = SCat(tuple(f"{name}{t}" for t in range(w.n)), name)
    return Realm(cat, [w.obj] * w.n, list(w.minimal), kind="R")


@dataclass
class CFunctor:
    functor: Functor
    src: Realm
    dst: Realm
    tau: object
    gens: list      # gens[j][t] -> list of Mor
    name: str = ""
    parts: list = None   # for composites: parts[j][t][b] = (inner gen, outer gen)

    @property
    def mult(self):
        return self.functor.mult


def _identity(f):
    return f


def orthonormalize(realm: Realm, t: int, vecs, tol: TolerancePolicy = DEFAULT):
    if not vecs:
        return []
    g = np.array([[realm.overlap(t, a, b) for b in vecs] for a in vecs])
    # already orthonormal (coordinate isometries): keep the given order, which
    # the SCat layout relies on
    if np.abs(g - np.eye(len(vecs))).max() <= tol.eps_num:
        return list(vecs)
    # overlaps are unit-scale, so the cutoff never drops below τ·1; a lone
    # round-off vector would otherwise pass a purely relative test
    w, v = hermitian_eig((g + g.conj().T) / 2, tol)
    keep = np.nonzero(w > tol.tau_spec(max(w[-1], 1.0)))[0][::-1]
    iso, rank = v[:, keep] / np.sqrt(w[keep]), keep.size
    out = []
    for r in range(rank):
        acc = None
        for c, v in zip(iso[:, r], vecs):
            if abs(c) < 1e-15:
                continue
            term = v.scale(c)
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def make_cfunctor(name, src: Realm, dst: Realm, tau, spanners, tol: TolerancePolicy = DEFAULT,
                  functor: Functor = None, **meta) -> CFunctor:
    """``spanners(j, t)`` lists elements spanning block t of F(S_j).

    ``functor`` reuses an existing SCat functor, which must have the
    multiplicities found.
    """
    gens = [[orthonormalize(dst, t, spanners(j, t), tol) for t in range(dst.cat.n)]
            for j in range(src.cat.n)]
    mult = np.array([[len(gens[j][t]) for j in range(src.cat.n)] for t in range(dst.cat.n)])
    if functor is None:
        functor = canonical(src.cat, dst.cat, mult, name=name, **meta)
    elif not np.array_equal(functor.mult, mult):
        raise DimensionMismatch(f"{name}: generators give {mult.tolist()}, "
                                f"functor has {functor.mult.tolist()}")
    return CFunctor(functor, src, dst, tau or _identity, gens, name)


def identity_cfunctor(realm: Realm, functor: Functor = None) -> CFunctor:
    from .funcalc import identity_functor
    n = realm.cat.n
    gens = [[[realm.units[j]] if t == j else [] for t in range(n)] for j in range(n)]
    return CFunctor(functor or identity_functor(realm.cat), realm, realm, _identity, gens, "1")


def cf_compose(G: CFunctor, F: CFunctor) -> CFunctor:
    """G∘F, generators ordered by (middle simple, outer copy, inner copy)."""
    gens, parts = [], []
    for j in range(F.src.cat.n):
        row, prow = [], []
        for t in range(G.dst.cat.n):
            block, pblock = [], []
            for s in range(F.dst.cat.n):
                for g in G.gens[s][t]:
                    for f in F.gens[j][s]:
                        block.append(G.tau(f) @ g)
                        pblock.append((f, g))
            row.append(block)
            prow.append(pblock)
        gens.append(row)
        parts.append(prow)
    tau = (lambda m, g=G.tau, f=F.tau: g(f(m)))
    return CFunctor(chain(G.functor, F.functor), F.src, G.dst, tau, gens, f"{G.name}{F.name}",
                    parts)


def cf_chain(*fs: CFunctor) -> CFunctor:
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = cf_compose(f, out)
    return out


def nat_from_carrier(F: CFunctor, G: CFunctor, T, report=None) -> NatTrans:
    """Natural transformation F ⇒ G from a carrier map ``T(j, t, b, g)``.

    T sends the b-th generator g of block t of F(S_j) into the carrier of G(S_j).

    ``report`` (a dict) receives the worst reconstruction residual: how far
    T(g) is from the span of G's generators.
    """
    blocks, worst = [], 0.0
    dst = G.dst
    for j in range(F.src.cat.n):
        row = []
        for t in range(dst.cat.n):
            fg, gg = F.gens[j][t], G.gens[j][t]
            mat = np.zeros((len(gg), len(fg)), complex)
            for b, f in enumerate(fg):
                img = T(j, t, b, f)
                for a, g in enumerate(gg):
                    mat[a, b] = dst.overlap(t, g, img)
                if gg:
                    back = gg[0].scale(mat[0, b])
                    for a in range(1, len(gg)):
                        back = back + gg[a].scale(mat[a, b])
                    worst = max(worst, mdist(back, img))
                else:
                    worst = max(worst, img.norm())
            row.append(mat)
        blocks.append(row)
    if report is not None:
        report["carrier"] = max(report.get("carrier", 0.0), worst)
    return NatTrans.from_blocks(F.functor, G.functor, blocks)


# -- multi-matrix algebras --------------------------------------------------------

@dataclass
class MMAlgebra:
    """A concrete *-subalgebra of End(obj) with its block data."""

    name: str
    wed: Wedderburn
    sample: object

    @property
    def obj(self):
        return self.wed.obj

    @property
    def dim(self):
        return self.wed.dim

    @property
    def realm(self) -> Realm:
        return algebra_realm(self.wed, self.name)


@dataclass
class Correspondence:
    """Concrete right module: span of ``vecs`` ⊂ Hom(w_A, z), with an optional left action.

    The products ``w* v`` must land in A; nothing projects them there.
    """

    alg: MMAlgebra
    vecs: list
    left: object = None      # a -> End(z), for bimodules

    def ip(self, v: Mor, w: Mor) -> Mor:
        return mor_star(w) @ v


@dataclass
class RelTensor:
    dim: int
    mode: str
    gram: np.ndarray         # Gram of the representing vectors (trace pairing)
    pairs: list = field(default_factory=list)


def rel_tensor(V: Correspondence, W: Correspondence, mode="oracle", tol: TolerancePolicy = DEFAULT):
    """V ⊠_A W for V a right A-module and W an A-B bimodule (left action ``W.left``).

    ``oracle``: Gram matrix of all v⊗w under ⟨v⊗w, v'⊗w'⟩ = Tr(w'* π(v'*v) w),
    rank = dimension.  ``fast``: multiplicities, with the explicit orthonormal
    family v_{t,c} ⊗ w for w in π(f_t)W.
    """
    if W.left is None:
        raise ShapeMismatch("W needs a left action to form V ⊠ W")
    if mode == "oracle":
        pairs = [(a, b) for a in range(len(V.vecs)) for b in range(len(W.vecs))]
        ipv = [[V.ip(v, v2) for v2 in V.vecs] for v in V.vecs]
        wl = {}
        n = len(pairs)
        g = np.zeros((n, n), complex)
        for p, (a, b) in enumerate(pairs):
            for q, (a2, b2) in enumerate(pairs):
                key = (a, a2)
                if key not in wl:
                    wl[key] = W.left(ipv[a][a2])
                g[q, p] = mtrace(mor_star(W.vecs[b2]) @ wl[key] @ W.vecs[b])
        _, rank = gram_orthonormal_basis(g, tol)
        return RelTensor(rank, mode, g, pairs)
    if mode == "fast":
        wed = V.alg.wed
        family = []
        for t, f in enumerate(wed.minimal):
            vf = [v @ f for v in V.vecs]
            rv = Realm(V.alg.realm.cat, [wed.obj] * wed.n, list(wed.minimal))
            von = orthonormalize(rv, t, [v for v in vf if v.norm() > 1e-12], tol)
            pf = W.left(f)
            wf = [pf @ w for w in W.vecs]
            g = np.array([[np.real_if_close(mtrace(mor_star(a) @ b)) for b in wf] for a in wf])
            iso, r = gram_orthonormal_basis(g, tol) if wf else (None, 0)
            for v in von:
                for c in range(r):
                    family.append((v, sum((wf[i].scale(iso[i, c]) for i in range(1, len(wf))),
                                          wf[0].scale(iso[0, c]))))
        n = len(family)
        g = np.zeros((n, n), complex)
        for p, (v, w) in enumerate(family):
            for q, (v2, w2) in enumerate(family):
                g[q, p] = mtrace(mor_star(w2) @ W.left(V.ip(v, v2)) @ w)
        return RelTensor(n, mode, g, family)
    raise ValueError(f"unknown mode {mode!r}")


def tensor_comparison(V: Correspondence, W: Correspondence, image, tol: TolerancePolicy = DEFAULT):
    """Compare V ⊠ W with a concrete target via ``image(v, w)``.

    Returns the oracle dimension, the rank of the images and the worst
    mismatch between the tensor Gram and the Gram of the images.
    """
    rt = rel_tensor(V, W, "oracle", tol)
    imgs = [image(V.vecs[a], W.vecs[b]) for a, b in rt.pairs]
    flat = np.array([mor_vec(m) for m in imgs])
    g_img = np.conj(flat) @ flat.T
    mismatch = float(np.abs(g_img - rt.gram).max())
    sv = np.linalg.svd(flat, compute_uv=False)
    rank = int(np.sum(sv > 1e-9 * max(sv.max(), 1.0)))
    return {"dim": rt.dim, "image_rank": rank, "gram_mismatch": mismatch}


def h_tensor_check(lev: Level, tol: TolerancePolicy = DEFAULT) -> dict:
    """H_k ⊠_{A_k} H_k against Y_k = Hom(x_k, Q_kQ_k x_k) through ξ⊠η ↦ Q(ξ)η.

    Left A_k acts on the second factor through Q; both modes of the tensor
    must reach the hom-space dimension and the Grams must agree.
    """
    x = lev.x
    A = MMAlgebra("A", wedderburn_of_A(x), lambda rng: random_mor(x, x, rng))
    basis = lev.h_basis()
    V = Correspondence(A, basis)
    W = Correspondence(A, basis, left=lev.Qf)
    rep = tensor_comparison(V, W, lambda v, w: lev.Qf(v) @ w, tol)
    fast = rel_tensor(V, W, "fast", tol)
    rep["fast_dim"] = fast.dim
    # an orthonormal fast family of the right size is a unitary onto the oracle quotient
    rep["fast_orthonormality"] = float(np.abs(fast.gram - np.eye(fast.dim)).max())
    rep["target_dim"] = hom_dim(x, lev.qqx)
    return rep


# -- induction along inclusions -------------------------------------------------------

def induction_functor(A: MMAlgebra, B: MMAlgebra, iota, name="Ind", rng_seed=0,
                      tol: TolerancePolicy = DEFAULT) -> CFunctor:
    """•⊠_A B: R_A → R_B for a unital inclusion ``iota``; generators span ι(f_j) B f_t."""
    one = iota(Mor.identity(A.obj))
    if mdist(one, Mor.identity(B.obj)) > tol.eps_num:
        raise NotUnital(f"ι(1) differs from 1 by {mdist(one, Mor.identity(B.obj)):.2e}")
    ra, rb = A.realm, B.realm

    def spanners(j, t):
        head = iota(A.wed.minimal[j])
        return [head @ v for v in B.wed.units[t]]

    return make_cfunctor(name, ra, rb, iota, spanners, tol)


def same_carrier(j, t, b, g):
    return g


def square_connection(left: CFunctor, right: CFunctor, report=None) -> NatTrans:
    """Unitary between two composites of inductions sharing ends.

    Both composites realize ι(f_j) D f_t inside End(w_D); they agree exactly
    when the square of inclusions commutes, which the carrier residual
    certifies.
    """
    rep = {} if report is None else report
    eta = nat_from_carrier(left, right, same_carrier, rep)
    if rep["carrier"] > 1e-8:
        raise NonCommutingSquare(f"square fails by {rep['carrier']:.2e}")
    return eta


def check_square(iotas_ab_bd, iotas_ac_cd, A_obj, rng, n=4) -> float:
    """Residual of ι_BD ι_AB = ι_CD ι_AC on random elements of End(A_obj)."""
    (ab, bd), (ac, cd) = iotas_ab_bd, iotas_ac_cd
    worst = 0.0
    for _ in range(n):
        a = Mor(A_obj, A_obj, [rng.standard_normal((m, m)) for m in A_obj.mult])
        worst = max(worst, mdist(bd(ab(a)), cd(ac(a))))
    return worst


def corr_category(alg: MMAlgebra) -> SCat:
    """The category of right modules, one simple per block."""
    return alg.realm.cat


def pp_check(sigmas, ident: Mor) -> float:
    """Σ σσ* = 1 for a Pimsner-Popa family."""
    if not sigmas:
        raise BadBasis("empty Pimsner-Popa family")
    acc = sigmas[0] @ mor_star(sigmas[0])
    for s in sigmas[1:]:
        acc = acc + s @ mor_star(s)
    err = mdist(acc, ident)
    if err > 1e-8:
        raise BadBasis(f"Σ σσ* deviates from 1 by {err:.2e}")
    return err
