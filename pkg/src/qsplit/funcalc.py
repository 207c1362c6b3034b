"""Functors between semisimple categories and natural transformations.

A functor is determined up to unitary isomorphism by its multiplicity
matrix.  We fix a concrete morphism action:

* canonical: block ``t`` of ``F(f)`` is ``⊕_j I_{A[t][j]} ⊗ f_j`` with ``j``
  ascending and copies in order;
* chain: a composite, applied right to left.  At a target simple the
  resulting ordering is (middle simple, outer copy, inner copy).

Natural transformations store one component per source simple.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CategoryMismatch, FunctorMismatch, NotIsomorphic
from .numkit import DEFAULT, TolerancePolicy, block_diag, dag, opnorm
from .sscat import Mor, Obj, SCat, mor_compose, mor_star, random_mor, simple_resolution

_anon = itertools.count()


@dataclass(frozen=True, eq=False)
class Functor:
    src: SCat
    dst: SCat
    mult: np.ndarray
    name: str = ""
    kind: str = "canonical"
    factors: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        mult = np.asarray(self.mult, dtype=int)
        if mult.shape != (self.dst.n, self.src.n):
            raise ValueError(f"mult shape {mult.shape} != {(self.dst.n, self.src.n)}")
        if (mult < 0).any():
            raise ValueError("negative multiplicity")
        object.__setattr__(self, "mult", mult)
        if not self.name:
            object.__setattr__(self, "name", f"F{next(_anon)}")

    @property
    def is_identity(self):
        return (self.kind != "chain" and self.src == self.dst
                and np.array_equal(self.mult, np.eye(self.src.n, dtype=int)))

    def flat(self):
        """Non-identity canonical factors, outermost first."""
        if self.kind == "chain":
            out = []
            for f in self.factors:
                out.extend(f.flat())
            return tuple(out)
        return () if self.is_identity else (self,)

    def signature(self):
        return tuple(f.name for f in self.flat())

    def same_as(self, other):
        return (self.src == other.src and self.dst == other.dst
                and self.signature() == other.signature()
                and np.array_equal(self.mult, other.mult))

    def __call__(self, arg):
        return functor_apply(self, arg)

    def __repr__(self):
        sig = "∘".join(self.signature()) or "id"
        return f"Functor({sig}: {self.src.name}->{self.dst.name})"


def identity_functor(cat: SCat) -> Functor:
    return Functor(cat, cat, np.eye(cat.n, dtype=int), name=f"id[{cat.name}]")


def canonical(src: SCat, dst: SCat, mult, name="", kind="canonical", **meta) -> Functor:
    return Functor(src, dst, mult, name=name, kind=kind, meta=meta)


def _apply_obj(F: Functor, x: Obj) -> Obj:
    return Obj(F.dst, tuple(int(v) for v in F.mult @ np.array(x.mult, dtype=int)))


def _apply_canonical(F: Functor, f: Mor) -> Mor:
    src, dst = _apply_obj(F, f.src), _apply_obj(F, f.dst)
    blocks = []
    for t in range(F.dst.n):
        parts = []
        for j in range(F.src.n):
            a = F.mult[t, j]
            if a:
                parts.append(np.kron(np.eye(a), f.blocks[j]) if a > 1 else f.blocks[j])
        if parts:
            blocks.append(block_diag(parts))
        else:
            blocks.append(np.zeros((dst.mult[t], src.mult[t])))
    return Mor(src, dst, blocks)


def functor_apply(F: Functor, arg):
    cat = arg.cat if isinstance(arg, Obj) else arg.src.cat
    if cat != F.src:
        raise CategoryMismatch(f"{F!r} cannot act on an object of {cat!r}")
    if F.kind == "chain":
        for g in reversed(F.factors):
            arg = functor_apply(g, arg)
        return arg
    if isinstance(arg, Obj):
        return _apply_obj(F, arg)
    if F.is_identity:
        return arg
    return _apply_canonical(F, arg)


def functor_compose(G: Functor, F: Functor, name="") -> Functor:
    """``G ∘ F`` (apply F first)."""
    if F.dst != G.src:
        raise CategoryMismatch(f"cannot compose {G!r} after {F!r}")
    if F.is_identity:
        return G
    if G.is_identity:
        return F
    return Functor(F.src, G.dst, G.mult @ F.mult, name=name or f"({G.name}∘{F.name})",
                   kind="chain", factors=(G, F))


def chain(*fs: Functor) -> Functor:
    """``chain(A, B, C) = A ∘ B ∘ C``."""
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = functor_compose(g, out)
    return out


def bifaithful_check(F: Functor) -> bool:
    m = F.mult
    return bool((m.sum(axis=0) > 0).all() and (m.sum(axis=1) > 0).all())


class NatTrans:
    """Natural transformation ``src => dst`` with components at simples."""

    __slots__ = ("src", "dst", "comps")

    def __init__(self, src: Functor, dst: Functor, comps):
        if src.src != dst.src or src.dst != dst.dst:
            raise FunctorMismatch("natural transformation between functors of different type")
        comps = tuple(comps)
        if len(comps) != src.src.n:
            raise ValueError("one component per source simple expected")
        for s, c in enumerate(comps):
            want_src = functor_apply(src, src.src.simple(s))
            want_dst = functor_apply(dst, src.src.simple(s))
            if c.src != want_src or c.dst != want_dst:
                raise ValueError(f"component {s} has endpoints {c!r}")
        self.src, self.dst, self.comps = src, dst, comps

    @classmethod
    def identity(cls, F: Functor):
        return cls(F, F, [Mor.identity(functor_apply(F, F.src.simple(s))) for s in range(F.src.n)])

    @classmethod
    def from_blocks(cls, F: Functor, G: Functor, blocks):
        """``blocks[s][t]`` is the block at target simple ``t`` of the s-component."""
        comps = []
        for s in range(F.src.n):
            x = F.src.simple(s)
            comps.append(Mor(functor_apply(F, x), functor_apply(G, x), blocks[s]))
        return cls(F, G, comps)

    def __matmul__(self, other):
        return vertical(self, other)

    @property
    def star(self):
        return nat_star(self)

    def __add__(self, other):
        _check_parallel(self, other)
        return NatTrans(self.src, self.dst, [a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        _check_parallel(self, other)
        return NatTrans(self.src, self.dst, [a - b for a, b in zip(self.comps, other.comps)])

    def scale(self, c):
        return NatTrans(self.src, self.dst, [m.scale(c) for m in self.comps])

    def norm(self):
        return max((m.norm() for m in self.comps), default=0.0)

    def retype(self, src: Functor, dst: Functor):
        """Same components, relabelled endpoint functors with identical layout."""
        return NatTrans(src, dst, self.comps)

    def __repr__(self):
        return f"NatTrans({self.src!r} => {self.dst!r})"


def _check_parallel(a, b):
    if not (a.src.same_as(b.src) and a.dst.same_as(b.dst)):
        raise FunctorMismatch("natural transformations are not parallel")


def nat_distance(a: NatTrans, b: NatTrans) -> float:
    _check_parallel(a, b)
    return max((opnorm(x - y) for m, n in zip(a.comps, b.comps)
                for x, y in zip(m.blocks, n.blocks)), default=0.0)


def nat_extend(eta: NatTrans, x: Obj) -> Mor:
    """``η_x = Σ_u G(u) η_s F(u)*`` over the coordinate resolution of ``x``."""
    F, G = eta.src, eta.dst
    if x.cat != F.src:
        raise CategoryMismatch("object outside the source category")
    fx, gx = functor_apply(F, x), functor_apply(G, x)
    out = [np.zeros((gx.mult[t], fx.mult[t]), complex) for t in range(F.dst.n)]
    for (s, _), u in simple_resolution(x):
        fu, gu = functor_apply(F, u), functor_apply(G, u)
        comp = eta.comps[s]
        for t in range(F.dst.n):
            if comp.blocks[t].size:
                out[t] += gu.blocks[t] @ comp.blocks[t] @ dag(fu.blocks[t])
    return Mor(fx, gx, out)


def vertical(kappa: NatTrans, eta: NatTrans) -> NatTrans:
    """``κ ∘ η``: apply η first."""
    if not eta.dst.same_as(kappa.src):
        raise FunctorMismatch(f"cannot stack {kappa!r} on {eta!r}")
    return NatTrans(eta.src, kappa.dst,
                    [mor_compose(k, e) for k, e in zip(kappa.comps, eta.comps)])


def whisker_left(F: Functor, eta: NatTrans) -> NatTrans:
    """``F η : F∘G => F∘H``."""
    if F.src != eta.src.dst:
        raise FunctorMismatch("whisker functor does not match")
    return NatTrans(functor_compose(F, eta.src), functor_compose(F, eta.dst),
                    [functor_apply(F, c) for c in eta.comps])


def whisker_right(eta: NatTrans, F: Functor) -> NatTrans:
    """``η F : G∘F => H∘F``."""
    if F.dst != eta.src.src:
        raise FunctorMismatch("whisker functor does not match")
    return NatTrans(functor_compose(eta.src, F), functor_compose(eta.dst, F),
                    [nat_extend(eta, functor_apply(F, F.src.simple(s))) for s in range(F.src.n)])


def nat_star(eta: NatTrans) -> NatTrans:
    return NatTrans(eta.dst, eta.src, [mor_star(c) for c in eta.comps])


def nat_ops(op: str, *args):
    table = {"vertical": vertical, "whisker_left": whisker_left,
             "whisker_right": whisker_right, "star": nat_star}
    if op not in table:
        raise ValueError(f"unknown natural-transformation op {op!r}")
    return table[op](*args)


def solve_natural_unitary(F: Functor, G: Functor) -> NatTrans:
    """Identity-matching coordinate bases between functors with equal mult."""
    if F.src != G.src or F.dst != G.dst or not np.array_equal(F.mult, G.mult):
        raise NotIsomorphic("multiplicity matrices differ")
    comps = []
    for s in range(F.src.n):
        x = F.src.simple(s)
        comps.append(Mor(functor_apply(F, x), functor_apply(G, x),
                         [np.eye(m) for m in functor_apply(F, x).mult]))
    return NatTrans(F, G, comps)


def unitarity_residual(eta: NatTrans) -> float:
    r = 0.0
    for c in eta.comps:
        for b in c.blocks:
            if b.shape[0] != b.shape[1]:
                return float("inf")
            if b.size:
                n = b.shape[0]
                r = max(r, opnorm(dag(b) @ b - np.eye(n)), opnorm(b @ dag(b) - np.eye(n)))
    return r


def random_objects(cat: SCat, rng, count, max_mult=2):
    return [Obj(cat, tuple(int(v) for v in rng.integers(0, max_mult + 1, cat.n)))
            for _ in range(count)]


def naturality_residual(eta: NatTrans, n_tests=20, seed=0) -> float:
    """Worst ``‖G(f) η_x − η_y F(f)‖`` over seeded random morphisms ``f: x -> y``."""
    rng = np.random.default_rng(seed)
    cat = eta.src.src
    worst = 0.0
    for _ in range(n_tests):
        x, y = random_objects(cat, rng, 2)
        f = random_mor(x, y, rng)
        lhs = mor_compose(functor_apply(eta.dst, f), nat_extend(eta, x))
        rhs = mor_compose(nat_extend(eta, y), functor_apply(eta.src, f))
        scale = max(f.norm(), 1.0)
        worst = max(worst, max((opnorm(a - b) for a, b in zip(lhs.blocks, rhs.blocks)),
                               default=0.0) / scale)
    return worst


def functor_check(F: Functor, n_tests=10, seed=0, tol: TolerancePolicy = DEFAULT) -> float:
    """Residual of ``F(g f) = F(g) F(f)`` and ``F(f*) = F(f)*`` on random data."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_tests):
        x, y, z = random_objects(F.src, rng, 3)
        f, g = random_mor(x, y, rng), random_mor(y, z, rng)
        a = functor_apply(F, mor_compose(g, f))
        b = mor_compose(functor_apply(F, g), functor_apply(F, f))
        c = functor_apply(F, mor_star(f))
        d = mor_star(functor_apply(F, f))
        for p, q in ((a, b), (c, d)):
            worst = max(worst, max((opnorm(u - v) for u, v in zip(p.blocks, q.blocks)), default=0.0))
    return worst
