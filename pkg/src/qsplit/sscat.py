"""Finite semisimple C*-categories with explicit block morphisms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ObjectMismatch
from .numkit import DEFAULT, TolerancePolicy, block_diag, dag, opnorm


@dataclass(frozen=True)
class SCat:
    labels: tuple
    name: str = ""

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValueError("a category needs at least one simple")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate simple labels in {labels}")

    @property
    def n(self):
        return len(self.labels)

    def simple(self, i):
        m = [0] * self.n
        m[i] = 1
        return Obj(self, tuple(m))

    def __repr__(self):
        return f"SCat({self.name or '?'}, n={self.n})"


@dataclass(frozen=True)
class Obj:
    cat: SCat
    mult: tuple

    def __post_init__(self):
        mult = tuple(int(m) for m in self.mult)
        object.__setattr__(self, "mult", mult)
        if len(mult) != self.cat.n:
            raise ValueError(f"mult length {len(mult)} != {self.cat.n}")
        if any(m < 0 for m in mult):
            raise ValueError(f"negative multiplicity in {mult}")

    @property
    def dim(self):
        return sum(self.mult)

    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.mult)]).astype(int)


class Mor:
    """Morphism ``src -> dst``; ``blocks[i]`` has shape ``dst.mult[i] x src.mult[i]``."""

    __slots__ = ("src", "dst", "blocks")

    def __init__(self, src: Obj, dst: Obj, blocks):
        if src.cat != dst.cat:
            raise ObjectMismatch("endpoints live in different categories")
        blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)
        if len(blocks) != src.cat.n:
            raise ValueError("one block per simple expected")
        for i, b in enumerate(blocks):
            if b.shape != (dst.mult[i], src.mult[i]):
                raise ValueError(
                    f"block {i} has shape {b.shape}, expected {(dst.mult[i], src.mult[i])}")
        self.src, self.dst, self.blocks = src, dst, blocks

    @classmethod
    def identity(cls, x: Obj):
        return cls(x, x, [np.eye(m) for m in x.mult])

    @classmethod
    def zero(cls, src: Obj, dst: Obj):
        return cls(src, dst, [np.zeros((dst.mult[i], src.mult[i])) for i in range(src.cat.n)])

    def dense(self):
        return block_diag(self.blocks)

    def __add__(self, other):
        _same_ends(self, other)
        return Mor(self.src, self.dst, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        _same_ends(self, other)
        return Mor(self.src, self.dst, [a - b for a, b in zip(self.blocks, other.blocks)])

    def scale(self, c):
        return Mor(self.src, self.dst, [c * b for b in self.blocks])

    def __matmul__(self, other):
        return mor_compose(self, other)

    @property
    def star(self):
        return mor_star(self)

    def norm(self):
        return max((opnorm(b) for b in self.blocks), default=0.0)

    def __repr__(self):
        return f"Mor({self.src.mult} -> {self.dst.mult})"


def _same_ends(f, g):
    if f.src != g.src or f.dst != g.dst:
        raise ObjectMismatch("morphisms have different endpoints")


def mor_compose(g: Mor, f: Mor) -> Mor:
    if f.dst != g.src:
        raise ObjectMismatch(f"cannot compose {g!r} after {f!r}")
    return Mor(f.src, g.dst, [b @ a for b, a in zip(g.blocks, f.blocks)])


def mor_star(f: Mor) -> Mor:
    return Mor(f.dst, f.src, [dag(b) for b in f.blocks])


def simple_resolution(x: Obj):
    """Coordinate isometries ``simple_i -> x``, ordered by simple then copy."""
    out = []
    for i, m in enumerate(x.mult):
        s = x.cat.simple(i)
        for c in range(m):
            blocks = [np.zeros((x.mult[j], s.mult[j])) for j in range(x.cat.n)]
            blocks[i][c, 0] = 1.0
            out.append(((i, c), Mor(s, x, blocks)))
    return out


class MorMetrics(NamedTuple):
    norm: float
    positive: bool
    unitary: bool


def mor_metrics(f: Mor, tol: TolerancePolicy = DEFAULT) -> MorMetrics:
    if f.src != f.dst:
        raise ObjectMismatch("positivity and unitarity need an endomorphism")
    norm = f.norm()
    scale = max(norm, 1.0)
    positive = True
    unitary = True
    for b in f.blocks:
        if b.size == 0:
            continue
        if opnorm(b - dag(b)) > tol.eps_num * scale:
            positive = False
        elif np.linalg.eigvalsh((b + dag(b)) / 2)[0] < -tol.eps_num * scale:
            positive = False
        n = b.shape[0]
        if opnorm(dag(b) @ b - np.eye(n)) > tol.eps_num or opnorm(b @ dag(b) - np.eye(n)) > tol.eps_num:
            unitary = False
    return MorMetrics(norm, positive, unitary)


def random_mor(src: Obj, dst: Obj, rng) -> Mor:
    return Mor(src, dst, [rng.standard_normal((dst.mult[i], src.mult[i]))
                          + 1j * rng.standard_normal((dst.mult[i], src.mult[i]))
                          for i in range(src.cat.n)])


def mor_distance(f: Mor, g: Mor) -> float:
    _same_ends(f, g)
    return max((opnorm(a - b) for a, b in zip(f.blocks, g.blocks)), default=0.0)
