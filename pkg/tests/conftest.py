from functools import lru_cache

from qsplit.gen import dual_pair, zero_cell
from qsplit.qsys import canonicalize, from_dual_pair
from qsplit.scenario import fixture_generate

SHAPES = {
    "trivial": ([[1]], "tensor", 1, 3),
    "amp2": ([[2]], "tensor", 2, 4),
    "amp3": ([[3]], "tensor", 3, 2),
    "fib": ([[1, 1], [1, 0]], "fib", 1, 4),
}


@lru_cache(maxsize=None)
def pair(name, depth=None):
    gm, kind, n, K = SHAPES[name]
    return dual_pair(zero_cell([gm] * (depth or K)), kind, n)


@lru_cache(maxsize=None)
def qsys(name, depth=None):
    """Canonical Q = X ⊠ X̄ for a named shape."""
    return canonicalize(from_dual_pair(pair(name, depth)))


@lru_cache(maxsize=None)
def fixture_q(kind, seed=0):
    return fixture_generate(kind, seed).qsystem()
