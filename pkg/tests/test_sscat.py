import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsplit.errors import ObjectMismatch
from qsplit.numkit import block_diag, opnorm, random_unitary
from qsplit.sscat import (Mor, Obj, SCat, mor_compose, mor_distance, mor_metrics, mor_star,
                          random_mor, simple_resolution)

CAT = SCat(("a", "b"), "C")


def dense(f: Mor):
    # flattened full-matrix oracle
    return block_diag(f.blocks)


def test_labels_must_be_distinct():
    with pytest.raises(ValueError):
        SCat(("a", "a"))
    with pytest.raises(ValueError):
        Obj(CAT, (1,))


def test_identity_is_unit():
    rng = np.random.default_rng(0)
    x, y = Obj(CAT, (2, 1)), Obj(CAT, (1, 3))
    f = random_mor(x, y, rng)
    assert mor_distance(mor_compose(Mor.identity(y), f), f) == 0
    assert mor_distance(mor_compose(f, Mor.identity(x)), f) == 0


def test_compose_matches_flattened_product():
    rng = np.random.default_rng(1)
    x, y, z = Obj(CAT, (2, 1)), Obj(CAT, (1, 2)), Obj(CAT, (3, 2))
    f, g = random_mor(x, y, rng), random_mor(y, z, rng)
    assert np.abs(dense(mor_compose(g, f)) - dense(g) @ dense(f)).max() < 1e-12


def test_compose_checks_objects():
    rng = np.random.default_rng(2)
    f = random_mor(Obj(CAT, (1, 1)), Obj(CAT, (2, 1)), rng)
    with pytest.raises(ObjectMismatch):
        mor_compose(f, f)


def test_star_of_identity_and_unitary():
    x = Obj(CAT, (2, 3))
    assert mor_distance(mor_star(Mor.identity(x)), Mor.identity(x)) == 0
    rng = np.random.default_rng(3)
    u = Mor(x, x, [random_unitary(2, rng), random_unitary(3, rng)])
    assert mor_distance(mor_compose(mor_star(u), u), Mor.identity(x)) < 1e-12


def test_resolution_examples():
    s = CAT.simple(0)
    res = simple_resolution(s)
    assert len(res) == 1 and mor_distance(res[0][1], Mor.identity(s)) == 0
    x = Obj(CAT, (2, 1))
    res = simple_resolution(x)
    assert len(res) == 3
    acc = Mor.zero(x, x)
    for _, u in res:
        acc = acc + u @ mor_star(u)
    assert mor_distance(acc, Mor.identity(x)) == 0


def test_conjugated_resolution_still_resolves():
    rng = np.random.default_rng(4)
    x = Obj(CAT, (2, 2))
    w = Mor(x, x, [random_unitary(2, rng), random_unitary(2, rng)])
    acc = Mor.zero(x, x)
    for _, u in simple_resolution(x):
        v = w @ u
        acc = acc + v @ mor_star(v)
    assert mor_distance(acc, Mor.identity(x)) < 1e-12


def test_metrics_examples():
    x = Obj(CAT, (2, 1))
    assert mor_metrics(Mor.identity(x)) == (1.0, True, True)
    m = mor_metrics(Mor.identity(x).scale(2))
    assert m.norm == pytest.approx(2) and m.positive and not m.unitary
    with pytest.raises(ObjectMismatch):
        mor_metrics(random_mor(x, Obj(CAT, (1, 1)), np.random.default_rng(0)))


def test_end_dimension():
    x = Obj(CAT, (3, 2))
    assert sum(b.size for b in Mor.identity(x).blocks) == 9 + 4


def test_zero_blocks_are_kept():
    x = Obj(CAT, (0, 2))
    f = Mor.identity(x)
    assert f.blocks[0].shape == (0, 0) and len(f.blocks) == 2


mults = st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda m: sum(m) > 0)


@settings(max_examples=40, deadline=None)
@given(mults, mults, st.integers(0, 10 ** 6))
def test_star_laws(m1, m2, seed):
    rng = np.random.default_rng(seed)
    x, y = Obj(CAT, m1), Obj(CAT, m2)
    f = random_mor(x, y, rng)
    g = random_mor(y, x, rng)
    assert mor_distance(mor_star(mor_star(f)), f) == 0
    assert mor_distance(mor_star(g @ f), mor_star(f) @ mor_star(g)) < 1e-12
    n = f.norm()
    assert abs(mor_star(f).norm() - n) < 1e-9 * max(n, 1)
    assert abs((mor_star(f) @ f).norm() - n * n) < 1e-9 * max(n * n, 1)
    assert mor_metrics(mor_star(f) @ f).positive


@settings(max_examples=25, deadline=None)
@given(mults, st.integers(0, 10 ** 6))
def test_positive_matches_eigen_oracle(m, seed):
    rng = np.random.default_rng(seed)
    x = Obj(CAT, m)
    f = random_mor(x, x, rng)
    h = f + mor_star(f)
    eig_ok = all(np.linalg.eigvalsh(b)[0] >= -1e-9 * max(opnorm(b), 1) for b in h.blocks if b.size)
    assert mor_metrics(h).positive == eig_ok
