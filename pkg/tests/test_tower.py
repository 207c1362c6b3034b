import numpy as np
import pytest
from conftest import qsys
from hypothesis import given, settings
from hypothesis import strategies as st

from qsplit.errors import LevelOutOfRange
from qsplit.gen import zero_cell
from qsplit.qsys import identity_qsystem
from qsplit.sscat import Mor, mor_star
from qsplit.tower import (Level, build_A, build_C, build_H, build_S_phi, c_star_identity,
                          cond_exp, flatten_two_cell, h_algebra, hom_dim, inclusion_report,
                          mdist, mor_from_vec, mor_vec, pp_basis, tower_objects, wedderburn,
                          wedderburn_of_A)
from qsplit.uc2 import TwoCell

FIB = [[1, 1], [1, 0]]


def ident_q(depth=3, g=FIB):
    return identity_qsystem(zero_cell([g] * depth))


def test_A_dimensions():
    assert all(build_A(zero_cell([[[1]]] * 3), k).dim == 1 for k in range(4))
    amp = zero_cell([[[2]]] * 4)
    assert [build_A(amp, k).dim for k in range(5)] == [4 ** k for k in range(5)]
    fib = zero_cell([FIB] * 3)
    for k in range(4):
        # block dims are Γ^k (1, 1) by matrix powers
        want = np.linalg.matrix_power(np.array(FIB), k) @ [1, 1]
        assert list(build_A(fib, k).block_dims) == want.tolist()
    with pytest.raises(LevelOutOfRange):
        build_A(fib, 4)


def test_A_inclusion_is_unital():
    A = build_A(zero_cell([FIB] * 2), 1)
    up = A.include(A.unit())
    assert mdist(up, Mor.identity(up.src)) == 0


def test_identity_q_H_is_A():
    Q = ident_q()
    for k in range(3):
        H = build_H(Q, k)
        assert H.dim == build_A(Q.base, k).dim
        lev = H.level
        rng = np.random.default_rng(k)
        a, b = lev.random_h(rng), lev.random_h(rng)
        assert mdist(lev.prod(a, b), a @ b) < 1e-12
        assert mdist(lev.dagger(a), mor_star(a)) < 1e-12


def test_amp2_H_dimension():
    Q = qsys("amp2")
    for k in range(4):
        assert build_H(Q, k).dim == 4 * build_A(Q.base, k).dim


@pytest.mark.parametrize("k", [0, 1, 2])
def test_inclusion_compatibility_fib(k):
    rep = inclusion_report(qsys("fib"), k)
    assert rep["isometry"] < 1e-9 and rep["bimodule"] < 1e-9


@pytest.mark.parametrize("name,ks", [("amp2", [0, 1, 2, 3]), ("fib", [0, 1, 2, 3]),
                                     ("amp3", [0, 1]), ("trivial", [0, 1, 2, 3])])
def test_h_algebra_laws(name, ks):
    Q = qsys(name)
    for k in ks:
        r = h_algebra(Level(Q, k))
        worst = max(r["associativity"], r["unit"], r["dagger_involution"],
                    r["dagger_antimultiplicative"], r["phi1_multiplicative"], r["phi1_star"])
        assert worst < 1e-9, (k, r)
        if r["dim"] <= 128:
            assert r["mode"] == "full"


def test_identity_q_products():
    r = h_algebra(Level(ident_q(), 2))
    assert r["mode"] == "full" and r["associativity"] < 1e-12


def test_c_star_identity():
    for name in ("amp2", "fib"):
        Q = qsys(name)
        for k in range(3):
            assert c_star_identity(Level(Q, k), np.random.default_rng(k)) < 1e-9


@pytest.mark.parametrize("name,k", [("amp2", 0), ("amp2", 1), ("amp2", 2), ("fib", 2), ("amp3", 1)])
def test_S_matches_H(name, k):
    lev = Level(qsys(name), k)
    S = build_S_phi(lev)
    assert S.dim == lev.h_dim
    assert S.kernel_dim == lev.h_dim
    assert max(S.roundtrip_h, S.roundtrip_s, S.membership) < 1e-9


def test_S_of_identity_q():
    lev = Level(ident_q(), 2)
    S = build_S_phi(lev)
    assert S.dim == build_A(lev.Qsys.base, 2).dim


def test_phi1_multiplicative_random():
    lev = Level(qsys("fib"), 2)
    rng = np.random.default_rng(9)
    for _ in range(5):
        a, b = lev.random_h(rng), lev.random_h(rng)
        assert mdist(lev.phi1(lev.prod(a, b)), lev.phi1(a) @ lev.phi1(b)) < 1e-9


def test_cond_exp_identity_q():
    r = cond_exp(Level(ident_q(), 1))
    assert r["d_norm"] == 1
    lev = Level(ident_q(), 1)
    xi = lev.random_h(np.random.default_rng(0))
    assert mdist(lev.E(xi), xi) < 1e-12


@pytest.mark.parametrize("name", ["amp2", "amp3", "fib"])
def test_cond_exp_properties(name):
    Q = qsys(name)
    for k in range(min(Q.depth, 3) + 1):
        r = cond_exp(Level(Q, k))
        assert max(r["unit"], r["bimodule"], r["inclusion"], r["inner_product"]) < 1e-9
        assert r["faithful_min"] > 1e-9
        assert r["index_min_eig"] >= -1e-9


def test_amp2_expectation_is_a_partial_trace():
    # Q(s) = C²⊗C², the unit is √2·vec(1₂), so E(ξ) = tr(ξ as 2×2) / (2√2)
    lev = Level(qsys("amp2"), 0)
    assert cond_exp(lev)["d_norm"] == pytest.approx(4)
    xi = lev.random_h(np.random.default_rng(1))
    v = mor_vec(xi).reshape(2, 2)
    i = mor_vec(lev.i).reshape(2, 2)
    # up to a global phase on i, i is proportional to the identity
    phase = i[0, 0] / abs(i[0, 0])
    assert np.allclose(i / phase, np.sqrt(2) * np.eye(2))
    want = np.conj(phase) * np.trace(v) / (2 * np.sqrt(2))
    assert abs(mor_vec(lev.E(xi))[0] - want) < 1e-12


def test_pp_basis_identity_q():
    lev = Level(ident_q(), 1)
    r = pp_basis(lev)
    assert r["partition"] == 0 and r["size"] == sum(lev.x.mult)


@pytest.mark.parametrize("name", ["amp2", "fib"])
def test_pp_basis(name):
    Q = qsys(name)
    for k in range(3):
        lev = Level(Q, k)
        r = pp_basis(lev)
        assert r["size"] == sum(lev.qx.mult)
        assert max(r["partition"], r["reconstruction"], r["surjectivity"]) < 1e-9


def test_flatten_examples():
    Q = qsys("amp2")
    ident = TwoCell.identity(Q.q)
    assert flatten_two_cell(ident, 1)["drift"] == 0
    for k in range(3):
        assert flatten_two_cell(Q.m, k)["drift"] < 1e-9
    comps = [Q.m.at(j) if j != 2 else Q.m.at(j).scale(1.05) for j in range(Q.depth + 1)]
    broken = TwoCell(Q.qq, Q.q, 0, comps)
    assert flatten_two_cell(broken, 1)["drift"] > 1e-3
    assert flatten_two_cell(broken, 0)["drift"] < 1e-9


def test_wedderburn_of_A():
    x = tower_objects(zero_cell([FIB] * 3))[3]
    w = wedderburn_of_A(x)
    assert w.block_dims == list(x.mult)
    A = build_A(zero_cell([FIB] * 3), 3)
    w2 = wedderburn(A.random, x, A.dim, seed=3)
    assert sorted(w2.block_dims) == sorted(x.mult)


def test_wedderburn_of_S():
    lev = Level(qsys("amp2"), 1)
    w = wedderburn(lambda rng: lev.phi1(lev.random_h(rng)), lev.qx, lev.h_dim)
    assert w.dim == lev.h_dim
    for vs, f, p in zip(w.units, w.minimal, w.central):
        acc = vs[0] @ mor_star(vs[0])
        for v in vs[1:]:
            acc = acc + v @ mor_star(v)
        assert mdist(acc, p) < 1e-9 and mdist(f @ f, f) < 1e-9


def test_wedderburn_of_identity_q_S():
    lev = Level(ident_q(), 2)
    w = wedderburn(lambda rng: lev.phi1(lev.random_h(rng)), lev.qx, lev.h_dim)
    assert sorted(w.block_dims) == sorted(lev.x.mult)


def test_C():
    assert build_C(Level(ident_q(), 1))["dim"] == build_A(ident_q().base, 1).dim
    Q = qsys("amp2")
    for k in range(3):
        r = build_C(Level(Q, k))
        assert r["dim"] == (4 * 2 ** k) ** 2
        assert r["QA_in_S"] < 1e-9 and r["unital"] < 1e-9 and r["star"] < 1e-9


def test_E_restricts_to_identity_on_A():
    lev = Level(qsys("fib"), 2)
    a = lev.random_h(np.random.default_rng(0))
    a = mor_star(lev.i) @ a     # any element of A_k
    assert mdist(lev.E(lev.i @ a), a) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_vec_round_trip(seed):
    lev = Level(qsys("fib"), 1)
    xi = lev.random_h(np.random.default_rng(seed))
    assert mdist(mor_from_vec(xi.src, xi.dst, mor_vec(xi)), xi) == 0
    assert mor_vec(xi).size == hom_dim(xi.src, xi.dst)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["amp2", "fib"]))
def test_H_inclusion_multiplicative(seed, name):
    Q = qsys(name)
    lo, hi = Level(Q, 1), Level(Q, 2)
    rng = np.random.default_rng(seed)
    a, b = lo.random_h(rng), lo.random_h(rng)
    assert mdist(lo.include_H(lo.prod(a, b)), hi.prod(lo.include_H(a), lo.include_H(b))) < 1e-9
    assert mdist(lo.include_H(lo.dagger(a)), hi.dagger(lo.include_H(a))) < 1e-9
    assert mdist(lo.include_H(lo.unit()), hi.unit()) < 1e-9

