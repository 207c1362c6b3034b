import numpy as np
import pytest
from conftest import qsys
from hypothesis import given, settings
from hypothesis import strategies as st

from qsplit.corr import (Correspondence, MMAlgebra, cf_chain, cf_compose, check_square,
                         corr_category, h_tensor_check, hilbert_realm, identity_cfunctor,
                         induction_functor, make_cfunctor, nat_from_carrier, orthonormalize, pp_check, rel_tensor,
                         same_carrier, square_connection, tensor_comparison)
from qsplit.errors import BadBasis, NonCommutingSquare, NotUnital, ShapeMismatch
from qsplit.numkit import random_unitary
from qsplit.sscat import Mor, Obj, SCat
from qsplit.tower import Level, mdist, random_mor, wedderburn, wedderburn_of_A

ONE = SCat(("s",), "One")
Z1, Z2, Z4 = Obj(ONE, (1,)), Obj(ONE, (2,)), Obj(ONE, (4,))


def unit(n, m, i, j):
    a = np.zeros((n, m))
    a[i, j] = 1
    return a


def algebra(name, sample, obj, dim):
    return MMAlgebra(name, wedderburn(sample, obj, dim), sample)


def full2(rng):
    return Mor(Z2, Z2, [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))])


def diag2(rng):
    return Mor(Z2, Z2, [np.diag(rng.standard_normal(2))])


def scal2(rng):
    return Mor(Z2, Z2, [rng.standard_normal() * np.eye(2)])


M2 = algebra("M", full2, Z2, 4)
D = algebra("D", diag2, Z2, 2)
C = algebra("C", scal2, Z2, 1)
MATRIX_UNITS = [Mor(Z2, Z2, [unit(2, 2, i, j)]) for i in range(2) for j in range(2)]


def ident(a):
    return a


def test_algebra_blocks():
    assert M2.wed.block_dims == [2] and D.wed.block_dims == [1, 1] and C.wed.block_dims == [1]
    assert corr_category(D).n == 2


def test_induction_multiplicities():
    # f_j M2 f has dimension 1 for each diagonal minimal projection
    assert induction_functor(D, M2, ident).mult.tolist() == [[1, 1]]
    assert induction_functor(C, D, ident).mult.tolist() == [[1], [1]]
    assert induction_functor(C, M2, ident).mult.tolist() == [[2]]


def test_induction_needs_unital_inclusion():
    c1 = algebra("c", lambda rng: Mor(Z1, Z1, [rng.standard_normal((1, 1))]), Z1, 1)

    def corner(a):
        return Mor(Z2, Z2, [np.pad(a.blocks[0], ((0, 1), (0, 1)))])

    with pytest.raises(NotUnital):
        induction_functor(c1, M2, corner)


def test_commuting_square():
    left = cf_compose(induction_functor(D, M2, ident), induction_functor(C, D, ident))
    right = cf_compose(identity_cfunctor(M2.realm), induction_functor(C, M2, ident))
    rep = {}
    eta = square_connection(left, right, rep)
    assert rep["carrier"] < 1e-12
    b = eta.comps[0].blocks[0]
    assert np.allclose(b.conj().T @ b, np.eye(2))


def test_rotated_square_fails():
    u = random_unitary(2, np.random.default_rng(0))

    def rot(a):
        return Mor(Z2, Z2, [u @ a.blocks[0] @ u.conj().T])

    up = identity_cfunctor(M2.realm)
    left = cf_compose(up, induction_functor(D, M2, ident))
    right = cf_compose(up, induction_functor(D, M2, rot))
    with pytest.raises(NonCommutingSquare):
        square_connection(left, right)
    rng = np.random.default_rng(1)
    assert check_square((ident, ident), (rot, ident), Z2, rng) > 1e-3
    assert check_square((ident, ident), (ident, ident), Z2, rng) == 0


def test_identity_carrier_map():
    F = induction_functor(D, M2, ident)
    rep = {}
    eta = nat_from_carrier(F, F, same_carrier, rep)
    assert rep["carrier"] < 1e-12
    assert all(np.allclose(b, np.eye(b.shape[0])) for c in eta.comps for b in c.blocks)


def test_cf_chain_matches_nested_compose():
    a, b = induction_functor(C, D, ident), induction_functor(D, M2, ident)
    one = identity_cfunctor(M2.realm)
    x, y = cf_chain(one, b, a), cf_compose(one, cf_compose(b, a))
    assert x.mult.tolist() == y.mult.tolist()
    assert all(mdist(g, h) == 0 for gx, gy in zip(x.gens, y.gens)
               for bx, by in zip(gx, gy) for g, h in zip(bx, by))


def test_hilbert_realm_identity_functor():
    cat = SCat(("a", "b"), "Two")
    F = identity_cfunctor(hilbert_realm(cat))
    assert F.mult.tolist() == [[1, 0], [0, 1]]


def test_orthonormalize_drops_dependent_vectors():
    realm = M2.realm
    f = M2.wed.minimal[0]
    g = orthonormalize(realm, 0, [f, f.scale(2.0), f.scale(1e-20)])
    assert len(g) == 1 and abs(realm.overlap(0, g[0], g[0]) - 1) < 1e-12


def test_make_cfunctor_counts():
    ra = D.realm
    F = make_cfunctor("P", ra, ra, None, lambda j, t: [ra.units[t]] if j == t else [])
    assert F.mult.tolist() == [[1, 0], [0, 1]]


def test_self_tensor_over_full_algebra():
    # M2 ⊠_{M2} M2 ≅ M2
    V = Correspondence(M2, MATRIX_UNITS)
    W = Correspondence(M2, MATRIX_UNITS, left=ident)
    assert rel_tensor(V, W, "oracle").dim == rel_tensor(V, W, "fast").dim == 4
    rep = tensor_comparison(V, W, lambda v, w: v @ w)
    assert rep == {"dim": 4, "image_rank": 4, "gram_mismatch": 0.0}


def test_tensor_over_diagonal_algebra():
    # V = C²e₀ ⊕ C²e₁ in Hom(C², C⁴), W = M2: V ⊠_D W = ⊕_j Ve_j ⊗ e_jW has dimension 2·2 + 2·2
    V = Correspondence(D, [Mor(Z2, Z4, [unit(4, 2, a, a // 2)]) for a in range(4)])
    W = Correspondence(M2, MATRIX_UNITS, left=ident)
    oracle, fast = rel_tensor(V, W, "oracle"), rel_tensor(V, W, "fast")
    assert oracle.dim == fast.dim == 8
    # the explicit family is orthonormal, and the oracle Gram has the same spectrum on its range
    assert np.allclose(fast.gram, np.eye(8))
    ev = np.linalg.eigvalsh(oracle.gram)
    assert np.allclose(ev[-8:], 1) and np.allclose(ev[:-8], 0)
    rep = tensor_comparison(V, W, lambda v, w: v @ w)
    assert rep["dim"] == rep["image_rank"] == 8 and rep["gram_mismatch"] < 1e-12


def test_row_tensor_column():
    # C² ⊠_{M2} C̄²: rows against columns balance down to one dimension
    V = Correspondence(M2, [Mor(Z2, Z1, [unit(1, 2, 0, j)]) for j in range(2)])
    W = Correspondence(C, [Mor(Z1, Z2, [unit(2, 1, i, 0)]) for i in range(2)], left=ident)
    assert rel_tensor(V, W, "oracle").dim == 1


@pytest.mark.parametrize("name,k", [("amp2", 0), ("amp2", 1), ("fib", 0), ("fib", 1), ("amp3", 0)])
def test_h_tensor_is_y(name, k):
    rep = h_tensor_check(Level(qsys(name), k))
    assert rep["dim"] == rep["fast_dim"] == rep["image_rank"] == rep["target_dim"]
    assert rep["gram_mismatch"] < 1e-9 and rep["fast_orthonormality"] < 1e-9


def test_h_tensor_is_y_in_rotated_basis():
    lev = Level(qsys("fib"), 1)
    rng = np.random.default_rng(11)
    basis = lev.h_basis()
    u = random_unitary(len(basis), rng)
    rot = [sum((b.scale(u[i, c]) for i, b in enumerate(basis[1:], 1)), basis[0].scale(u[0, c]))
           for c in range(len(basis))]
    x = lev.x
    A = MMAlgebra("A", wedderburn_of_A(x), lambda r: random_mor(x, x, r))
    rep = tensor_comparison(Correspondence(A, rot), Correspondence(A, rot, left=lev.Qf),
                            lambda v, w: lev.Qf(v) @ w)
    assert rep["gram_mismatch"] < 1e-9
    assert rep["dim"] == rep["image_rank"] == 34


def test_tensor_errors():
    V = Correspondence(M2, MATRIX_UNITS)
    with pytest.raises(ShapeMismatch):
        rel_tensor(V, V)
    with pytest.raises(ValueError):
        rel_tensor(V, Correspondence(M2, MATRIX_UNITS, left=ident), mode="guess")


def test_pp_check():
    units = [Mor(Z2, Z2, [unit(2, 2, i, i)]) for i in range(2)]
    assert pp_check(units, Mor.identity(Z2)) == 0
    with pytest.raises(BadBasis):
        pp_check(units[:1], Mor.identity(Z2))
    with pytest.raises(BadBasis):
        pp_check([], Mor.identity(Z2))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_rotated_frame_is_a_pp_basis(seed):
    u = random_unitary(2, np.random.default_rng(seed))
    cols = [Mor(Z1, Z2, [u[:, [i]]]) for i in range(2)]
    assert pp_check(cols, Mor.identity(Z2)) < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_tensor_gram_matches_composition(seed):
    # a random unitary change of the right-module generators leaves the comparison exact
    u = random_unitary(2, np.random.default_rng(seed))
    vecs = [Mor(Z2, Z2, [u @ unit(2, 2, i, j)]) for i in range(2) for j in range(2)]
    rep = tensor_comparison(Correspondence(M2, vecs), Correspondence(M2, MATRIX_UNITS, left=ident),
                            lambda v, w: v @ w)
    assert rep["dim"] == 4 and rep["gram_mismatch"] < 1e-12
