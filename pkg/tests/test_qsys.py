import numpy as np
import pytest
from conftest import pair, qsys
from hypothesis import given, settings
from hypothesis import strategies as st

from qsplit.errors import AxiomFailure, NeverStable, NotSeparable
from qsplit.funcalc import NatTrans, canonical, functor_compose
from qsplit.gen import zero_cell
from qsplit.numkit import DEFAULT
from qsplit.qsys import (QSystem, axioms_check, dq_calculus, from_dual_pair, identity_qsystem,
                         level_report, random_gauge, scale_m, self_duality_residual,
                         stability_level)
from qsplit.uc2 import DualityData, OneCell, TwoCell, identity_one_cell, one_cell_compose


def projection_qsystem(depth=2):
    """Q = projection onto the first of two simples; d_Q = (1, 0)."""
    z = zero_cell([np.eye(2, dtype=int)] * depth)
    lams = [canonical(c, c, [[1, 0], [0, 0]], name=f"P{k}") for k, c in enumerate(z.cats)]
    conns = []
    for k in range(1, depth + 1):
        src = functor_compose(z.gamma(k), lams[k - 1])
        dst = functor_compose(lams[k], z.gamma(k))
        conns.append(NatTrans.from_blocks(src, dst, [[np.eye(1), np.zeros((0, 0))],
                                                     [np.zeros((0, 0)), np.zeros((0, 0))]]))
    q = OneCell(z, z, lams, conns, "P")
    qq, one = one_cell_compose(q, q), identity_one_cell(z)
    ms = [NatTrans.from_blocks(qq.lam(k), q.lam(k), [[np.eye(1), np.zeros((0, 0))],
                                                     [np.zeros((0, 0)), np.zeros((0, 0))]])
          for k in range(depth + 1)]
    is_ = [NatTrans.from_blocks(one.lam(k), q.lam(k), [[np.eye(1), np.zeros((0, 0))],
                                                       [np.zeros((0, 0)), np.zeros((0, 1))]])
           for k in range(depth + 1)]
    return QSystem(z, q, TwoCell(qq, q, 0, ms), TwoCell(one, q, 0, is_), qq, one)


def test_identity_qsystem():
    Q = identity_qsystem(zero_cell([[[1, 1], [1, 0]]] * 2))
    for k in range(3):
        assert axioms_check(Q, k) == (0, 0, 0, 0)
    d = dq_calculus(Q, 0)
    assert np.allclose(d.d, 1) and np.allclose(d.d_inv, 1) and np.allclose(d.s, 1) and d.norm == 1


@pytest.mark.parametrize("name", ["trivial", "amp2", "amp3", "fib"])
def test_generated_axioms(name):
    Q = qsys(name)
    for k in range(Q.depth + 1):
        assert axioms_check(Q, k).worst() < 1e-9
    assert stability_level(Q) == 0


def test_scaled_m_breaks_unitality():
    Q = scale_m(qsys("amp2"), {0}, 1.1)
    assert axioms_check(Q, 0).unitality >= 0.1


def test_corrupted_low_levels_give_l2():
    Q = scale_m(qsys("amp2"), {0, 1}, 1.01)
    rows = level_report(Q)
    assert [r["pass"] for r in rows] == [False, False, True, True, True]
    assert stability_level(Q, rows=rows) == 2


def test_all_levels_corrupted():
    Q = qsys("amp2")
    with pytest.raises(NeverStable):
        stability_level(scale_m(Q, set(range(Q.depth + 1)), 1.01))


def test_amp2_dimension_is_four():
    # unitary separability forces coev* coev = dim(X)² = 4
    Q = qsys("amp2")
    for k in range(Q.depth + 1):
        d = dq_calculus(Q, k)
        assert np.allclose(d.d, 4.0, atol=1e-12) and d.classification == "non-degenerate"
        assert abs(d.d_inv[0] - 0.25) < 1e-12


def test_fib_dimension_oracle():
    # for X = Γ on the golden-mean graph, d_Q at s is the Perron eigenvalue squared: φ²
    phi = (1 + 5 ** 0.5) / 2
    d = dq_calculus(qsys("fib"), 1)
    assert np.allclose(d.d, phi ** 2, atol=1e-9)


def test_degenerate_support():
    Q = projection_qsystem()
    assert max(axioms_check(Q, k).worst() for k in range(3)) < 1e-12
    d = dq_calculus(Q, 1)
    assert np.allclose(d.d, [1, 0]) and np.allclose(d.s, [1, 0])
    assert d.classification == "summand"
    assert d.checks["Q_s_eq_id"] < 1e-12


@pytest.mark.parametrize("name", ["amp2", "amp3", "fib"])
def test_dq_facts(name):
    Q = qsys(name)
    for k in range(Q.depth + 1):
        c = dq_calculus(Q, k).checks
        assert c["d_times_dinv_minus_s"] < 1e-9 and c["s_idempotent"] < 1e-9
        assert min(c["cap_cup_le_d"], c["d_le_norm"], c["Q_d_le_norm"],
                   c["i_istar_le_norm"]) >= -1e-9
        assert c["d_min"] >= -1e-9


def test_dq_needs_axioms():
    with pytest.raises(AxiomFailure):
        dq_calculus(scale_m(qsys("amp2"), {0}, 1.1), 0)


def test_from_identity_pair():
    z = zero_cell([[[1]]] * 2)
    one = identity_one_cell(z)
    oo = one_cell_compose(one, one)
    ids = [NatTrans.identity(f) for f in one.lambdas]
    Q = from_dual_pair(DualityData(one, one, TwoCell(oo, one, 0, ids), TwoCell(one, oo, 0, ids)))
    assert Q.l == 0 and max(axioms_check(Q, k).worst() for k in range(3)) == 0


def test_amp2_from_pair_has_mult_four():
    Q = from_dual_pair(pair("amp2"))
    assert Q.Q(0).mult.tolist() == [[4]]


def test_non_separable_pair_rejected():
    d = pair("amp2")
    ev = TwoCell(d.ev.src, d.ev.dst, 0, [e.scale(1.5) for e in d.ev.comps])
    with pytest.raises(NotSeparable):
        from_dual_pair(DualityData(d.cell, d.dual, ev, d.coev))


@pytest.mark.parametrize("name", ["amp2", "fib"])
def test_self_duality(name):
    Q = qsys(name)
    assert max(self_duality_residual(Q, k) for k in range(Q.depth + 1)) < 1e-9


@settings(max_examples=8, deadline=None)
@given(st.integers(1, 10 ** 6), st.sampled_from(["amp2", "fib"]))
def test_gauge_keeps_axioms_and_d(seed, name):
    Q = qsys(name)
    G = random_gauge(Q, np.random.default_rng(seed))
    for k in (0, Q.depth):
        assert axioms_check(G, k).worst() < 1e-9
        assert np.allclose(dq_calculus(G, k).d, dq_calculus(Q, k).d, atol=1e-9)
    assert stability_level(G) == 0


def nonzero_entries(eta):
    return [(s, t, idx) for s, c in enumerate(eta.comps) for t, b in enumerate(c.blocks)
            for idx in zip(*np.nonzero(np.abs(b) > 1e-12))]


def perturb_entry(eta, where, factor):
    s, t, idx = where
    blocks = [[b.copy() for b in c.blocks] for c in eta.comps]
    blocks[s][t][idx] *= factor
    return NatTrans.from_blocks(eta.src, eta.dst, blocks)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["amp2", "amp3", "fib"]), st.integers(0, 10 ** 6), st.booleans())
def test_single_entry_perturbation_detected(name, pick, on_m):
    # scaling one nonzero entry of m_k or i_k by 1% must show in some axiom at that level
    Q = qsys(name)
    k = pick % (Q.depth + 1)
    cell = Q.m if on_m else Q.i
    spots = nonzero_entries(cell.at(k))
    bad = perturb_entry(cell.at(k), spots[pick % len(spots)], 1.01)
    comps = [bad if j == k else cell.at(j) for j in range(Q.depth + 1)]
    new = TwoCell(cell.src, cell.dst, 0, comps)
    P = QSystem(Q.base, Q.q, new if on_m else Q.m, Q.i if on_m else new, Q.qq, Q.one)
    assert axioms_check(P, k).worst() > 1e-3


def test_report_rows_in_order():
    Q = qsys("fib")
    serial = level_report(Q, DEFAULT)
    parallel = level_report(Q, DEFAULT, jobs=3)
    assert serial == parallel
