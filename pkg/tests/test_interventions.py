import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import checks
import oracles
from docalc.bayesnet import BayesNet, Cpt, NetError, conditional, joint, marginal
from docalc.graph import Dag, cut_incoming, cut_outgoing
from docalc.interventions import (
    InterventionSpec,
    Query,
    UnsupportedQuery,
    do_query,
    mow,
    op_mow,
    op_mow_limit,
    op_uproot,
    root_switch_net,
    uproot,
    uproot_at,
)

from conftest import confounded_net, disjoint_sets, nets, xy_net


def net_with_sets(min_nodes=2, max_nodes=5, k=2, nonempty=2):
    return nets(min_nodes=min_nodes, max_nodes=max_nodes).flatmap(
        lambda bn: disjoint_sets(bn.dag.nodes, k, nonempty=nonempty).map(lambda s: (bn, *s)))


def test_uproot_example():
    t = uproot_at(xy_net(), {"X": 1})
    assert t.scope == ("Y",)
    assert np.allclose(t.values, [0.1, 0.9], atol=1e-15)
    assert np.allclose(do_query(xy_net(), {"Y"}, {"X": 1}).values, [0.1, 0.9], atol=1e-15)


def test_uproot_nothing_is_joint():
    bn = confounded_net()
    assert np.array_equal(uproot(bn, set()).values, joint(bn).values)


def test_uproot_root_is_conditioning():
    bn = confounded_net()
    for u in (0, 1):
        assert uproot_at(bn, {"U": u}).allclose(conditional(joint(bn), {"X", "Y"}, {"U"}).slice({"U": u}))


def test_confounded_do_differs_from_conditioning():
    bn = confounded_net()
    do = do_query(bn, {"Y"}, {"X": 1})
    seen = conditional(joint(bn), {"Y"}, {"X"}).slice({"X": 1})
    # hand values: sum_u P(u) P(y=1|u,x=1) and P(y=1, x=1) / P(x=1)
    assert do[{"Y": 1}] == pytest.approx(0.6 * 0.6 + 0.4 * 0.95, abs=1e-15)
    assert seen[{"Y": 1}] == pytest.approx((0.06 * 0.6 + 0.32 * 0.95) / 0.38, abs=1e-15)
    assert abs(do[{"Y": 1}] - seen[{"Y": 1}]) > 0.1


def test_do_query_undefined_context():
    g = Dag("XYZ", [("X", "Y"), ("Y", "Z")])
    bn = BayesNet.from_arrays(g, {"X": [0.5, 0.5], "Y": [[1.0, 0.0], [0.3, 0.7]], "Z": [[0.4, 0.6], [0.5, 0.5]]})
    t = do_query(bn, {"Z"}, {"X": 0}, {"Y"})
    assert not t.is_defined({"Y": 1, "Z": 0})
    assert t[{"Y": 0, "Z": 1}] == pytest.approx(0.6)


def test_do_query_rejects_overlap():
    with pytest.raises(NetError):
        do_query(xy_net(), {"X"}, {"X": 1})
    with pytest.raises(NetError):
        do_query(xy_net(), {"Y"}, {"X": 2})


@settings(max_examples=60, deadline=None)
@given(net_with_sets(k=3))
def test_do_query_matches_oracle(case):
    bn, a, b, e = case
    assert checks.do_against_oracle(bn, a, b, e) <= 1e-12
    assert checks.uproot_family_sums(bn, a) <= 1e-9


def test_root_switch_rows():
    bn = xy_net()
    rs = root_switch_net(bn, {"Y"})
    assert rs.dag.edges == {("X", "Y"), ("rt__Y", "Y")}
    cpt = rs.cpts["Y"]
    assert cpt.parents == ("X", "rt__Y")
    assert np.array_equal(cpt.table[:, 0, :], bn.cpts["Y"].table)
    assert np.allclose(cpt.table[0, 1], [0.59, 0.41]) and np.allclose(cpt.table[1, 1], [0.59, 0.41])
    assert np.allclose(rs.cpts["rt__Y"].table, [0.5, 0.5])


def test_root_switch_xy():
    rs = root_switch_net(xy_net(), {"X"})
    on = conditional(joint(rs), {"Y"}, {"X", "rt__X"}).slice({"X": 1, "rt__X": 1})
    assert np.allclose(on.values, [0.1, 0.9], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(net_with_sets())
def test_root_switch_acts_like_switch(case):
    bn, a, b = case
    on, off = checks.root_switch(bn, a, b)
    assert on <= 1e-12 and off <= 1e-12


def test_mow_leaf_is_joint():
    bn = confounded_net()
    for y in (0, 1):
        assert np.array_equal(mow(bn, {"Y"}, {"Y": y}).values, joint(bn).values)


def test_mow_xy():
    t = mow(xy_net(), {"X"}, {"X": 1})
    want = np.outer([0.7, 0.3], [0.1, 0.9])
    assert np.allclose(t.values, want, atol=1e-15)


def test_mow_requires_one_value_per_node():
    with pytest.raises(NetError):
        mow(confounded_net(), {"X", "U"}, {"X": 1})
    with pytest.raises(NetError):
        InterventionSpec({"X": 0}, {"X": 1})


@settings(max_examples=60, deadline=None)
@given(net_with_sets())
def test_mowing_identities(case):
    bn, a, b = case
    direct, identity, corollary = checks.mowing(bn, a, b)
    assert direct <= 1e-12 and identity <= 1e-12 and corollary <= 1e-12


def _set_node(bn, v, s):
    """Net with ``v`` cut from its parents and held at ``s`` by a point-mass CPT."""
    dag = cut_incoming(bn.dag, {v})
    cpts = dict(bn.cpts)
    row = np.zeros(bn.cards[v])
    row[s] = 1.0
    cpts[v] = Cpt(v, (), row)
    return BayesNet(dag, bn.cards, cpts)


def _mow_node(bn, v, s):
    """Net with ``v``'s children reading ``s`` in place of ``v``."""
    dag = cut_outgoing(bn.dag, {v})
    cpts = dict(bn.cpts)
    for c in bn.dag.ch(v):
        old = cpts[c]
        k = old.parents.index(v)
        cpts[c] = Cpt(c, old.parents[:k] + old.parents[k + 1:], np.take(old.table, s, axis=k))
    return BayesNet(dag, bn.cards, cpts)


@settings(max_examples=40, deadline=None)
@given(net_with_sets(k=1, nonempty=1), st.randoms(use_true_random=False))
def test_uprooting_factorizes(case, rnd):
    bn, a = case
    alpha = {v: rnd.randrange(bn.cards[v]) for v in sorted(a)}
    want = uproot_at(bn, alpha)
    for order in itertools.islice(itertools.permutations(sorted(a)), 6):
        step = bn
        for v in order:
            step = _set_node(step, v, alpha[v])
        got = joint(step).slice(alpha)
        assert got.max_abs_diff(want) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(net_with_sets(k=1, nonempty=1), st.randoms(use_true_random=False))
def test_mowing_factorizes(case, rnd):
    bn, a = case
    alpha = {v: rnd.randrange(bn.cards[v]) for v in sorted(a)}
    results = []
    for order in itertools.islice(itertools.permutations(sorted(a)), 6):
        step = bn
        for v in order:
            step = _mow_node(step, v, alpha[v])
        results.append(joint(step))
    assert all(r.max_abs_diff(results[0]) <= 1e-12 for r in results)
    # single-node mows also rewire arrows inside a, which the joint mow leaves live
    if not any(u in a and v in a for u, v in bn.dag.edges):
        assert results[0].max_abs_diff(mow(bn, a, alpha)) <= 1e-12


def test_mow_keeps_arrows_inside_the_set():
    g = Dag("AB", [("A", "B")])
    bn = BayesNet.from_arrays(g, {"A": [0.7, 0.3], "B": [[0.8, 0.2], [0.1, 0.9]]})
    t = mow(bn, {"A", "B"}, {"A": 1, "B": 0})
    assert np.array_equal(t.values, joint(bn).values)
    stepwise = joint(_mow_node(_mow_node(bn, "A", 1), "B", 0))
    assert np.allclose(stepwise.values, np.outer([0.7, 0.3], [0.1, 0.9]))


@settings(max_examples=40, deadline=None)
@given(nets(min_nodes=2, max_nodes=5))
def test_structural_shortcuts(bn):
    for v in bn.dag.leaves():
        assert np.array_equal(mow(bn, {v}, {v: 0}).values, joint(bn).values)
    for v in bn.dag.roots():
        rest = set(bn.scope) - {v}
        cond = conditional(joint(bn), rest, {v})
        for s in range(bn.cards[v]):
            assert uproot_at(bn, {v: s}).max_abs_diff(cond.slice({v: s})) <= 1e-12


def test_operator_examples():
    bn = confounded_net()
    assert np.allclose(op_uproot(bn, {"X"}, Query({"X"})).values, 1.0)
    t = op_uproot(bn, {"X"}, Query({"Y"}, {"X"}))
    assert t[{"X": 1, "Y": 1}] == pytest.approx(0.74, abs=1e-15)
    summed = op_uproot(bn, {"X"}, Query({"Y"}))
    assert summed.total() == pytest.approx(2.0)
    lim = op_mow_limit(bn, {"X"}, Query({"Y"}))
    assert lim.scope == ("X", "Y") and lim[{"X": 1, "Y": 1}] == pytest.approx(0.74, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(net_with_sets())
def test_operator_identities(case):
    bn, a, b = case
    for label, dev in checks.operators(bn, a, b).items():
        assert dev <= 1e-12, label


@settings(max_examples=30, deadline=None)
@given(net_with_sets(k=3))
def test_op_mow_against_oracle(case):
    bn, a, b, e = case
    for alpha in oracles.states(bn, a):
        got = op_mow(bn, a, alpha, Query(b, e))
        table = oracles.mowed(bn, alpha)
        cells = {tuple(x[v] for v in got.scope): oracles.cond(bn, table, {v: x[v] for v in b}, {v: x[v] for v in e})
                 for x in oracles.states(bn, got.scope)}
        assert oracles.compare(bn, got, cells) <= 1e-12


def test_limit_and_sum_do_not_commute():
    # one binary node, with the Kronecker delta standing in for the mowed expression
    delta = lambda a, a_prime: float(a == a_prime)
    lim_then_sum = [sum(delta(a, ap) for a in (0, 1)) for ap in (0, 1)]
    sum_then_lim = sum(delta(a, a) for a in (0, 1))
    assert lim_then_sum == [1.0, 1.0] and sum_then_lim == 2.0
    # the same trap on a network: summing the limit of P(a, b) over a is P(b),
    # whereas the limit of the summed expression P(b) is P(b | a^)
    bn = confounded_net()
    per_a = op_mow_limit(bn, {"X"}, Query({"X", "Y"}))
    outside = marginal(per_a, {"Y"})
    inside = op_mow_limit(bn, {"X"}, Query({"Y"}))
    assert outside.allclose(marginal(joint(bn), {"Y"}))
    assert abs(inside[{"X": 1, "Y": 1}] - outside[{"Y": 1}]) > 0.1


def test_unsupported_shapes():
    bn = confounded_net()
    with pytest.raises(UnsupportedQuery):
        op_mow_limit(bn, {"X"}, Query({"Y"}, {"U"}))
    with pytest.raises(UnsupportedQuery):
        op_mow_limit(bn, {"X", "U"}, Query({"X", "Y"}, {"U"}))
    with pytest.raises(UnsupportedQuery):
        op_mow_limit(bn, set(), Query({"Y"}))
    with pytest.raises(UnsupportedQuery):
        Query({"Y"}, {"Y"})


def test_query_str():
    assert str(Query({"Y", "B"}, {"X"})) == "P(B,Y|X)"
    assert str(Query({"Y"})) == "P(Y)"
