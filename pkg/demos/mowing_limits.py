#!/usr/bin/env python
# Mowing a node, then letting the mowed value follow the real one.

from docalc.bayesnet import BayesNet, joint, marginal
from docalc.graph import Dag
from docalc.interventions import Query, mow, op_mow_limit, uproot_at

g = Dag("UXY", [("U", "X"), ("U", "Y"), ("X", "Y")])
bn = BayesNet.from_arrays(g, {
    "U": [0.6, 0.4],
    "X": [[0.9, 0.1], [0.2, 0.8]],
    "Y": [[[0.7, 0.3], [0.4, 0.6]], [[0.5, 0.5], [0.05, 0.95]]],
})

# Y reads x' = 1 whatever X does; summing X out leaves the do(X=1) family
m = mow(bn, {"X"}, {"X": 1})
print("mowed, X summed:", marginal(m, {"U", "Y"}).values.round(4).tolist())
print("do(X=1):        ", uproot_at(bn, {"X": 1}).values.round(4).tolist())

# the limit x' -> x taken on P(y) gives P(y | do(x)); taken on P(x, y) and summed it gives P(y)
inside = op_mow_limit(bn, {"X"}, Query({"Y"}))
outside = marginal(op_mow_limit(bn, {"X"}, Query({"X", "Y"})), {"Y"})
print("lim of P(y):    ", inside.values.round(4).tolist(), "(rows are x)")
print("sum of lim:     ", outside.values.round(4).tolist(), "= P(y)", marginal(joint(bn), {"Y"}).values.round(4).tolist())
