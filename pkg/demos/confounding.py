#!/usr/bin/env python
# Seeing versus doing on the smallest confounded network: U -> X, U -> Y, X -> Y.

import numpy as np

from docalc.bayesnet import BayesNet, conditional, joint
from docalc.graph import Dag
from docalc.interventions import do_query, root_switch_net
from docalc.rules import RuleQuery, rule_applicable

g = Dag("UXY", [("U", "X"), ("U", "Y"), ("X", "Y")])
bn = BayesNet.from_arrays(g, {
    "U": [0.6, 0.4],
    "X": [[0.9, 0.1], [0.2, 0.8]],
    "Y": [[[0.7, 0.3], [0.4, 0.6]], [[0.5, 0.5], [0.05, 0.95]]],
})

seen = conditional(joint(bn), {"Y"}, {"X"}).slice({"X": 1})
done = do_query(bn, {"Y"}, {"X": 1})
print("P(Y=1 | X=1)     =", round(seen[{"Y": 1}], 4))   # U leaks through the back door
print("P(Y=1 | do(X=1)) =", round(done[{"Y": 1}], 4))

# the same number from the switch construction: condition on rt__X = 1
rs = root_switch_net(bn, {"X"})
sw = conditional(joint(rs), {"Y"}, {"X", "rt__X"}).slice({"X": 1, "rt__X": 1})
print("switch on        =", round(sw[{"Y": 1}], 4), " gap", np.abs(sw.values - done.values).max())

# rule 2 refuses to swap do(X) for X while U is free, and allows it once U is observed
for i in ((), ("U",)):
    v = rule_applicable(g, 2, RuleQuery("Y", "X", i=i), bn=bn)
    path = v.witness.render() if v.witness else "-"
    print(f"rule 2 with i={list(i)}: applicable={v.applicable} witness={path} "
          f"max gap={v.numeric.max_deviation:.2g}")
