#!/usr/bin/env python
# Rule 3 and the root-augmented graph used to argue for it.
#
# On B -> A with b = {B}, a = {A}, rule 3 cuts the arrow into A and finds B and
# A separated.  Adding a switch root to A keeps B -> A, so B stays connected
# to A in the augmented graph: the augmented condition is strictly stronger.
# The rule's equality still holds numerically.

from docalc.bayesnet import BayesNet
from docalc.graph import Dag
from docalc.harness import rules_sweep
from docalc.rules import RuleQuery, g3, g3_prime, rule_applicable, s_prime_check

g = Dag("AB", [("B", "A")])
q = RuleQuery("B", "A")
bn = BayesNet.from_arrays(g, {"B": [0.3, 0.7], "A": [[0.9, 0.1], [0.25, 0.75]]})

print("G3 edges:      ", g3(g, q).sorted_edges())
print("G3' edges:     ", g3_prime(g, q)[0].sorted_edges())
v = rule_applicable(g, 3, q, bn=bn)
print("rule 3:        ", v.applicable, f"(max gap {v.numeric.max_deviation:.1e})")
print("augmented cond:", s_prime_check(g, q))

# how often this happens on every DAG with at most three nodes
res = rules_sweep(3)
print(f"<=3 nodes: {res.s_prime_exceptions} of {res.s_prime_checked} rule-3 queries "
      f"fail the augmented condition, equality failures {res.equality_failed}")
