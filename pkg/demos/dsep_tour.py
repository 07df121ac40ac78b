#!/usr/bin/env python
# Chains, forks and colliders: which paths an observation opens or closes.

import numpy as np

from docalc.bayesnet import ci_deviation, joint
from docalc.dsep import d_separated, enumerate_paths
from docalc.graph import Dag
from docalc.harness import GenConfig, gen_cpts

graphs = {
    "chain":    Dag("XYZ", [("X", "Y"), ("Y", "Z")]),
    "fork":     Dag("XYZ", [("Y", "X"), ("Y", "Z")]),
    "collider": Dag("XYZ", [("X", "Y"), ("Z", "Y")]),
}
rng = np.random.default_rng(7)

for name, g in graphs.items():
    bn = gen_cpts(g, GenConfig(nodes=3), rng)   # random interior CPTs
    t = joint(bn)
    print(name, [p.render() for p in enumerate_paths(g, {"X"}, {"Z"})])
    for given in (set(), {"Y"}):
        v = d_separated(g, {"X"}, {"Z"}, given)
        dev = ci_deviation(t, {"X"}, {"Z"}, given)
        print(f"  given {sorted(given) or '{}'}: separated={v.separated!s:5}  |P(x|z,e)-P(x|e)| max {dev:.1e}")

# a collider's descendant opens it too
g = Dag("XYZD", [("X", "Y"), ("Z", "Y"), ("Y", "D")])
print("collider with child, given D:", d_separated(g, {"X"}, {"Z"}, {"D"}).witness.render())
