import numpy as np
import pytest
from hypothesis import strategies as st

from docalc.bayesnet import BayesNet
from docalc.graph import Dag
from docalc.harness import GenConfig, gen_cpts, node_names


def chain():
    return Dag("XYZ", [("X", "Y"), ("Y", "Z")])


def fork():
    return Dag("XCY", [("C", "X"), ("C", "Y")])


def collider():
    return Dag("XCY", [("X", "C"), ("Y", "C")])


def diamond():
    return Dag("XYWZ", [("X", "Y"), ("X", "W"), ("Y", "Z"), ("W", "Z")])


def xy_net():
    """X -> Y with P(X=1)=0.3, P(Y=1|X=0)=0.2, P(Y=1|X=1)=0.9."""
    g = Dag("XY", [("X", "Y")])
    return BayesNet.from_arrays(g, {"X": [0.7, 0.3], "Y": [[0.8, 0.2], [0.1, 0.9]]})


def confounded_net():
    g = Dag("UXY", [("U", "X"), ("U", "Y"), ("X", "Y")])
    return BayesNet.from_arrays(g, {
        "U": [0.6, 0.4],
        "X": [[0.9, 0.1], [0.2, 0.8]],
        "Y": [[[0.7, 0.3], [0.4, 0.6]], [[0.5, 0.5], [0.05, 0.95]]],
    })


@st.composite
def dags(draw, min_nodes=1, max_nodes=6):
    n = draw(st.integers(min_nodes, max_nodes))
    names = node_names(n)
    order = draw(st.permutations(names))
    pairs = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Dag(names, [p for p, k in zip(pairs, keep) if k])


@st.composite
def nets(draw, min_nodes=1, max_nodes=5, max_card=3):
    g = draw(dags(min_nodes, max_nodes))
    seed = draw(st.integers(0, 2**32 - 1))
    return gen_cpts(g, GenConfig(nodes=max(len(g.nodes), 1), max_card=max_card), np.random.default_rng(seed))


@st.composite
def disjoint_sets(draw, nodes, k, nonempty=0):
    """``k`` disjoint subsets of ``nodes``; the first ``nonempty`` are nonempty."""
    nodes = sorted(nodes)
    labels = draw(st.lists(st.integers(0, k), min_size=len(nodes), max_size=len(nodes)))
    sets = [frozenset(v for v, l in zip(nodes, labels) if l == j) for j in range(k)]
    for j in range(nonempty):
        from hypothesis import assume

        assume(sets[j])
    return sets


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
