import json
from pathlib import Path

import numpy as np
import pytest

from docalc.formats import format_graph
from docalc.harness import (
    MIN_ENTRY,
    FuzzReport,
    GenConfig,
    all_dags,
    dsep_sweep,
    fuzz,
    fuzz_dsep,
    gen_cpts,
    gen_dag,
    random_partition,
    render_json,
    trial_rngs,
)

from conftest import chain, collider, fork

GOLDEN = Path(__file__).parent / "golden"


def test_config_validation():
    for bad in ({"nodes": 0}, {"edge_prob": 1.5}, {"max_card": 1}, {"seed": -1}, {"trials": 0}):
        with pytest.raises(ValueError):
            GenConfig(**bad)


def test_gen_dag_edge_probability_extremes(rng):
    empty = gen_dag(GenConfig(nodes=6, edge_prob=0.0), rng)
    assert empty.edges == set() and len(empty.nodes) == 6
    full = gen_dag(GenConfig(nodes=6, edge_prob=1.0), rng)
    assert len(full.edges) == 15
    order = full.topological_order()
    assert full.edges == {(order[i], order[j]) for i in range(6) for j in range(i + 1, 6)}


def test_generation_is_deterministic():
    cfg = GenConfig(nodes=5)
    nets = []
    for _ in range(2):
        rng = trial_rngs(9, 1)[0]
        dag = gen_dag(cfg, rng)
        nets.append(gen_cpts(dag, cfg, rng))
    assert nets[0].dag == nets[1].dag and nets[0].cards == nets[1].cards
    for v in nets[0].scope:
        assert np.array_equal(nets[0].cpts[v].table, nets[1].cpts[v].table)


def test_cpt_rows_are_interior(rng):
    cfg = GenConfig(nodes=6, max_card=4)
    for _ in range(20):
        bn = gen_cpts(gen_dag(cfg, rng), cfg, rng)
        for v in bn.scope:
            t = bn.cpts[v].table
            assert np.all(np.abs(t.sum(axis=-1) - 1) <= 1e-12)
            assert t.min() >= MIN_ENTRY - 1e-15
            assert 2 <= bn.cards[v] <= 4


def test_random_partition(rng):
    nodes = [f"N{k}" for k in range(6)]
    for _ in range(200):
        parts = random_partition(nodes, 2, 2, rng)
        assert all(parts[0]) and parts[1]
        assert sum(len(p) for p in parts) == len(set().union(*parts)) <= 6
    assert random_partition(["A", "B"], 2, 1, rng)[2] == frozenset()
    with pytest.raises(ValueError):
        random_partition(["A"], 2, 0, rng)


def test_all_dags_counts():
    assert [len(all_dags(n)) for n in range(1, 5)] == [1, 3, 25, 543]


def test_small_dsep_sweep():
    res = dsep_sweep(3)
    assert res.graphs == 29 and res.disagreements == 0 and res.triples > 0


def test_fuzz_is_deterministic():
    cfg = GenConfig(trials=30, seed=5)
    assert fuzz(cfg).to_json() == fuzz(cfg).to_json()
    assert fuzz(cfg).to_json() != fuzz(GenConfig(trials=30, seed=6)).to_json()


def test_fuzz_passes_and_counts():
    report = fuzz(GenConfig(trials=60, seed=3))
    assert report.passed, report.failures
    d = report.dsep
    assert d["separated_ci"] + d["separated_not_ci"] + d["connected_ci"] + d["connected_not_ci"] == 60
    assert d["separated_not_ci"] == 0
    for c in report.rules.values():
        assert c["equality_failed"] == 0 and c["applicable"] == c["equality_held"]


def test_json_round_trip():
    text = fuzz(GenConfig(trials=20, seed=1)).to_json()
    assert render_json(json.loads(text)) == text


def test_report_failure_conditions():
    r = FuzzReport(0, {})
    assert r.passed
    r.dsep["connected_ci"], r.dsep["connected_not_ci"] = 1, 9
    assert "faithfulness probe above threshold" in r.failures
    r = FuzzReport(0, {})
    r.dsep["separated_not_ci"] = 1
    r.rules["2"]["equality_failed"] = 1
    assert len(r.failures) == 2 and r.to_dict()["status"] == "FAIL"


def test_fuzz_dsep_needs_two_nodes():
    with pytest.raises(ValueError):
        fuzz_dsep(GenConfig(nodes=1))


def _counters_match(got, want, path=""):
    if isinstance(want, dict):
        assert set(got) == set(want), path
        for k in want:
            _counters_match(got[k], want[k], f"{path}.{k}")
    elif isinstance(want, float):
        assert got == pytest.approx(want, abs=1e-12), path
    else:
        assert got == want, path


@pytest.mark.parametrize("name,graph", [("chain", chain), ("fork", fork), ("collider", collider)])
def test_golden_reports(name, graph):
    """The first run writes the golden file; later runs must reproduce it."""
    g = graph()
    report = json.loads(fuzz(GenConfig(nodes=3, trials=40, seed=2024), graph=g).to_json())
    path = GOLDEN / f"{name}.json"
    if not path.exists():
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(render_json({"graph": format_graph(g), "report": report}) + "\n")
    stored = json.loads(path.read_text())
    assert stored["graph"] == format_graph(g)
    _counters_match(report, stored["report"])
    assert report["status"] == "PASS"
