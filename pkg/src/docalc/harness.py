"""Random networks, fuzz runs that tie graphical verdicts to numeric checks,
and exhaustive sweeps over every small labeled DAG.

Every random draw comes from a per-trial generator spawned from the master
seed, so reports are a pure function of the configuration.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bits
from .bayesnet import BayesNet, ci_deviation, joint
from .dsep import PathOracle, d_separated, d_separated_fast
from .graph import Dag, children, cut_incoming
from .rules import RULES, RuleEvaluator, RuleQuery, rule_applicable, s_prime_check

MIN_ENTRY = 0.01


@dataclass(frozen=True)
class GenConfig:
    nodes: int = 6
    edge_prob: float = 0.5
    max_card: int = 3
    seed: int = 0
    trials: int = 200

    def __post_init__(self):
        if self.nodes < 1:
            raise ValueError("nodes must be at least 1")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError("edge_prob must lie in [0, 1]")
        if self.max_card < 2:
            raise ValueError("max_card must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


def node_names(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"X{k:0{width}d}" for k in range(n)]


def trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def gen_dag(cfg: GenConfig, rng: np.random.Generator, n: int | None = None) -> Dag:
    """Random topological order, then each forward pair is an edge with ``edge_prob``."""
    names = node_names(cfg.nodes if n is None else n)
    order = [names[k] for k in rng.permutation(len(names))]
    edges = [
        (order[i], order[j])
        for i in range(len(order))
        for j in range(i + 1, len(order))
        if rng.random() < cfg.edge_prob
    ]
    return Dag(names, edges)


def interior_rows(rng: np.random.Generator, shape: tuple[int, ...], k: int) -> np.ndarray:
    """Rows from the simplex interior: every entry is at least ``MIN_ENTRY``."""
    raw = rng.dirichlet(np.ones(k), size=shape)
    return MIN_ENTRY + (1.0 - MIN_ENTRY * k) * raw


def gen_cpts(dag: Dag, cfg: GenConfig, rng: np.random.Generator) -> BayesNet:
    names = sorted(dag.nodes)
    cards = {v: int(rng.integers(2, cfg.max_card + 1)) for v in names}
    tables = {}
    for v in names:
        shape = tuple(cards[p] for p in sorted(dag.pa(v)))
        tables[v] = interior_rows(rng, shape, cards[v])
    return BayesNet.from_arrays(dag, tables)


def random_partition(nodes: Sequence[str], required: int, optional: int,
                     rng: np.random.Generator) -> list[frozenset[str]]:
    """Disjoint random sets; the first ``required`` are nonempty.

    Sizes are geometric with mean 1, truncated to what is left.
    """
    if len(nodes) < required:
        raise ValueError(f"need at least {required} nodes")
    pool = [nodes[k] for k in rng.permutation(len(nodes))]
    out = []
    for k in range(required + optional):
        size = int(rng.geometric(0.5)) - 1
        if k < required:
            size = max(size, 1)
        still_needed = max(required - k - 1, 0)
        size = min(size, len(pool) - still_needed)
        out.append(frozenset(pool[:size]))
        pool = pool[size:]
    return out


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


@dataclass
class RuleCounters:
    applicable: int = 0
    equality_held: int = 0
    equality_failed: int = 0
    converse_held: int = 0
    max_deviation: float = 0.0


@dataclass
class FuzzReport:
    seed: int
    config: dict
    dsep: dict = field(default_factory=lambda: {
        "separated_ci": 0, "separated_not_ci": 0, "connected_ci": 0, "connected_not_ci": 0,
        "engine_disagreements": 0, "max_separated_deviation": 0.0,
    })
    rules: dict = field(default_factory=lambda: {str(r): asdict(RuleCounters()) for r in RULES})
    rule2_childless_cases: int = 0
    rule2_childless_mismatches: int = 0
    s_prime_checked: int = 0
    s_prime_exceptions: int = 0
    faithfulness_threshold: float = 0.05

    @property
    def faithfulness_rate(self) -> float:
        connected = self.dsep["connected_ci"] + self.dsep["connected_not_ci"]
        return self.dsep["connected_ci"] / connected if connected else 0.0

    @property
    def failures(self) -> list[str]:
        out = []
        if self.dsep["separated_not_ci"]:
            out.append("d-separated pair found dependent")
        if self.dsep["engine_disagreements"]:
            out.append("d-separation engines disagree")
        if self.faithfulness_rate > self.faithfulness_threshold:
            out.append("faithfulness probe above threshold")
        for r, c in self.rules.items():
            if c["equality_failed"]:
                out.append(f"rule {r} applicable but equality failed")
        if self.rule2_childless_mismatches:
            out.append("rule 2 verdict differs from rule 1 with childless a")
        return out

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        d = asdict(self)
        d["faithfulness_rate"] = self.faithfulness_rate
        d["failures"] = self.failures
        d["status"] = "PASS" if self.passed else "FAIL"
        return d

    def to_json(self) -> str:
        return render_json(self.to_dict())


def fuzz_dsep(cfg: GenConfig, report: FuzzReport | None = None) -> FuzzReport:
    """Random nets and random ``(a, b, e)``: d-separation must imply numeric independence."""
    if cfg.nodes < 2:
        raise ValueError("d-separation fuzzing needs at least 2 nodes")
    report = report or FuzzReport(cfg.seed, asdict(cfg))
    d = report.dsep
    for rng in trial_rngs(cfg.seed, cfg.trials):
        n = int(rng.integers(2, cfg.nodes + 1))
        dag = gen_dag(cfg, rng, n)
        bn = gen_cpts(dag, cfg, rng)
        a, b, e = random_partition(sorted(dag.nodes), 2, 1, rng)
        sep = d_separated(dag, a, b, e).separated
        if sep != d_separated_fast(dag, a, b, e):
            d["engine_disagreements"] += 1
        dev = ci_deviation(joint(bn), a, b, e)
        ci = dev <= 1e-9
        if sep:
            d["max_separated_deviation"] = max(d["max_separated_deviation"], dev)
        key = ("separated" if sep else "connected") + ("_ci" if ci else "_not_ci")
        d[key] += 1
    return report


def fuzz_rules(cfg: GenConfig, graph: Dag | None = None, report: FuzzReport | None = None,
               tol: float = 1e-9) -> FuzzReport:
    """Random nets and random ``(b, a, h, i)``: an applicable rule's equality must hold.

    With ``graph`` every trial reuses that structure and only the CPTs and
    the query vary.
    """
    report = report or FuzzReport(cfg.seed, asdict(cfg))
    seed_offset = 1  # keep the rule trials' streams apart from fuzz_dsep's
    for rng in trial_rngs(cfg.seed + seed_offset, cfg.trials):
        if graph is None:
            n = int(rng.integers(2, cfg.nodes + 1))
            dag = gen_dag(cfg, rng, n)
        else:
            dag = graph
        bn = gen_cpts(dag, cfg, rng)
        b, a, h, i = random_partition(sorted(dag.nodes), 2, 2, rng)
        q = RuleQuery(b, a, h, i)
        ev = RuleEvaluator(bn)
        verdicts = {}
        for r in RULES:
            verdict = rule_applicable(dag, r, q, witness=False)
            verdicts[r] = verdict.applicable
            check = ev.check(r, q, tol)
            c = report.rules[str(r)]
            if verdict.applicable:
                c["applicable"] += 1
                c["equality_held" if check.holds else "equality_failed"] += 1
                c["max_deviation"] = max(c["max_deviation"], check.max_deviation)
            elif check.holds:
                c["converse_held"] += 1
        if not children(cut_incoming(dag, h), a):
            report.rule2_childless_cases += 1
            report.rule2_childless_mismatches += verdicts[1] != verdicts[2]
        if verdicts[3]:
            report.s_prime_checked += 1
            report.s_prime_exceptions += not s_prime_check(dag, q)
    return report


def fuzz(cfg: GenConfig, graph: Dag | None = None, threshold: float = 0.05) -> FuzzReport:
    report = FuzzReport(cfg.seed, asdict(cfg), faithfulness_threshold=threshold)
    if graph is None:
        fuzz_dsep(cfg, report)
    return fuzz_rules(cfg, graph, report)


# exhaustive sweeps --------------------------------------------------------


def all_dags(n: int) -> list[bits.BitDag]:
    """Every labeled DAG on ``n`` nodes (1, 3, 25, 543, 29281 for n = 1..5)."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = [(u, v) if s == 1 else (v, u) for (u, v), s in zip(pairs, states) if s]
        g = bits.BitDag.from_edges(n, edges)
        if g.is_acyclic():
            out.append(g)
    return out


def bitdag_to_dag(g: bits.BitDag) -> Dag:
    names = node_names(g.n)
    return Dag(names, [(names[u], names[v]) for u, v in g.edges()])


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass
class DsepSweepResult:
    graphs: int = 0
    triples: int = 0
    disagreements: int = 0
    examples: list = field(default_factory=list)


def dsep_sweep(max_nodes: int = 5) -> DsepSweepResult:
    """Compare the path-enumeration and reachability engines on every triple."""
    res = DsepSweepResult()
    for n in range(1, max_nodes + 1):
        full = (1 << n) - 1
        e_values = np.arange(1 << n)
        for g in all_dags(n):
            res.graphs += 1
            conn = PathOracle(g).connections(e_values)
            for e in range(1 << n):
                row = conn[e]
                rest = full & ~e
                for a in _submasks(rest):
                    if not a:
                        continue
                    lit = 0
                    for u in bits.iter_bits(a):
                        lit |= int(row[u])
                    fast = bits.reach(g, a, e)
                    for b in _submasks(rest & ~a):
                        if not b:
                            continue
                        res.triples += 1
                        if (not lit & b) != (not fast & b):
                            res.disagreements += 1
                            if len(res.examples) < 10:
                                res.examples.append({"n": n, "edges": g.edges(), "a": a, "b": b, "e": e})
    return res


@dataclass
class RuleSweepResult:
    graphs: int = 0
    queries: int = 0
    applicable: dict = field(default_factory=lambda: {str(r): 0 for r in RULES})
    equality_failed: dict = field(default_factory=lambda: {str(r): 0 for r in RULES})
    max_deviation: dict = field(default_factory=lambda: {str(r): 0.0 for r in RULES})
    s_prime_checked: int = 0
    s_prime_exceptions: int = 0
    examples: dict = field(default_factory=lambda: {"equality": [], "s_prime": []})


def _record(lst: list, item, limit: int = 10):
    if len(lst) < limit:
        lst.append(item)


def rules_sweep(max_nodes: int = 5, seed: int = 0, max_card: int = 2, tol: float = 1e-9,
                min_nodes: int = 1, engine: str = "compiled") -> RuleSweepResult:
    """Every labeled DAG up to ``max_nodes`` with one random interior net each,
    and every ``(b, a, h, i)`` with ``b`` and ``a`` nonempty.

    For each rule whose graphical condition holds, the numeric equality is
    checked; for rule 3 the stronger root-augmented condition is also
    evaluated.  ``engine="python"`` runs the same loop without the compiled
    kernel (slow; used to cross-check it on small graphs).
    """
    if engine not in ("compiled", "python"):
        raise ValueError(f"unknown engine {engine!r}")
    res = RuleSweepResult()
    cfg = GenConfig(nodes=max(max_nodes, 1), max_card=max_card, seed=seed)
    for n in range(min_nodes, max_nodes + 1):
        graphs = all_dags(n)
        rngs = trial_rngs(seed + n, len(graphs))
        if engine == "compiled":
            _compiled_sweep(graphs, rngs, cfg, res, tol)
            continue
        for g, rng in zip(graphs, rngs):
            res.graphs += 1
            _sweep_graph(g, gen_cpts(bitdag_to_dag(g), cfg, rng), res, tol)
    return res


def _compiled_sweep(graphs, rngs, cfg: GenConfig, res: RuleSweepResult, tol: float):
    from . import sweep_kernel

    counts = np.zeros(9, dtype=np.int64)
    maxdev = np.zeros(3)
    examples = np.zeros((2, sweep_kernel.MAX_EXAMPLES, 5), dtype=np.int64)
    n_examples = np.zeros(2, dtype=np.int64)
    layouts = {}
    for g, rng in zip(graphs, rngs):
        res.graphs += 1
        bn = gen_cpts(bitdag_to_dag(g), cfg, rng)
        ev = RuleEvaluator(bn)
        tables = np.stack([ev.uprooted(s).ravel() for s in range(1 << g.n)])
        if bn.shape not in layouts:
            layouts[bn.shape] = sweep_kernel.layout(bn.shape)
        digits, strides = layouts[bn.shape]
        before = n_examples.copy()
        sweep_kernel.sweep_graph(
            g.n, np.array(g.par, dtype=np.int64), np.array(g.chi, dtype=np.int64),
            tables, digits, strides, tol, counts, maxdev, examples, n_examples,
        )
        for kind, label in enumerate(("equality", "s_prime")):
            for r, b, a, h, i in examples[kind, before[kind]:n_examples[kind]].tolist():
                item = {"edges": g.edges(), "b": b, "a": a, "h": h, "i": i}
                _record(res.examples[label], {"rule": r, **item} if kind == 0 else item)
    res.queries += int(counts[0])
    for k, r in enumerate(RULES):
        key = str(r)
        res.applicable[key] += int(counts[1 + k])
        res.equality_failed[key] += int(counts[4 + k])
        res.max_deviation[key] = max(res.max_deviation[key], float(maxdev[k]))
    res.s_prime_checked += int(counts[7])
    res.s_prime_exceptions += int(counts[8])


def _sweep_graph(g: bits.BitDag, bn: BayesNet, res: RuleSweepResult, tol: float):
    n = g.n
    full = g.full
    ev = RuleEvaluator(bn)
    cut_cache: dict[tuple[int, int], bits.BitDag] = {}

    def cut(incoming: int, outgoing: int = 0) -> bits.BitDag:
        key = (incoming, outgoing)
        out = cut_cache.get(key)
        if out is None:
            out = cut_cache[key] = g.cut(incoming, outgoing)
        return out

    for h in _submasks(full):
        g1 = cut(h)
        for i in _submasks(full & ~h):
            e = h | i
            anc_i = g1.ancestors_closure(i)
            for a in _submasks(full & ~e):
                if not a:
                    continue
                rest = full & ~(e | a)
                if not rest:
                    continue
                res.queries += (1 << bits.popcount(rest)) - 1
                a_minus = a & ~anc_i
                reach = (
                    bits.reach(g1, a, e),
                    bits.reach(cut(h, a), a, e),
                    bits.reach(cut(h | a_minus), a, e),
                )
                for r, rch in zip(RULES, reach):
                    free = rest & ~rch
                    for b in _submasks(free):
                        if not b:
                            continue
                        res.applicable[str(r)] += 1
                        dev, _, _ = ev.deviation(r, b, a, h, i)
                        key = str(r)
                        if dev > res.max_deviation[key]:
                            res.max_deviation[key] = dev
                        if dev > tol:
                            res.equality_failed[key] += 1
                            _record(res.examples["equality"],
                                    {"rule": r, "edges": g.edges(), "b": b, "a": a, "h": h, "i": i, "dev": dev})
                free3 = rest & ~reach[2]
                if free3:
                    aug, roots = g.add_roots(a)
                    aug = aug.cut(h)
                    rt = sum(1 << r for r in roots.values())
                    conn = bits.reach(aug, a | rt, e)
                    for b in _submasks(free3):
                        if not b:
                            continue
                        res.s_prime_checked += 1
                        if conn & b:
                            res.s_prime_exceptions += 1
                            _record(res.examples["s_prime"],
                                    {"edges": g.edges(), "b": b, "a": a, "h": h, "i": i})
