"""The three do-calculus rules: graphical conditions and numeric equalities.

A query splits the nodes of a graph into ``b`` (outcome), ``a`` (the set the
rule acts on), ``h`` (intervened on throughout), ``i`` (observed), and the
remaining nodes ``o``.  The equalities each rule licenses are

* rule 1: ``P(b | a, do(h), i) = P(b | do(h), i)``
* rule 2: ``P(b | do(a), do(h), i) = P(b | a, do(h), i)``
* rule 3: ``P(b | do(a), do(h), i) = P(b | do(h), i)``

Interventions on disjoint sets compose, so ``do(a), do(h)`` is evaluated as a
single uprooting of ``a | h``.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .bayesnet import BayesNet
from .dsep import MAX_PATH_NODES, UndirectedPath, d_separated, d_separated_fast
from .graph import Dag, GraphError, add_roots, ancestors, cut_incoming, cut_outgoing, node_set

RULES = (1, 2, 3)


@dataclass(frozen=True)
class RuleQuery:
    b: frozenset[str]
    a: frozenset[str]
    h: frozenset[str] = frozenset()
    i: frozenset[str] = frozenset()

    def __init__(self, b: Iterable[str], a: Iterable[str], h: Iterable[str] = (), i: Iterable[str] = ()):
        for name, value in zip("bahi", (b, a, h, i)):
            object.__setattr__(self, name, node_set(value))

    def check(self, g: Dag) -> RuleQuery:
        for name in "bahi":
            g.check_subset(getattr(self, name))
        if not self.b or not self.a:
            raise GraphError("b and a must be nonempty")
        sets = [("b", self.b), ("a", self.a), ("h", self.h), ("i", self.i)]
        for k, (n1, s1) in enumerate(sets):
            for n2, s2 in sets[k + 1:]:
                if s1 & s2:
                    raise GraphError(f"query sets {n1} and {n2} overlap on {', '.join(sorted(s1 & s2))}")
        return self

    def others(self, g: Dag) -> frozenset[str]:
        return g.nodes - self.b - self.a - self.h - self.i


@dataclass(frozen=True)
class EqualityCheck:
    max_deviation: float
    holds: bool
    checked_cells: int
    skipped_cells: int


@dataclass(frozen=True)
class RuleVerdict:
    rule: int
    applicable: bool
    graph: Dag
    witness: UndirectedPath | None = None
    numeric: EqualityCheck | None = None


def g1(g: Dag, q: RuleQuery) -> Dag:
    return cut_incoming(g, q.h)


def g2(g: Dag, q: RuleQuery) -> Dag:
    return cut_outgoing(cut_incoming(g, q.h), q.a)


def a_minus(g: Dag, q: RuleQuery) -> frozenset[str]:
    """Members of ``a`` that are not ancestors of ``i`` once arrows into ``h`` are cut."""
    return q.a - ancestors(cut_incoming(g, q.h), q.i)


def g3(g: Dag, q: RuleQuery) -> Dag:
    gh = cut_incoming(g, q.h)
    return cut_incoming(gh, q.a - ancestors(gh, q.i))


def g3_prime(g: Dag, q: RuleQuery) -> tuple[Dag, dict[str, str]]:
    """Root-augmented graph with arrows into ``h`` cut, used to argue rule 3."""
    augmented, roots = add_roots(g, q.a)
    return cut_incoming(augmented, q.h), roots


MUTILATE = {1: g1, 2: g2, 3: g3}


def _rule(rule: int) -> int:
    if rule not in RULES:
        raise ValueError(f"rule must be 1, 2 or 3, got {rule!r}")
    return rule


def rule_applicable(g: Dag, rule: int, q: RuleQuery, witness: bool = True,
                    bn: BayesNet | None = None, tol: float = 1e-9) -> RuleVerdict:
    """Decide ``(b _|_ a | h, i)`` in the rule's mutilated graph.

    With ``witness`` the literal path engine is rerun on graphs small enough
    for path enumeration to report the first unblocked path.  Passing ``bn``
    also attaches the numeric equality check.
    """
    rule = _rule(rule)
    q.check(g)
    mg = MUTILATE[rule](g, q)
    given = q.h | q.i
    applicable = d_separated_fast(mg, q.b, q.a, given)
    path = None
    if witness and not applicable and len(mg.nodes) <= MAX_PATH_NODES:
        path = d_separated(mg, q.b, q.a, given).witness
    numeric = rule_equality_holds(bn, rule, q, tol) if bn is not None else None
    return RuleVerdict(rule, applicable, mg, path, numeric)


def s_prime_check(g: Dag, q: RuleQuery) -> bool:
    """``(b _|_ a, rt(a) | h, i)`` in the root-augmented graph ``g3_prime``."""
    q.check(g)
    gp, roots = g3_prime(g, q)
    return d_separated_fast(gp, q.b, q.a | frozenset(roots.values()), q.h | q.i)


class RuleEvaluator:
    """Numeric sides of the rule equalities for one network, with caching.

    Tables are kept as full-rank arrays with singleton axes for summed-out
    variables so that every conditional broadcasts against every other.
    Node sets are bitmasks over the network's sorted scope.
    """

    def __init__(self, bn: BayesNet):
        bn.check_cap()
        self.bn = bn
        self.scope = bn.scope
        self.index = {v: k for k, v in enumerate(self.scope)}
        n = len(self.scope)
        self._factors = [bn.cpts[v].factor(self.scope) for v in self.scope]
        self._uprooted: dict[int, np.ndarray] = {}
        self._marg: dict[tuple[int, int], np.ndarray] = {}
        self._cond: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray]] = {}
        self._axes = {}
        self._n = n

    def mask(self, nodes: Iterable[str]) -> int:
        return sum(1 << self.index[v] for v in nodes)

    def uprooted(self, s: int) -> np.ndarray:
        t = self._uprooted.get(s)
        if t is None:
            t = np.ones(self.bn.shape)
            for k, f in enumerate(self._factors):
                if not s >> k & 1:
                    t = t * f
            self._uprooted[s] = t
        return t

    def marginal(self, s: int, keep: int) -> np.ndarray:
        key = (s, keep)
        m = self._marg.get(key)
        if m is None:
            axes = self._axes.get(keep)
            if axes is None:
                axes = self._axes[keep] = tuple(k for k in range(self._n) if not keep >> k & 1)
            m = self._marg[key] = self.uprooted(s).sum(axis=axes, keepdims=True)
        return m

    def conditional(self, s: int, target: int, given: int) -> tuple[np.ndarray, np.ndarray]:
        """``P(target | do(s), given - s)`` and its definedness mask."""
        key = (s, target, given)
        c = self._cond.get(key)
        if c is None:
            num = self.marginal(s, target | given)
            den = self.marginal(s, given)
            ok = den > 0
            c = np.divide(num, den, out=np.zeros(num.shape), where=ok), ok
            self._cond[key] = c
        return c

    def sides(self, rule: int, b: int, a: int, h: int, i: int):
        if rule == 1:
            return self.conditional(h, b, a | h | i), self.conditional(h, b, h | i)
        if rule == 2:
            return self.conditional(a | h, b, a | h | i), self.conditional(h, b, a | h | i)
        return self.conditional(a | h, b, a | h | i), self.conditional(h, b, h | i)

    def deviation(self, rule: int, b: int, a: int, h: int, i: int) -> tuple[float, int, int]:
        """Max cell gap between the two sides, cells compared, cells skipped."""
        (x, okx), (y, oky) = self.sides(rule, b, a, h, i)
        ok = okx & oky
        gap = np.abs(x - y)
        total = 1
        for k in range(self._n):
            if (b | a | h | i) >> k & 1:
                total *= self.bn.shape[k]
        ok = np.broadcast_to(ok, np.broadcast_shapes(ok.shape, gap.shape))
        checked = int(ok.sum())
        worst = float(gap[ok].max()) if checked else 0.0
        return worst, checked, total - checked

    def check(self, rule: int, q: RuleQuery, tol: float = 1e-9) -> EqualityCheck:
        worst, checked, skipped = self.deviation(
            _rule(rule), self.mask(q.b), self.mask(q.a), self.mask(q.h), self.mask(q.i)
        )
        return EqualityCheck(worst, worst <= tol, checked, skipped)


def rule_equality_holds(bn: BayesNet, rule: int, q: RuleQuery, tol: float = 1e-9,
                        evaluator: RuleEvaluator | None = None) -> EqualityCheck:
    """Evaluate both sides of the rule's equality on every cell of ``(b, a, h, i)``.

    Cells whose conditioning context has probability zero are skipped and
    counted in ``skipped_cells``.
    """
    q.check(bn.dag)
    evaluator = evaluator or RuleEvaluator(bn)
    return evaluator.check(rule, q, tol)
