"""Interventional distributions: uprooting (do), mowing, and the root switch.

Uprooting a set ``a`` drops the CPT factors of ``a`` from the joint product.
The resulting table over all nodes is an interventional *family*: fixing the
states of ``a`` leaves a normalized distribution over the other nodes.
Mowing ``a`` to ``a'`` keeps the CPTs of ``a`` but feeds ``a'`` instead of
the actual states of ``a`` into every child's CPT.

Everything is computed by exact enumeration over the joint state space.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .bayesnet import BayesNet, Cpt, NetError, ProbTable, conditional, marginal
from .graph import add_roots, node_set

Assignment = Mapping[str, int]

SWITCH_PRIOR = (0.5, 0.5)


class UnsupportedQuery(ValueError):
    pass


@dataclass(frozen=True)
class Query:
    """A symbolic ``P(target | given)``; ``given`` empty means a plain marginal."""

    target: frozenset[str]
    given: frozenset[str] = frozenset()

    def __init__(self, target: Iterable[str], given: Iterable[str] = ()):
        object.__setattr__(self, "target", node_set(target))
        object.__setattr__(self, "given", node_set(given))
        if self.target & self.given:
            raise UnsupportedQuery("target and given overlap")

    @property
    def scope(self) -> frozenset[str]:
        return self.target | self.given

    def __str__(self) -> str:
        t = ",".join(sorted(self.target))
        return f"P({t}|{','.join(sorted(self.given))})" if self.given else f"P({t})"


@dataclass(frozen=True)
class InterventionSpec:
    uprooted: Mapping[str, int]
    mowed: Mapping[str, int]

    def __post_init__(self):
        overlap = set(self.uprooted) & set(self.mowed)
        if overlap:
            raise NetError(f"nodes both uprooted and mowed: {', '.join(sorted(overlap))}")


def _evaluate(t: ProbTable, q: Query) -> ProbTable:
    """``q`` evaluated on a (possibly unnormalized) table via the ratio rule."""
    num = marginal(t, q.scope)
    if not q.given:
        return num
    return conditional(t, q.target, q.given)


def uproot(bn: BayesNet, a: Iterable[str]) -> ProbTable:
    """Truncated product over all nodes with the factors of ``a`` removed.

    Slicing the result at any state of ``a`` gives ``P(x - a | do(a))``, which
    sums to one.
    """
    a = bn.dag.check_subset(node_set(a))
    return ProbTable(bn.scope, bn.factors(skip=a))


def uproot_at(bn: BayesNet, a_values: Assignment) -> ProbTable:
    """``P(x - a | do(a = a_values))`` as a normalized table over the remaining nodes."""
    a_values = bn.check_assignment(a_values)
    return uproot(bn, a_values).slice(a_values)


def do_query(bn: BayesNet, b: Iterable[str], a: Assignment, e: Iterable[str] = ()) -> ProbTable:
    """``P(b | do(a), e)`` as a table over ``b | e``; contexts with ``P(e|do(a)) = 0`` are undefined."""
    a = bn.check_assignment(a)
    b, e = bn.dag.check_subset(node_set(b)), bn.dag.check_subset(node_set(e))
    if b & e or b & set(a) or e & set(a):
        raise NetError("b, keys(a), and e must be pairwise disjoint")
    sliced = uproot_at(bn, a)
    if not e:
        return marginal(sliced, b)
    return conditional(sliced, b, e)


def root_switch_net(bn: BayesNet, a: Iterable[str]) -> BayesNet:
    """Augment ``bn`` with a binary switch root ``rt__v`` for each ``v`` in ``a``.

    With the switch at 0 the node keeps its CPT; at 1 it ignores its parents
    and follows its own marginal under ``bn``.
    """
    a = bn.dag.check_subset(node_set(a))
    dag, roots = add_roots(bn.dag, a)
    cards = dict(bn.cards)
    cpts = dict(bn.cpts)
    base = marginal(ProbTable(bn.scope, bn.factors()), a) if a else None
    for v, r in roots.items():
        cards[r] = 2
        cpts[r] = Cpt(r, (), np.array(SWITCH_PRIOR))
        old = bn.cpts[v]
        own = marginal(base, {v}).values
        table = np.empty(old.table.shape[:-1] + (2, cards[v]))
        table[..., 0, :] = old.table
        table[..., 1, :] = own
        cpts[v] = Cpt(v, old.parents + (r,), table)
    return BayesNet(dag, cards, cpts)


def _mowed_factor(bn: BayesNet, v: str, fixed: Assignment, scope: tuple[str, ...]) -> np.ndarray:
    cpt = bn.cpts[v]
    index = tuple(fixed.get(p, slice(None)) for p in cpt.parents)
    kept = tuple(p for p in cpt.parents if p not in fixed)
    return ProbTable(kept + (v,), cpt.table[index]).expand(scope)


def intervened_table(bn: BayesNet, spec: InterventionSpec) -> ProbTable:
    """Joint product with ``spec.uprooted`` factors dropped and ``spec.mowed`` fed to children."""
    uprooted = bn.check_assignment(spec.uprooted)
    mowed = bn.check_assignment(spec.mowed)
    scope = bn.scope
    bn.check_cap()
    out = np.ones(bn.shape)
    for v in scope:
        if v in uprooted:
            continue
        if v in mowed:
            out = out * bn.cpts[v].factor(scope)
        else:
            out = out * _mowed_factor(bn, v, mowed, scope)
    return ProbTable(scope, out).slice(uprooted)


def mow(bn: BayesNet, a: Iterable[str], a_prime: Assignment) -> ProbTable:
    """``P`` with ``a`` mowed to ``a_prime``: a normalized table over all nodes."""
    a = bn.dag.check_subset(node_set(a))
    a_prime = bn.check_assignment(a_prime)
    if set(a_prime) != a:
        raise NetError("mow needs exactly one value per node of a")
    return intervened_table(bn, InterventionSpec({}, a_prime))


def op_uproot(bn: BayesNet, a: Iterable[str], query: Query) -> ProbTable:
    """Apply the uprooting operator for ``a`` to ``query``.

    Plain marginals map to marginals of the truncated product (so states of
    ``a`` outside the query are summed, not averaged); conditionals are
    ratios of two such marginals.
    """
    bn.dag.check_subset(query.scope)
    return _evaluate(uproot(bn, a), query)


def op_mow(bn: BayesNet, a: Iterable[str], a_prime: Assignment, query: Query) -> ProbTable:
    bn.dag.check_subset(query.scope)
    return _evaluate(mow(bn, a, a_prime), query)


def _states(bn: BayesNet, nodes: Iterable[str]):
    nodes = sorted(nodes)
    for combo in itertools.product(*(range(bn.cards[v]) for v in nodes)):
        yield dict(zip(nodes, combo))


def op_mow_limit(bn: BayesNet, a: Iterable[str], query: Query) -> ProbTable:
    """Mow ``a`` to ``a'`` inside ``query`` and then set ``a'`` equal to ``a``.

    Only ``P(a, b)``, ``P(b)`` and ``P(b | a)`` with ``b`` disjoint from ``a``
    are accepted.  The result is a table over ``a | b``.
    """
    a = bn.dag.check_subset(node_set(a))
    bn.dag.check_subset(query.scope)
    if not a:
        raise UnsupportedQuery("the mowed set must be nonempty")
    joint_shape = not query.given and a <= query.target
    marginal_shape = not query.given and not (a & query.target)
    cond_shape = query.given == a and not (a & query.target)
    if not (joint_shape or marginal_shape or cond_shape):
        raise UnsupportedQuery(f"{query} is not one of P(a,b), P(b), P(b|a) for a={sorted(a)}")
    b = query.target - a
    scope = tuple(sorted(a | b))
    shape = tuple(bn.cards[v] for v in scope)
    out = np.zeros(shape)
    defined = np.ones(shape, dtype=bool)
    for alpha in _states(bn, a):
        sub = op_mow(bn, a, alpha, query).slice(alpha)
        index = tuple(alpha.get(v, slice(None)) for v in scope)
        rest = tuple(v for v in scope if v not in alpha)
        out[index] = sub.expand(rest) if rest else sub.values
        defined[index] = np.broadcast_to(sub.expand_defined(rest), out[index].shape) if rest else sub.defined_mask
    return ProbTable(scope, out, defined)
