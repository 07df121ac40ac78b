"""Discrete Bayesian networks and dense probability tables.

A ``ProbTable`` is a dense array over the joint states of its scope (first
variable slowest, i.e. C order).  Operations return tables whose scope is in
lexicographic order.  Cells whose conditioning probability is zero are not
NaN; they carry ``defined=False`` and hold 0.
"""

from __future__ import annotations

import math
import os
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .graph import Dag, GraphError, node_set

DEFAULT_STATE_CAP = 10**7
ROW_TOL = 1e-9


class StateSpaceError(ValueError):
    pass


class NetError(ValueError):
    pass


def state_cap() -> int:
    """Joint-table size limit; ``DOCALC_STATE_CAP`` overrides the default."""
    raw = os.environ.get("DOCALC_STATE_CAP")
    return int(raw) if raw else DEFAULT_STATE_CAP


@dataclass(frozen=True, eq=False)
class ProbTable:
    scope: tuple[str, ...]
    values: np.ndarray
    defined: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != len(self.scope):
            raise NetError(f"table has {values.ndim} axes for scope {self.scope}")
        if len(set(self.scope)) != len(self.scope):
            raise NetError("duplicate variable in scope")
        object.__setattr__(self, "values", values)
        if self.defined is not None:
            d = np.broadcast_to(np.asarray(self.defined, dtype=bool), values.shape)
            object.__setattr__(self, "defined", None if d.all() else d.copy())

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def defined_mask(self) -> np.ndarray:
        if self.defined is None:
            return np.ones(self.values.shape, dtype=bool)
        return self.defined

    def total(self) -> float:
        return float(self.values.sum())

    def slice(self, assignment: Mapping[str, int]) -> ProbTable:
        """Sub-table with the variables in ``assignment`` fixed; other keys are ignored."""
        index = tuple(assignment.get(v, slice(None)) for v in self.scope)
        rest = tuple(v for v in self.scope if v not in assignment)
        defined = None if self.defined is None else self.defined[index]
        return ProbTable(rest, self.values[index], defined)

    def __getitem__(self, assignment: Mapping[str, int]):
        """Value at a full assignment; a partial assignment returns a sub-table."""
        sub = self.slice(assignment)
        return float(sub.values) if not sub.scope else sub

    def is_defined(self, assignment: Mapping[str, int]) -> bool:
        return bool(self.defined_mask[tuple(assignment[v] for v in self.scope)])

    def canonical(self) -> ProbTable:
        order = sorted(range(len(self.scope)), key=lambda k: self.scope[k])
        if order == list(range(len(self.scope))):
            return self
        defined = None if self.defined is None else self.defined.transpose(order)
        return ProbTable(tuple(self.scope[k] for k in order), self.values.transpose(order), defined)

    def expand(self, scope: tuple[str, ...]) -> np.ndarray:
        """Values reshaped to broadcast against a table with ``scope``."""
        return _expand(self.values, self.scope, scope)

    def expand_defined(self, scope: tuple[str, ...]) -> np.ndarray:
        return _expand(self.defined_mask, self.scope, scope)

    def allclose(self, other: ProbTable, atol: float = 1e-12) -> bool:
        a, b = self.canonical(), other.canonical()
        if a.scope != b.scope or a.shape != b.shape:
            return False
        if not np.array_equal(a.defined_mask, b.defined_mask):
            return False
        return bool(np.all(np.abs(a.values - b.values)[a.defined_mask] <= atol))

    def max_abs_diff(self, other: ProbTable) -> float:
        """Largest cell difference over cells defined in both tables."""
        a, b = self.canonical(), other.canonical()
        if a.scope != b.scope:
            raise NetError(f"scope mismatch {a.scope} vs {b.scope}")
        mask = a.defined_mask & b.defined_mask
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(a.values - b.values)[mask]))

    def __repr__(self) -> str:
        return f"ProbTable(scope={self.scope}, shape={self.shape})"


def _expand(values: np.ndarray, scope: tuple[str, ...], target: tuple[str, ...]) -> np.ndarray:
    missing = [v for v in scope if v not in target]
    if missing:
        raise NetError(f"variables {missing} not in target scope {target}")
    order = sorted(range(len(scope)), key=lambda k: target.index(scope[k]))
    arr = values.transpose(order)
    present = [scope[k] for k in order]
    shape = []
    it = iter(arr.shape)
    for v in target:
        shape.append(next(it) if v in present else 1)
    return arr.reshape(shape)


@dataclass(frozen=True, eq=False)
class Cpt:
    """``table[parent states..., owner state]`` with parents in ``parents`` order."""

    owner: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != len(self.parents) + 1:
            raise NetError(f"CPT for {self.owner} needs {len(self.parents) + 1} axes, got {table.ndim}")
        if np.any(table < 0):
            raise NetError(f"CPT for {self.owner} has negative entries")
        sums = table.sum(axis=-1)
        if np.any(np.abs(sums - 1.0) > ROW_TOL):
            worst = float(np.max(np.abs(sums - 1.0)))
            raise NetError(f"CPT rows for {self.owner} do not sum to 1 (off by {worst:.3g})")
        table = table / sums[..., None]
        table.setflags(write=False)
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", table)

    def factor(self, scope: tuple[str, ...]) -> np.ndarray:
        return _expand(self.table, self.parents + (self.owner,), scope)

    def row(self, parent_states: Mapping[str, int]) -> np.ndarray:
        return self.table[tuple(parent_states[p] for p in self.parents)]


class BayesNet:
    """A DAG with a cardinality and a CPT per node."""

    def __init__(self, dag: Dag, cards: Mapping[str, int], cpts: Mapping[str, Cpt] | Iterable[Cpt]):
        if not isinstance(cpts, Mapping):
            cpts = {c.owner: c for c in cpts}
        self.dag = dag
        self.cards = dict(sorted(cards.items()))
        self.cpts = dict(sorted(cpts.items()))
        if set(self.cards) != set(dag.nodes):
            raise NetError("cardinalities must cover exactly the graph's nodes")
        for v, k in self.cards.items():
            if not isinstance(k, (int, np.integer)) or k < 1:
                raise NetError(f"cardinality of {v} must be a positive integer")
        if set(self.cpts) != set(dag.nodes):
            missing = sorted(set(dag.nodes) - set(self.cpts))
            raise NetError(f"missing CPT for {', '.join(missing)}" if missing else "CPT for unknown node")
        for v, cpt in self.cpts.items():
            if cpt.owner != v:
                raise NetError(f"CPT registered under {v} belongs to {cpt.owner}")
            if set(cpt.parents) != set(dag.pa(v)) or len(cpt.parents) != len(dag.pa(v)):
                raise NetError(f"CPT parents of {v} {cpt.parents} differ from graph parents {sorted(dag.pa(v))}")
            expect = tuple(self.cards[p] for p in cpt.parents) + (self.cards[v],)
            if cpt.table.shape != expect:
                raise NetError(f"CPT for {v} has shape {cpt.table.shape}, expected {expect}")

    @classmethod
    def from_arrays(cls, dag: Dag, tables: Mapping[str, np.ndarray]) -> BayesNet:
        """Build from arrays whose parent axes follow sorted parent names."""
        cpts = {}
        cards = {}
        for v in dag.nodes:
            t = np.asarray(tables[v], dtype=float)
            cards[v] = t.shape[-1]
            cpts[v] = Cpt(v, tuple(sorted(dag.pa(v))), t)
        return cls(dag, cards, cpts)

    @property
    def scope(self) -> tuple[str, ...]:
        return tuple(sorted(self.dag.nodes))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.cards[v] for v in self.scope)

    def state_count(self) -> int:
        return math.prod(self.cards.values())

    def check_cap(self, cap: int | None = None) -> None:
        cap = state_cap() if cap is None else cap
        if self.state_count() > cap:
            raise StateSpaceError(
                f"joint state space has {self.state_count()} cells, above the cap of {cap}; "
                "use a smaller network or raise DOCALC_STATE_CAP"
            )

    def factors(self, skip: Iterable[str] = ()) -> np.ndarray:
        """Product of all CPT factors except those owned by ``skip``, over ``scope``."""
        skip = node_set(skip)
        self.check_cap()
        scope = self.scope
        out = np.ones(self.shape)
        for v in scope:
            if v not in skip:
                out = out * self.cpts[v].factor(scope)
        return out

    def check_assignment(self, assignment: Mapping[str, int]) -> dict[str, int]:
        out = {}
        for v, s in assignment.items():
            if v not in self.cards:
                raise GraphError(f"unknown node {v!r}")
            if not 0 <= int(s) < self.cards[v]:
                raise NetError(f"state {s} out of range for {v} (cardinality {self.cards[v]})")
            out[v] = int(s)
        return out

    def __repr__(self) -> str:
        return f"BayesNet({self.dag!r}, cards={self.cards})"


def joint(bn: BayesNet) -> ProbTable:
    """The full joint distribution as the product of every CPT."""
    return ProbTable(bn.scope, bn.factors())


def _vars(t: ProbTable, s: Iterable[str]) -> frozenset[str]:
    s = node_set(s)
    unknown = sorted(s - set(t.scope))
    if unknown:
        raise NetError(f"variable(s) not in table scope: {', '.join(unknown)}")
    return s


def marginal(t: ProbTable, keep: Iterable[str]) -> ProbTable:
    keep = _vars(t, keep)
    t = t.canonical()
    axes = tuple(k for k, v in enumerate(t.scope) if v not in keep)
    values = t.values.sum(axis=axes)
    defined = None if t.defined is None else t.defined.all(axis=axes)
    return ProbTable(tuple(v for v in t.scope if v in keep), values, defined)


def conditional(t: ProbTable, target: Iterable[str], given: Iterable[str]) -> ProbTable:
    """``P(target | given)`` over ``target | given``; zero-mass contexts are undefined."""
    target, given = _vars(t, target), _vars(t, given)
    if target & given:
        raise NetError("target and given overlap")
    num = marginal(t, target | given)
    den = marginal(t, given)
    d = den.expand(num.scope)
    ok = np.broadcast_to((d > 0) & den.expand_defined(num.scope), num.shape) & num.defined_mask
    values = np.divide(num.values, d, out=np.zeros(num.shape), where=ok)
    return ProbTable(num.scope, values, ok)


def dep_ratio(t: ProbTable, a: Iterable[str], b: Iterable[str], c: Iterable[str] = ()) -> ProbTable:
    """``P(a,b|c) / (P(a|c) P(b|c))``; cells with a zero denominator are undefined."""
    a, b, c = _vars(t, a), _vars(t, b), _vars(t, c)
    if a & b or a & c or b & c:
        raise NetError("a, b, c must be pairwise disjoint")
    abc = marginal(t, a | b | c)
    scope = abc.scope
    p_c = marginal(t, c).expand(scope)
    p_ac = marginal(t, a | c).expand(scope)
    p_bc = marginal(t, b | c).expand(scope)
    den = np.broadcast_to(p_ac * p_bc, abc.shape)
    ok = den > 0
    values = np.divide(abc.values * p_c, den, out=np.zeros(abc.shape), where=ok)
    return ProbTable(scope, values, ok)


def ci_deviation(t: ProbTable, a: Iterable[str], b: Iterable[str], e: Iterable[str] = ()) -> float:
    """Max ``|P(a|b,e) - P(a|e)|`` over contexts with ``P(b,e) > 0``."""
    a, b, e = _vars(t, a), _vars(t, b), _vars(t, e)
    if a & b or a & e or b & e:
        raise NetError("a, b, e must be pairwise disjoint")
    lhs = conditional(t, a, b | e)
    rhs = conditional(t, a, e)
    gap = np.abs(lhs.values - rhs.expand(lhs.scope))
    mask = lhs.defined_mask & np.broadcast_to(rhs.expand_defined(lhs.scope), lhs.shape)
    return float(gap[mask].max()) if mask.any() else 0.0


def ci_holds(bn: BayesNet, a: Iterable[str], b: Iterable[str], e: Iterable[str] = (),
             tol: float = 1e-9) -> bool:
    return ci_deviation(joint(bn), a, b, e) <= tol
