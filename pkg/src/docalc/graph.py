"""Directed acyclic graphs and the surgery operations used by the do-calculus.

Node sets are plain ``frozenset`` objects of node names.  Every function here
is pure: graphs are immutable and each construction returns a new ``Dag``.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

ROOT_PREFIX = "rt__"

NodeSet = frozenset


class GraphError(ValueError):
    """Raised for malformed graphs or queries on unknown nodes."""


class CycleError(GraphError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("edges create a directed cycle: " + " -> ".join(cycle))


def node_set(nodes: Iterable[str] | str | None) -> frozenset[str]:
    """Coerce ``nodes`` to a frozenset; a bare string is a single node."""
    if nodes is None:
        return frozenset()
    if isinstance(nodes, str):
        return frozenset([nodes])
    return frozenset(nodes)


def sorted_nodes(nodes: Iterable[str]) -> list[str]:
    return sorted(nodes)


@dataclass(frozen=True)
class Dag:
    """An immutable DAG over string-named nodes.

    Acyclicity is checked at construction time, so every ``Dag`` instance that
    exists is a valid DAG.
    """

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]] = frozenset()
    _parents: Mapping[str, frozenset[str]] = field(init=False, repr=False, compare=False)
    _children: Mapping[str, frozenset[str]] = field(init=False, repr=False, compare=False)
    _order: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = ()):
        nodes = frozenset(nodes)
        edge_list = [tuple(e) for e in edges]
        for name in nodes:
            if not isinstance(name, str) or not name:
                raise GraphError(f"node names must be nonempty strings, got {name!r}")
        edge_set = frozenset(edge_list)
        if len(edge_set) != len(edge_list):
            raise GraphError("duplicate edge")
        parents: dict[str, set[str]] = {v: set() for v in nodes}
        children: dict[str, set[str]] = {v: set() for v in nodes}
        for u, v in edge_set:
            for end in (u, v):
                if end not in nodes:
                    raise GraphError(f"edge ({u}, {v}) references unknown node {end!r}")
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            parents[v].add(u)
            children[u].add(v)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edge_set)
        object.__setattr__(
            self, "_parents", MappingProxyType({v: frozenset(p) for v, p in parents.items()})
        )
        object.__setattr__(
            self, "_children", MappingProxyType({v: frozenset(c) for v, c in children.items()})
        )
        object.__setattr__(self, "_order", _topological_order(nodes, parents, children))

    def __repr__(self) -> str:
        edges = ", ".join(f"{u}->{v}" for u, v in self.sorted_edges())
        return f"Dag(nodes={sorted(self.nodes)}, edges=[{edges}])"

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges)

    def topological_order(self) -> tuple[str, ...]:
        """Topological order, ties broken lexicographically."""
        return self._order

    def pa(self, v: str) -> frozenset[str]:
        return self._parents[v]

    def ch(self, v: str) -> frozenset[str]:
        return self._children[v]

    def roots(self) -> frozenset[str]:
        return frozenset(v for v in self.nodes if not self._parents[v])

    def leaves(self) -> frozenset[str]:
        return frozenset(v for v in self.nodes if not self._children[v])

    def check_subset(self, a: Iterable[str]) -> frozenset[str]:
        a = node_set(a)
        unknown = sorted(a - self.nodes)
        if unknown:
            raise GraphError(f"unknown node(s): {', '.join(unknown)}")
        return a


def _topological_order(nodes, parents, children) -> tuple[str, ...]:
    import heapq

    indeg = {v: len(parents[v]) for v in nodes}
    heap = [v for v in nodes if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(nodes):
        raise CycleError(_find_cycle(nodes, children))
    return tuple(order)


def _find_cycle(nodes, children) -> list[str]:
    color = dict.fromkeys(nodes, 0)
    stack: list[str] = []

    def visit(v):
        color[v] = 1
        stack.append(v)
        for c in sorted(children[v]):
            if color[c] == 1:
                return stack[stack.index(c):] + [c]
            if color[c] == 0:
                found = visit(c)
                if found:
                    return found
        stack.pop()
        color[v] = 2
        return None

    for v in sorted(nodes):
        if color[v] == 0:
            found = visit(v)
            if found:
                return found
    return []


def parents(g: Dag, a: Iterable[str]) -> frozenset[str]:
    """Union of the parents of every node in ``a`` (may intersect ``a``)."""
    a = g.check_subset(a)
    out: set[str] = set()
    for v in a:
        out |= g.pa(v)
    return frozenset(out)


def children(g: Dag, a: Iterable[str]) -> frozenset[str]:
    a = g.check_subset(a)
    out: set[str] = set()
    for v in a:
        out |= g.ch(v)
    return frozenset(out)


def _fixed_point(step: Callable[[str], frozenset[str]], start: frozenset[str]) -> frozenset[str]:
    seen: set[str] = set()
    frontier = set()
    for v in start:
        frontier |= step(v)
    while frontier:
        v = frontier.pop()
        if v in seen:
            continue
        seen.add(v)
        frontier |= step(v) - seen
    return frozenset(seen)


def ancestors(g: Dag, a: Iterable[str]) -> frozenset[str]:
    """All nodes with a directed path into ``a``; excludes ``a`` itself."""
    a = g.check_subset(a)
    return _fixed_point(g.pa, a) - a


def descendants(g: Dag, a: Iterable[str]) -> frozenset[str]:
    """All nodes reachable from ``a`` by a directed path; excludes ``a``."""
    a = g.check_subset(a)
    return _fixed_point(g.ch, a) - a


def closure(f: Callable[[Dag, frozenset[str]], frozenset[str]], g: Dag, a: Iterable[str]) -> frozenset[str]:
    """``f(g, a) | a`` for one of parents/children/ancestors/descendants."""
    if f not in (parents, children, ancestors, descendants):
        raise GraphError(f"closure is only defined for the four family functions, got {f!r}")
    a = g.check_subset(a)
    return f(g, a) | a


def reverse(g: Dag) -> Dag:
    return Dag(g.nodes, ((v, u) for u, v in g.edges))


def restrict(g: Dag, a: Iterable[str]) -> Dag:
    """Induced subgraph on ``a``."""
    a = g.check_subset(a)
    return Dag(a, ((u, v) for u, v in g.edges if u in a and v in a))


def cut_incoming(g: Dag, a: Iterable[str]) -> Dag:
    """Erase every arrow that enters ``a``."""
    a = g.check_subset(a)
    return Dag(g.nodes, ((u, v) for u, v in g.edges if v not in a))


def cut_outgoing(g: Dag, a: Iterable[str]) -> Dag:
    """Erase every arrow that leaves ``a``."""
    a = g.check_subset(a)
    return Dag(g.nodes, ((u, v) for u, v in g.edges if u not in a))


def root_name(v: str) -> str:
    return ROOT_PREFIX + v


def add_roots(g: Dag, a: Iterable[str]) -> tuple[Dag, dict[str, str]]:
    """Attach a fresh root ``rt__<v>`` with a single arrow into each ``v`` in ``a``.

    Returns the augmented graph and the map from each ``v`` to its root.
    Raises ``GraphError`` if a root name is already taken.
    """
    a = g.check_subset(a)
    root_map = {v: root_name(v) for v in sorted(a)}
    clash = sorted(r for r in root_map.values() if r in g.nodes)
    if clash:
        raise GraphError(f"root name(s) already in graph: {', '.join(clash)}")
    nodes = g.nodes | frozenset(root_map.values())
    edges = set(g.edges) | {(r, v) for v, r in root_map.items()}
    return Dag(nodes, edges), root_map
