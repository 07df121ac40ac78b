"""Line-oriented text format for graphs and networks.

::

    # comment
    node X 2
    node Y 3
    edge X Y
    cpt X |
    : 0.4 0.6
    cpt Y | X
    0: 0.2 0.3 0.5
    1: 0.1 0.1 0.8

``node`` declares a node and its cardinality (optional in graph-only files);
``edge`` declares an arrow.  A ``cpt`` header lists the parent order; each row
gives the parent states (first parent slowest, digits either packed or space
separated) and the owner's probabilities.  Root CPTs have one row with an
empty state field, and the ``:`` may be dropped.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from .bayesnet import BayesNet, Cpt
from .graph import Dag


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _parse(text: str):
    nodes: dict[str, int | None] = {}
    edges: list[tuple[str, str]] = []
    cpts: dict[str, tuple[tuple[str, ...], list[tuple[int, str]]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "node":
            current = None
            if len(rest) not in (1, 2):
                raise FormatError("expected: node <name> [<cardinality>]", lineno)
            name = rest[0]
            if name in nodes:
                raise FormatError(f"duplicate node {name}", lineno)
            try:
                card = int(rest[1]) if len(rest) == 2 else None
            except ValueError:
                raise FormatError(f"bad cardinality {rest[1]!r}", lineno) from None
            if card is not None and card < 1:
                raise FormatError("cardinality must be at least 1", lineno)
            nodes[name] = card
        elif head == "edge":
            current = None
            if len(rest) != 2:
                raise FormatError("expected: edge <parent> <child>", lineno)
            edge = (rest[0], rest[1])
            if edge in edges:
                raise FormatError(f"duplicate edge {edge[0]} {edge[1]}", lineno)
            edges.append(edge)
        elif head == "cpt":
            body = line[3:]
            if "|" not in body:
                raise FormatError("expected: cpt <node> | <parents...>", lineno)
            left, right = body.split("|", 1)
            owner = left.split()
            if len(owner) != 1:
                raise FormatError("expected exactly one node before '|'", lineno)
            current = owner[0]
            if current in cpts:
                raise FormatError(f"duplicate cpt for {current}", lineno)
            cpts[current] = (tuple(right.split()), [])
        elif current is not None:
            cpts[current][1].append((lineno, line))
        else:
            raise FormatError(f"unexpected line {line!r}", lineno)
    for u, v in edges:
        for end in (u, v):
            if end not in nodes:
                raise FormatError(f"edge {u} {v} uses undeclared node {end}")
    return nodes, edges, cpts


def parse_graph(text: str) -> Dag:
    nodes, edges, _ = _parse(text)
    return Dag(nodes, edges)


def _row_states(field: str, n_parents: int, lineno: int) -> tuple[int, ...]:
    field = field.strip()
    if any(c.isspace() for c in field) or n_parents == 1:
        parts = field.split()
    else:
        parts = list(field)
    if len(parts) != n_parents:
        raise FormatError(f"expected {n_parents} parent state(s), got {field!r}", lineno)
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise FormatError(f"bad parent states {field!r}", lineno) from None


def parse_net(text: str) -> BayesNet:
    nodes, edges, blocks = _parse(text)
    dag = Dag(nodes, edges)
    missing = sorted(v for v, c in nodes.items() if c is None)
    if missing:
        raise FormatError(f"network nodes need a cardinality: {', '.join(missing)}")
    unknown = sorted(set(blocks) - set(nodes))
    if unknown:
        raise FormatError(f"cpt for undeclared node(s): {', '.join(unknown)}")
    cpts = {}
    for v in sorted(nodes):
        if v not in blocks:
            raise FormatError(f"missing cpt for {v}")
        parent_order, rows = blocks[v]
        if set(parent_order) != dag.pa(v) or len(parent_order) != len(dag.pa(v)):
            raise FormatError(f"cpt {v} lists parents {list(parent_order)}, graph has {sorted(dag.pa(v))}")
        shape = tuple(nodes[p] for p in parent_order) + (nodes[v],)
        table = np.full(shape, np.nan)
        seen = set()
        for lineno, line in rows:
            field, probs = line.split(":", 1) if ":" in line else ("", line)
            states = _row_states(field, len(parent_order), lineno)
            if states in seen:
                raise FormatError(f"duplicate row {states} in cpt {v}", lineno)
            for p, s in zip(parent_order, states):
                if not 0 <= s < nodes[p]:
                    raise FormatError(f"state {s} out of range for {p}", lineno)
            try:
                values = [float(x) for x in probs.split()]
            except ValueError:
                raise FormatError(f"bad probability in {probs!r}", lineno) from None
            if len(values) != nodes[v]:
                raise FormatError(f"expected {nodes[v]} probabilities, got {len(values)}", lineno)
            seen.add(states)
            table[states] = values
        expected = set(itertools.product(*(range(nodes[p]) for p in parent_order)))
        if seen != expected:
            raise FormatError(f"cpt {v} is missing rows for {sorted(expected - seen)}")
        cpts[v] = Cpt(v, parent_order, table)
    return BayesNet(dag, {v: c for v, c in nodes.items()}, cpts)


def format_graph(g: Dag, cards: dict[str, int] | None = None) -> str:
    lines = []
    for v in sorted(g.nodes):
        lines.append(f"node {v} {cards[v]}" if cards else f"node {v}")
    lines += [f"edge {u} {v}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def format_net(bn: BayesNet) -> str:
    lines = [format_graph(bn.dag, bn.cards).rstrip("\n")]
    for v in bn.scope:
        cpt = bn.cpts[v]
        lines.append(f"cpt {v} | {' '.join(cpt.parents)}".rstrip())
        packed = all(bn.cards[p] <= 10 for p in cpt.parents)
        for states in itertools.product(*(range(bn.cards[p]) for p in cpt.parents)):
            key = "".join(map(str, states)) if packed else " ".join(map(str, states))
            probs = " ".join(repr(float(x)) for x in cpt.table[states])
            lines.append(f"{key}: {probs}")
    return "\n".join(lines) + "\n"


def read_graph(path: str | Path) -> Dag:
    return parse_graph(Path(path).read_text())


def read_net(path: str | Path) -> BayesNet:
    return parse_net(Path(path).read_text())
