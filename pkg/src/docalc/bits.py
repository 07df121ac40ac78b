"""Bitmask view of a DAG for the reachability engine and the exhaustive sweeps.

Node ``k`` of a ``BitDag`` is the ``k``-th name in lexicographic order and is
represented by bit ``1 << k``.  Node sets are ints.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

from .graph import Dag


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def _spread(table: tuple[int, ...], mask: int) -> int:
    out = 0
    while mask:
        low = mask & -mask
        out |= table[low.bit_length() - 1]
        mask ^= low
    return out


@dataclass(frozen=True)
class BitDag:
    n: int
    par: tuple[int, ...]
    chi: tuple[int, ...]

    @classmethod
    def from_dag(cls, g: Dag) -> tuple[BitDag, list[str]]:
        names = sorted(g.nodes)
        index = {v: k for k, v in enumerate(names)}
        par = [0] * len(names)
        chi = [0] * len(names)
        for u, v in g.edges:
            par[index[v]] |= 1 << index[u]
            chi[index[u]] |= 1 << index[v]
        return cls(len(names), tuple(par), tuple(chi)), names

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> BitDag:
        par = [0] * n
        chi = [0] * n
        for u, v in edges:
            par[v] |= 1 << u
            chi[u] |= 1 << v
        return cls(n, tuple(par), tuple(chi))

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in iter_bits(self.chi[u])]

    def parents_of(self, mask: int) -> int:
        return _spread(self.par, mask)

    def children_of(self, mask: int) -> int:
        return _spread(self.chi, mask)

    def ancestors_closure(self, mask: int) -> int:
        seen = mask
        frontier = mask
        while frontier:
            frontier = _spread(self.par, frontier) & ~seen
            seen |= frontier
        return seen

    def descendants_closure(self, mask: int) -> int:
        seen = mask
        frontier = mask
        while frontier:
            frontier = _spread(self.chi, frontier) & ~seen
            seen |= frontier
        return seen

    def cut(self, incoming: int = 0, outgoing: int = 0) -> BitDag:
        """Remove arrows entering ``incoming`` and arrows leaving ``outgoing``."""
        par = list(self.par)
        chi = list(self.chi)
        for v in range(self.n):
            if incoming >> v & 1:
                par[v] = 0
            else:
                par[v] &= ~outgoing
            if outgoing >> v & 1:
                chi[v] = 0
            else:
                chi[v] &= ~incoming
        return BitDag(self.n, tuple(par), tuple(chi))

    def add_roots(self, mask: int) -> tuple[BitDag, dict[int, int]]:
        """Append one root node per bit of ``mask``; returns the root index map."""
        par = list(self.par)
        chi = list(self.chi)
        roots = {}
        for v in iter_bits(mask):
            r = len(par)
            roots[v] = r
            par.append(0)
            chi.append(1 << v)
            par[v] |= 1 << r
        return BitDag(len(par), tuple(par), tuple(chi)), roots

    def is_acyclic(self) -> bool:
        remaining = self.full
        while remaining:
            sources = 0
            for v in iter_bits(remaining):
                if not self.par[v] & remaining:
                    sources |= 1 << v
            if not sources:
                return False
            remaining &= ~sources
        return True


def reach(g: BitDag, source: int, given: int) -> int:
    """Nodes d-connected to ``source`` given ``given`` (excluding ``given``).

    Set-valued form of the active-trail reachability search: ``up`` holds
    nodes entered from a child (or the start), ``down`` nodes entered from a
    parent.  A node entered from a parent passes the ball back up only if it
    or one of its descendants is observed.
    """
    observed_anc = g.ancestors_closure(given)
    not_given = ~given
    up = source
    down = 0
    up_front = source
    down_front = 0
    while up_front or down_front:
        open_up = up_front & not_given
        new_up = _spread(g.par, open_up) | _spread(g.par, down_front & observed_anc)
        new_down = _spread(g.chi, open_up) | _spread(g.chi, down_front & not_given)
        up_front = new_up & ~up
        down_front = new_down & ~down
        up |= up_front
        down |= down_front
    return (up | down) & not_given & ~source


def separated(g: BitDag, a: int, b: int, e: int) -> bool:
    return not reach(g, a, e) & b
