"""Compiled inner loop for the exhaustive rule sweep.

``sweep_graph`` does for one graph what ``harness._sweep_graph`` does in
Python: every ``(b, a, h, i)`` query, the three graphical conditions, the
numeric equality of every applicable rule, and the root-augmented condition
for rule 3.  The two implementations are checked against each other in the
test suite.

Tables arrive as ``tables[s, cell]``: the product of every CPT factor except
those of the nodes in bitmask ``s``, flattened in C order over the sorted
scope (node 0 slowest).
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_EXAMPLES = 10


@njit(cache=True)
def _spread(table, mask):
    out = 0
    k = 0
    while mask:
        if mask & 1:
            out |= table[k]
        mask >>= 1
        k += 1
    return out


@njit(cache=True)
def _anc_closure(par, mask):
    seen = mask
    front = mask
    while front:
        front = _spread(par, front) & ~seen
        seen |= front
    return seen


@njit(cache=True)
def _reach(par, chi, source, given):
    observed_anc = _anc_closure(par, given)
    up = source
    down = 0
    up_f = source
    down_f = 0
    while up_f or down_f:
        open_up = up_f & ~given
        new_up = _spread(par, open_up) | _spread(par, down_f & observed_anc)
        new_down = _spread(chi, open_up) | _spread(chi, down_f & ~given)
        up_f = new_up & ~up
        down_f = new_down & ~down
        up |= up_f
        down |= down_f
    return (up | down) & ~given & ~source


@njit(cache=True)
def _cut(par, chi, n, incoming, outgoing, par_out, chi_out):
    for v in range(n):
        if incoming >> v & 1:
            par_out[v] = 0
        else:
            par_out[v] = par[v] & ~outgoing
        if outgoing >> v & 1:
            chi_out[v] = 0
        else:
            chi_out[v] = chi[v] & ~incoming


@njit(cache=True)
def _project(digits, strides, cell, keep):
    idx = 0
    k = 0
    m = keep
    while m:
        if m & 1:
            idx += digits[cell, k] * strides[k]
        m >>= 1
        k += 1
    return idx


@njit(cache=True)
def _marginal(table, digits, strides, keep, out):
    out[:] = 0.0
    for cell in range(table.shape[0]):
        out[_project(digits, strides, cell, keep)] += table[cell]


@njit(cache=True)
def _deviation(tables, digits, strides, s1, g1, s2, g2, b, bufs):
    """max |P_s1(b | g1) - P_s2(b | g2)| over cells where both contexts have mass."""
    num1, den1, num2, den2 = bufs[0], bufs[1], bufs[2], bufs[3]
    _marginal(tables[s1], digits, strides, b | g1, num1)
    _marginal(tables[s1], digits, strides, g1, den1)
    _marginal(tables[s2], digits, strides, b | g2, num2)
    _marginal(tables[s2], digits, strides, g2, den2)
    worst = 0.0
    for cell in range(digits.shape[0]):
        d1 = den1[_project(digits, strides, cell, g1)]
        d2 = den2[_project(digits, strides, cell, g2)]
        if d1 > 0.0 and d2 > 0.0:
            x = num1[_project(digits, strides, cell, b | g1)] / d1
            y = num2[_project(digits, strides, cell, b | g2)] / d2
            gap = abs(x - y)
            if gap > worst:
                worst = gap
    return worst


@njit(cache=True)
def _popcount(m):
    c = 0
    while m:
        m &= m - 1
        c += 1
    return c


@njit(cache=True)
def _note(examples, n_examples, kind, rule, b, a, h, i):
    k = n_examples[kind]
    if k < examples.shape[1]:
        row = examples[kind, k]
        row[0] = rule
        row[1] = b
        row[2] = a
        row[3] = h
        row[4] = i
        n_examples[kind] = k + 1


@njit(cache=True)
def sweep_graph(n, par, chi, tables, digits, strides, tol, counts, maxdev, examples, n_examples):
    """Accumulate one graph's sweep into the output arrays.

    ``counts`` = [queries, applicable r1..r3, failed r1..r3, s' checked, s' exceptions];
    ``maxdev`` per rule; ``examples[kind]`` rows are (rule, b, a, h, i) for the
    first failures of each kind, 0 = equality, 1 = root-augmented condition.
    """
    full = (1 << n) - 1
    bufs = np.zeros((4, digits.shape[0]))
    p1 = np.zeros(n, dtype=np.int64)
    c1 = np.zeros(n, dtype=np.int64)
    p2 = np.zeros(n, dtype=np.int64)
    c2 = np.zeros(n, dtype=np.int64)
    p3 = np.zeros(n, dtype=np.int64)
    c3 = np.zeros(n, dtype=np.int64)
    pa = np.zeros(2 * n, dtype=np.int64)
    ca = np.zeros(2 * n, dtype=np.int64)
    reach = np.zeros(3, dtype=np.int64)
    h = full
    while True:
        _cut(par, chi, n, h, 0, p1, c1)
        free_h = full & ~h
        i = free_h
        while True:
            e = h | i
            anc_i = _anc_closure(p1, i)
            free_hi = full & ~e
            a = free_hi
            while a:
                rest = full & ~(e | a)
                if rest:
                    counts[0] += (1 << _popcount(rest)) - 1
                    a_minus = a & ~anc_i
                    _cut(par, chi, n, h, a, p2, c2)
                    _cut(par, chi, n, h | a_minus, 0, p3, c3)
                    reach[0] = _reach(p1, c1, a, e)
                    reach[1] = _reach(p2, c2, a, e)
                    reach[2] = _reach(p3, c3, a, e)
                    for r in range(3):
                        free = rest & ~reach[r]
                        b = free
                        while b:
                            counts[1 + r] += 1
                            if r == 0:
                                dev = _deviation(tables, digits, strides, h, a | h | i, h, h | i, b, bufs)
                            elif r == 1:
                                dev = _deviation(tables, digits, strides, a | h, a | h | i, h, a | h | i, b, bufs)
                            else:
                                dev = _deviation(tables, digits, strides, a | h, a | h | i, h, h | i, b, bufs)
                            if dev > maxdev[r]:
                                maxdev[r] = dev
                            if dev > tol:
                                counts[4 + r] += 1
                                _note(examples, n_examples, 0, r + 1, b, a, h, i)
                            b = (b - 1) & free
                    free3 = rest & ~reach[2]
                    if free3:
                        # root-augmented graph: node n + k is the root of the k-th bit of a
                        m = n
                        for v in range(n):
                            pa[v] = par[v]
                            ca[v] = chi[v]
                        rt = 0
                        for v in range(n):
                            if a >> v & 1:
                                pa[m] = 0
                                ca[m] = 1 << v
                                pa[v] |= 1 << m
                                rt |= 1 << m
                                m += 1
                        for v in range(m):
                            if h >> v & 1:
                                pa[v] = 0
                            else:
                                ca[v] &= ~h
                        conn = _reach(pa[:m], ca[:m], a | rt, e)
                        b = free3
                        while b:
                            counts[7] += 1
                            if conn & b:
                                counts[8] += 1
                                _note(examples, n_examples, 1, 3, b, a, h, i)
                            b = (b - 1) & free3
                a = (a - 1) & free_hi
            if i == 0:
                break
            i = (i - 1) & free_h
        if h == 0:
            break
        h = (h - 1) & full


def layout(shape: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell digits and C-order strides for a table of ``shape``."""
    n = len(shape)
    cells = int(np.prod(shape)) if n else 1
    digits = np.array(np.unravel_index(np.arange(cells), shape)).T.astype(np.int64).reshape(cells, n)
    strides = np.ones(n, dtype=np.int64)
    for k in range(n - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    return digits, strides
