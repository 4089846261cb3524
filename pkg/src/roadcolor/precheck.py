"""Feasibility analysis for synchronizing colorings.

A graph can admit a synchronizing coloring only if it has a unique sink
strongly connected component and the gcd of the cycle lengths inside
that component is one.  This module decides both conditions and also
finds the two structural shortcuts the recoloring engine exploits:
self-loops and vertices with two incoming bunches.
"""

from collections import defaultdict
from dataclasses import dataclass
from math import gcd as _int_gcd
from typing import Sequence

from roadcolor.model import Digraph, EdgeRef
from roadcolor.spanning import StablePair


class MultipleSinks(Exception):
    """More than one sink component: not road-colorable."""

    def __init__(self, count: int):
        super().__init__(f"{count} sink components")
        self.count = count


@dataclass(frozen=True)
class SccDecomposition:
    component_of: tuple[int, ...]
    components: tuple[frozenset[int], ...]
    sink_ids: tuple[int, ...]


@dataclass(frozen=True)
class GcdReport:
    """Traversal depths, the difference set they induce, and its gcd.

    ``levels[v]`` is the depth-first discovery depth (start has depth 1).
    Every edge into an already-discovered vertex witnesses two paths from
    the start to its target; the absolute difference of their lengths is
    a member of ``differences``, and the gcd of all members equals the
    gcd of all cycle lengths of a strongly connected graph.
    """

    levels: tuple[int, ...]
    differences: frozenset[int]
    gcd: int


def scc_decompose(g: Digraph) -> SccDecomposition:
    """Maximal strongly connected components, numbered by smallest member."""
    n, d, targets = g.n, g.d, g.targets
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    raw: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work: list[list[int]] = [[root, 0]]
        while work:
            v, i = work[-1]
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            if i < d:
                work[-1][1] = i + 1
                w = targets[v][i]
                if index[w] == -1:
                    work.append([w, 0])
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                work.pop()
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    raw.append(comp)
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
    order = sorted(range(len(raw)), key=lambda i: min(raw[i]))
    components = tuple(frozenset(raw[i]) for i in order)
    component_of = [0] * n
    for cid, comp in enumerate(components):
        for v in comp:
            component_of[v] = cid
    has_exit = [False] * len(components)
    for v in range(n):
        cv = component_of[v]
        for w in targets[v]:
            if component_of[w] != cv:
                has_exit[cv] = True
    sink_ids = tuple(c for c in range(len(components)) if not has_exit[c])
    return SccDecomposition(tuple(component_of), components, sink_ids)


def check_sink_scc(g: Digraph) -> frozenset[int]:
    """Vertex set of the unique sink component; raises :class:`MultipleSinks`."""
    scc = scc_decompose(g)
    if len(scc.sink_ids) != 1:
        raise MultipleSinks(len(scc.sink_ids))
    return scc.components[scc.sink_ids[0]]


def gcd_of_cycles(g: Digraph) -> GcdReport:
    """Gcd of the lengths of all cycles of a strongly connected graph.

    Deterministic: depth-first from vertex 0, slots in ascending order.
    A single vertex whose edges are all loops yields gcd 1.
    """
    return _gcd_report(g, 0, None)


def _gcd_report(g: Digraph, start: int, slot_orders: Sequence[Sequence[int]] | None) -> GcdReport:
    # slot_orders lets tests exercise alternative traversal orders; the gcd
    # is invariant under them even though the depth labels are not.
    n, d, targets = g.n, g.d, g.targets
    depth = [0] * n
    depth[start] = 1
    diffs: set[int] = set()
    work: list[list[int]] = [[start, 0]]
    while work:
        v, i = work[-1]
        if i == d:
            work.pop()
            continue
        work[-1][1] = i + 1
        s = slot_orders[v][i] if slot_orders is not None else i
        t = targets[v][s]
        if depth[t] == 0:
            depth[t] = depth[v] + 1
            work.append([t, 0])
        else:
            delta = abs(depth[t] - 1 - depth[v])
            if delta:
                diffs.add(delta)
    # any walk in a uniform-outdegree graph revisits a vertex, so the
    # reachable part always contributes at least one nonzero difference
    assert diffs, "unreachable: no cycle difference found"
    value = 0
    for x in diffs:
        value = _int_gcd(value, x)
    return GcdReport(tuple(depth), frozenset(diffs), value)


def find_loop(g: Digraph) -> EdgeRef | None:
    """Smallest (source, slot) self-loop, or None."""
    for v in range(g.n):
        for s, t in enumerate(g.targets[v]):
            if t == v:
                return EdgeRef(v, s)
    return None


def find_two_incoming_bunches(g: Digraph) -> tuple[StablePair, int] | None:
    """Two vertices whose whole out-edge sets enter one common vertex.

    If some vertex p receives two complete out-bunches, their origins map
    to p under every letter of every coloring, so they form a stable pair
    no recoloring can break.  Returns ``(pair, p)`` choosing the smallest
    such p and then its two smallest origins, or None.
    """
    bunch_into: dict[int, list[int]] = defaultdict(list)
    for v in range(g.n):
        row = g.targets[v]
        if all(t == row[0] for t in row):
            bunch_into[row[0]].append(v)
    for p in sorted(bunch_into):
        origins = bunch_into[p]
        if len(origins) >= 2:
            return StablePair(origins[0], origins[1]), p
    return None
