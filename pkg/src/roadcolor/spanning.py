"""One-edge-per-vertex spanning subgraphs and their tree structure.

Choosing one out-slot per vertex yields a functional graph: disjoint
cycles with in-trees hanging off them.  The level of a vertex is its
distance through its tree to the root on a cycle; cycle vertices have
level 0.  A tree whose height reaches the global maximum level is a
maximal tree, and when exactly one maximal tree exists its root exposes
a stable pair: the tree-side and cycle-side predecessors of the root.
"""

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from roadcolor.model import ColoredAutomaton, Digraph, EdgeRef


class StablePair(NamedTuple):
    first: int
    second: int


class NotUniqueMaximalTree(Exception):
    pass


@dataclass(frozen=True)
class SpanningMap:
    """Chosen out-slot per vertex plus the successor function it induces."""

    chosen_slot: tuple[int, ...]
    successor: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "chosen_slot", tuple(self.chosen_slot))
        object.__setattr__(self, "successor", tuple(self.successor))
        if len(self.chosen_slot) != len(self.successor):
            raise ValueError("chosen_slot and successor lengths differ")

    @classmethod
    def from_color(cls, a: ColoredAutomaton, color: int) -> "SpanningMap":
        """The subgraph of all edges carrying one color."""
        soc = a.coloring.slot_of_color
        slots = tuple(soc[v][color] for v in range(a.graph.n))
        succ = tuple(a.graph.targets[v][slots[v]] for v in range(a.graph.n))
        return cls(slots, succ)

    @classmethod
    def from_slots(cls, g: Digraph, slots: Iterable[int]) -> "SpanningMap":
        slots = tuple(slots)
        succ = tuple(g.targets[v][slots[v]] for v in range(g.n))
        return cls(slots, succ)

    @classmethod
    def from_successors(cls, successors: Iterable[int]) -> "SpanningMap":
        """Bare functional map for structural work; slot data is filled
        with zeros and only meaningful relative to a graph."""
        succ = tuple(successors)
        return cls((0,) * len(succ), succ)


def flip(s: SpanningMap, e: EdgeRef, g: Digraph) -> SpanningMap:
    """Replace the chosen out-edge of ``e.source`` by ``e``; pure."""
    if s.chosen_slot[e.source] == e.slot:
        raise ValueError(f"vertex {e.source} already uses slot {e.slot}")
    slots = list(s.chosen_slot)
    succ = list(s.successor)
    slots[e.source] = e.slot
    succ[e.source] = g.targets[e.source][e.slot]
    return SpanningMap(tuple(slots), tuple(succ))


@dataclass(frozen=True)
class SpanningParams:
    """Structure of a functional graph.

    ``maximal_trees`` lists ``(root, deepest)`` for every tree whose
    height equals ``max_level`` (empty when the map is a union of
    cycles), ordered by root; ``deepest`` is the smallest-index vertex of
    maximal level in that tree.  ``cycle_predecessor`` is defined for
    cycle vertices only.
    """

    level: tuple[int, ...]
    cycle_id: tuple[int | None, ...]
    tree_root: tuple[int, ...]
    cycle_predecessor: tuple[int | None, ...]
    cycle_edge_count: int
    max_level: int
    maximal_trees: tuple[tuple[int, int], ...]


def find_parameters(s: SpanningMap) -> SpanningParams:
    """Cycles, levels, roots, and maximal trees of a functional map, O(n).

    Iterative successor walks only; no recursion, safe for n ~ 10**6.
    """
    succ = s.successor
    n = len(succ)
    state = [0] * n  # 0 unvisited, 1 on current walk, 2 settled
    on_cycle = [False] * n
    for v0 in range(n):
        if state[v0]:
            continue
        path = []
        v = v0
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = succ[v]
        if state[v] == 1:  # the walk closed a new cycle at v
            for u in path[path.index(v):]:
                on_cycle[u] = True
        for u in path:
            state[u] = 2

    cycle_id: list[int | None] = [None] * n
    cycle_count = 0
    for v in range(n):  # ascending scan numbers cycles by smallest member
        if on_cycle[v] and cycle_id[v] is None:
            u = v
            while cycle_id[u] is None:
                cycle_id[u] = cycle_count
                u = succ[u]
            cycle_count += 1

    cycle_pred: list[int | None] = [None] * n
    for v in range(n):
        if on_cycle[v]:
            cycle_pred[succ[v]] = v

    level = [0] * n
    tree_root = [-1] * n
    for v in range(n):
        if on_cycle[v]:
            tree_root[v] = v
    for v0 in range(n):
        path = []
        v = v0
        while tree_root[v] == -1:
            path.append(v)
            v = succ[v]
        r = v if on_cycle[v] else tree_root[v]
        base = level[v]
        for u in reversed(path):
            base += 1
            level[u] = base
            tree_root[u] = r

    max_level = max(level)
    maximal: dict[int, int] = {}
    if max_level > 0:
        for v in range(n):  # ascending, so the first hit per root is smallest
            if level[v] == max_level and tree_root[v] not in maximal:
                maximal[tree_root[v]] = v
    return SpanningParams(
        level=tuple(level),
        cycle_id=tuple(cycle_id),
        tree_root=tuple(tree_root),
        cycle_predecessor=tuple(cycle_pred),
        cycle_edge_count=sum(on_cycle),
        max_level=max_level,
        maximal_trees=tuple(sorted(maximal.items())),
    )


def maximal_tree_to_stable_pair(s: SpanningMap, params: SpanningParams) -> StablePair:
    """Stable pair read off the unique maximal tree.

    With root r, the pair is (b, c) where b is reached from the tree's
    deepest vertex after max_level - 1 successor steps (the tree edge
    into r) and c is r's predecessor on its cycle.  Both map to r under
    the spanning edges, from levels 1 and 0 respectively, so b != c.
    """
    if len(params.maximal_trees) != 1 or params.max_level < 1:
        raise NotUniqueMaximalTree(
            f"{len(params.maximal_trees)} maximal trees at level {params.max_level}"
        )
    root, deepest = params.maximal_trees[0]
    b = deepest
    for _ in range(params.max_level - 1):
        b = s.successor[b]
    c = params.cycle_predecessor[root]
    assert c is not None
    return StablePair(b, c)
