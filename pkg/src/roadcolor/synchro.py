"""Independent certification of synchronizing colorings.

Everything here works on the automaton of unordered state pairs plus one
absorbing "merged" node: a pair of states can be collapsed iff the merged
node is reachable from it, and an automaton synchronizes iff no pair is a
deadlock (merged unreachable).  Reset words come from the classic greedy
pair-merging construction; exhaustive subset search and full coloring
enumeration are provided as oracles for tiny instances.
"""

from collections import deque
from dataclasses import dataclass
from itertools import permutations, product
from math import factorial

from roadcolor.model import ColoredAutomaton, Digraph, Word


class NotSynchronizing(Exception):
    pass


class TooLarge(Exception):
    pass


@dataclass(frozen=True)
class SyncReport:
    """Exactly one of ``word`` / ``witness_deadlock`` is present."""

    synchronizing: bool
    word: Word | None
    witness_deadlock: tuple[int, int] | None


class PairGraph:
    """Automaton on unordered pairs {p, q}, p < q, plus a merged node.

    Pairs are indexed lexicographically; transitions are computed from
    the underlying transition table on demand.
    """

    def __init__(self, a: ColoredAutomaton):
        self.n = a.graph.n
        self.d = a.graph.d
        self.transitions = a.transitions
        self.pair_count = self.n * (self.n - 1) // 2
        self.merged = self.pair_count
        n = self.n
        self._off = [p * (n - 1) - p * (p - 1) // 2 - p - 1 for p in range(n)]

    @property
    def size(self) -> int:
        return self.pair_count + 1

    def index(self, p: int, q: int) -> int:
        if p > q:
            p, q = q, p
        if p == q:
            return self.merged
        return self._off[p] + q

    def pair_at(self, k: int) -> tuple[int, int]:
        p = 0
        while self._off[p + 1] + p + 2 <= k:
            p += 1
        return p, k - self._off[p]

    def step(self, p: int, q: int, c: int) -> int:
        t = self.transitions
        return self.index(t[p][c], t[q][c])


def _in_lists(transitions, n: int, d: int) -> list[list[list[int]]]:
    ins: list[list[list[int]]] = [[[] for _ in range(n)] for _ in range(d)]
    for u in range(n):
        tu = transitions[u]
        for c in range(d):
            ins[c][tu[c]].append(u)
    return ins


def _merge_distances(transitions, n: int, d: int) -> tuple[list[int], list[int]]:
    """Shortest merging-word length per pair index (-1 if deadlocked).

    Backward breadth-first search from the merged node, walking pair
    predecessors through the per-letter in-neighbour lists of states.
    Returns ``(dist, off)`` with ``dist[off[p] + q]`` for p < q.
    """
    off = [p * (n - 1) - p * (p - 1) // 2 - p - 1 for p in range(n)]
    pair_count = n * (n - 1) // 2
    dist = [-1] * (pair_count + 1)
    dist[pair_count] = 0
    ins = _in_lists(transitions, n, d)
    queue: deque[tuple[int, int]] = deque()
    for c in range(d):
        insc = ins[c]
        for v in range(n):
            group = insc[v]
            m = len(group)
            for i in range(m):
                p = group[i]
                base = off[p]
                for j in range(i + 1, m):
                    k = base + group[j]
                    if dist[k] < 0:
                        dist[k] = 1
                        queue.append((p, group[j]))
    while queue:
        x, y = queue.popleft()
        nd = dist[off[x] + y] + 1
        for c in range(d):
            insc = ins[c]
            for p in insc[x]:
                for q in insc[y]:
                    if p == q:
                        continue
                    k = off[p] + q if p < q else off[q] + p
                    if dist[k] < 0:
                        dist[k] = nd
                        queue.append((p, q) if p < q else (q, p))
    return dist, off


def deadlock_pairs(a: ColoredAutomaton) -> set[tuple[int, int]]:
    """All pairs from which no word can merge the two states."""
    n, d = a.graph.n, a.graph.d
    dist, off = _merge_distances(a.transitions, n, d)
    out = set()
    for p in range(n):
        base = off[p]
        for q in range(p + 1, n):
            if dist[base + q] < 0:
                out.add((p, q))
    return out


def _greedy_word(transitions, n: int, d: int, dist, off) -> Word:
    word: list[int] = []
    current = set(range(n))
    while len(current) > 1:
        two = sorted(current)[:2]
        x, y = two[0], two[1]
        k = off[x] + y
        if dist[k] < 0:
            raise NotSynchronizing(f"pair ({x}, {y}) is a deadlock")
        while x != y:
            want = dist[off[x] + y if x < y else off[y] + x] - 1
            for c in range(d):
                nx, ny = transitions[x][c], transitions[y][c]
                nd = 0 if nx == ny else dist[off[nx] + ny if nx < ny else off[ny] + nx]
                if nd == want:
                    word.append(c)
                    current = {transitions[v][c] for v in current}
                    x, y = nx, ny
                    break
            else:  # pragma: no cover - dist is a exact BFS labelling
                raise AssertionError("no letter decreases the merge distance")
    return tuple(word)


def greedy_reset_word(a: ColoredAutomaton) -> Word:
    """A synchronizing word built by repeated shortest pair merges.

    Each round merges the pair holding the two smallest states of the
    current set via a shortest merging word, so the result has length
    at most n**3.  Raises :class:`NotSynchronizing` on a deadlock.
    """
    n, d = a.graph.n, a.graph.d
    if n == 1:
        return ()
    dist, off = _merge_distances(a.transitions, n, d)
    return _greedy_word(a.transitions, n, d, dist, off)


def is_synchronizing(a: ColoredAutomaton) -> SyncReport:
    """Decide synchronizability; produce a word or a witness deadlock."""
    n, d = a.graph.n, a.graph.d
    if n == 1:
        return SyncReport(True, (), None)
    dist, off = _merge_distances(a.transitions, n, d)
    for p in range(n):
        base = off[p]
        for q in range(p + 1, n):
            if dist[base + q] < 0:
                return SyncReport(False, None, (p, q))
    return SyncReport(True, _greedy_word(a.transitions, n, d, dist, off), None)


def is_stable_pair(a: ColoredAutomaton, pair: tuple[int, int]) -> bool:
    """True iff no deadlock pair is reachable from ``pair``.

    Exact decision by forward reachability in the pair automaton; this is
    the oracle the recoloring engine is checked against.
    """
    p, q = pair
    if p == q:
        raise ValueError("need two distinct states")
    n, d = a.graph.n, a.graph.d
    t = a.transitions
    dist, off = _merge_distances(t, n, d)
    start = off[p] + q if p < q else off[q] + p
    if dist[start] < 0:
        return False
    seen = {start}
    stack = [(p, q)]
    while stack:
        x, y = stack.pop()
        for c in range(d):
            nx, ny = t[x][c], t[y][c]
            if nx == ny:
                continue
            k = off[nx] + ny if nx < ny else off[ny] + nx
            if dist[k] < 0:
                return False
            if k not in seen:
                seen.add(k)
                stack.append((nx, ny))
    return True


def shortest_reset_word(a: ColoredAutomaton) -> Word:
    """Minimum-length synchronizing word by subset breadth-first search.

    Exponential; capped at n <= 12 and meant as a test oracle only.
    """
    n, d = a.graph.n, a.graph.d
    if n > 12:
        raise TooLarge(f"subset search capped at 12 states, got {n}")
    if n == 1:
        return ()
    t = a.transitions
    full = (1 << n) - 1
    prev: dict[int, tuple[int, int] | None] = {full: None}
    frontier = [full]
    while frontier:
        nxt = []
        for mask in frontier:
            for c in range(d):
                image = 0
                m = mask
                while m:
                    v = (m & -m).bit_length() - 1
                    image |= 1 << t[v][c]
                    m &= m - 1
                if image not in prev:
                    prev[image] = (mask, c)
                    if image & (image - 1) == 0:
                        word = []
                        at = image
                        while prev[at] is not None:
                            at, c0 = prev[at]
                            word.append(c0)
                        return tuple(reversed(word))
                    nxt.append(image)
        frontier = nxt
    raise NotSynchronizing("no subset path reaches a singleton")


def _table_synchronizing(transitions, n: int, d: int) -> bool:
    if n == 1:
        return True
    dist, _ = _merge_distances(transitions, n, d)
    return all(x >= 0 for x in dist)


def brute_force_colorable(g: Digraph) -> bool:
    """Exhaustively test all per-vertex slot/color bijections.

    Colorings that induce the same transition table are enumerated once.
    Capped at (d!)**n <= 10**6 nominal colorings.
    """
    n, d = g.n, g.d
    if factorial(d) ** n > 10**6:
        raise TooLarge(f"(d!)^n = {factorial(d) ** n} colorings")
    options = [sorted(set(permutations(g.targets[v]))) for v in range(n)]
    for rows in product(*options):
        if _table_synchronizing(rows, n, d):
            return True
    return False
