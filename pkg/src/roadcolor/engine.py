"""Recoloring engine: from a feasible graph to a certified coloring.

The driver reduces the sink component step by step.  Each step finds a
stable pair of states (via a self-loop shortcut, a double in-bunch, two
cycles sharing one vertex, or rounds of spanning-edge flips), collapses
the congruence the pair generates, and recurses on the smaller quotient
graph.  Quotient colorings lift back level by level, and the final
coloring of the whole graph is certified by the pair-automaton verifier.
"""

from collections import deque
from dataclasses import dataclass, field

from roadcolor.model import (
    ColoredAutomaton,
    Coloring,
    Digraph,
    EdgeRef,
    Word,
    induced_subgraph,
)
from roadcolor.precheck import (
    MultipleSinks,
    check_sink_scc,
    find_loop,
    find_two_incoming_bunches,
    gcd_of_cycles,
    scc_decompose,
)
from roadcolor.spanning import (
    SpanningMap,
    StablePair,
    find_parameters,
    flip,
    maximal_tree_to_stable_pair,
)
from roadcolor import synchro


class NotALoop(Exception):
    pass


class NotStronglyConnected(Exception):
    pass


class ExhaustedFlips(Exception):
    """No flip candidate made progress; unreachable for valid inputs."""


class VerificationError(Exception):
    """A paranoid-mode internal check failed; indicates a defect."""


class UnstablePair(VerificationError):
    """The stability oracle refuted a pair the engine believed stable."""


class Infeasible(Exception):
    """No synchronizing coloring exists.

    ``reason`` is ``"multiple-sinks"`` (detail: sink count) or ``"gcd"``
    (detail: the offending cycle gcd).
    """

    def __init__(self, reason: str, detail: int):
        super().__init__(f"{reason}={detail}")
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True)
class QuotientStep:
    """One congruence collapse: enough data to lift colorings back.

    ``partition[v]`` is the class of pre-quotient vertex v (classes are
    numbered by smallest member), ``pre_coloring`` is the coloring in
    force when the quotient was taken, and slot c of the quotient graph
    carries what was color c, so a recoloring of the quotient is a color
    permutation per class.
    """

    partition: tuple[int, ...]
    pre_coloring: Coloring
    quotient_graph: Digraph
    class_representative: tuple[int, ...]


@dataclass(frozen=True)
class ReductionTrace:
    steps: tuple[QuotientStep, ...]
    terminal: ColoredAutomaton


@dataclass(frozen=True)
class Grows:
    map: SpanningMap


@dataclass(frozen=True)
class PairFound:
    map: SpanningMap
    pair: StablePair


@dataclass
class LevelEvent:
    size: int
    method: str  # loop | bunches | two_cycles | flips | trivial
    grows: int = 0


@dataclass
class PipelineStats:
    whole_graph_size: int = 0
    sink_size: int = 0
    levels: list[LevelEvent] = field(default_factory=list)
    pairs_checked: int = 0
    quotient_checks: int = 0
    lift_checks: int = 0


@dataclass
class SyncColoring:
    coloring: Coloring
    word: Word
    stats: PipelineStats


def loop_coloring(g: Digraph, loop: EdgeRef) -> Coloring:
    """Coloring that funnels every vertex into a self-loop.

    Color 0 goes to the loop and to one in-tree edge per other vertex,
    picked by reverse breadth-first search from the loop vertex, so the
    word 0**(n-1) maps everything onto it.  Remaining slots take the
    remaining colors in ascending order.
    """
    r = loop.source
    if g.targets[r][loop.slot] != r:
        raise NotALoop(f"edge ({loop.source}, {loop.slot}) is not a self-loop")
    tree_slot = [-1] * g.n
    tree_slot[r] = loop.slot
    queue = deque([r])
    seen = 1
    while queue:
        w = queue.popleft()
        for a, s in g.incoming[w]:
            if tree_slot[a] == -1:
                tree_slot[a] = s
                seen += 1
                queue.append(a)
    if seen < g.n:
        raise NotStronglyConnected(f"only {seen} of {g.n} vertices reach vertex {r}")
    rows = []
    for v in range(g.n):
        row = [-1] * g.d
        row[tree_slot[v]] = 0
        nxt = 1
        for s in range(g.d):
            if row[s] == -1:
                row[s] = nxt
                nxt += 1
        rows.append(tuple(row))
    return Coloring(tuple(rows))


def stable_pair_congruence(a: ColoredAutomaton, pair: StablePair, verify: bool = False) -> QuotientStep:
    """Collapse the smallest congruence containing one stable pair.

    Union-find with a work queue: whenever two classes merge, the images
    of the merged pair under every letter are enqueued.  With ``verify``
    the pair is first checked against the exact stability oracle.
    """
    if pair[0] == pair[1]:
        raise ValueError("need two distinct states")
    if verify and not synchro.is_stable_pair(a, tuple(pair)):
        raise UnstablePair(f"pair {tuple(pair)} is not stable under the current coloring")
    n, d = a.graph.n, a.graph.d
    t = a.transitions
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    queue: deque[tuple[int, int]] = deque([(pair[0], pair[1])])
    while queue:
        x, y = queue.popleft()
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        parent[ry] = rx
        tx, ty = t[x], t[y]
        for c in range(d):
            if tx[c] != ty[c]:
                queue.append((tx[c], ty[c]))

    members: dict[int, list[int]] = {}
    for v in range(n):
        members.setdefault(find(v), []).append(v)
    classes = sorted(members.values(), key=lambda m: m[0])
    class_of = [0] * n
    for cid, mem in enumerate(classes):
        for v in mem:
            class_of[v] = cid
    reps = tuple(mem[0] for mem in classes)
    rows = tuple(
        tuple(class_of[t[rep][c]] for c in range(d)) for rep in reps
    )
    quotient = Digraph(len(classes), d, rows)
    return QuotientStep(tuple(class_of), a.coloring, quotient, reps)


def lift_coloring(step: QuotientStep, quotient_coloring: Coloring) -> Coloring:
    """Pull a quotient recoloring back to the pre-quotient graph.

    Slot c of the quotient carries what was color c, so the recoloring
    defines a color permutation per class; apply it to every member's
    slots.  Per-vertex bijectivity survives because permutations compose.
    """
    part = step.partition
    pre = step.pre_coloring.color_of_slot
    q = quotient_coloring.color_of_slot
    rows = tuple(
        tuple(q[part[v]][c] for c in pre[v]) for v in range(len(pre))
    )
    return Coloring(rows)


def two_cycles_with_intersection(g: Digraph) -> tuple[Coloring, StablePair] | None:
    """Stable pair from two cycles meeting in exactly one vertex.

    Deterministic search: a first cycle C comes from the first back edge
    of a depth-first search from vertex 0 (slots ascending).  Every C
    vertex with two distinct out-targets seeds a breadth-first search
    over vertices outside C, each tagged with its seed; an edge returning
    to its own seed closes a second cycle that meets C only there.

    The spanning map keeps all edges of both cycles except one of the two
    cycle edges leaving the shared vertex q, plus a reverse-BFS in-forest
    attaching every remaining vertex; the cut edge belongs to the cycle
    holding the maximal-tree root farthest from q along its own cycle
    (ties and the all-trees-at-q case cut the first cycle).  The result
    has a unique maximal tree rooted at q, which yields the stable pair.
    Color 0 is the spanning map, color 1 the cut edge at q.

    Returns None when no seed closes a second cycle.
    """
    n, d, targets = g.n, g.d, g.targets
    if n < 2:
        return None

    # first cycle: DFS from 0, break at the first edge into the active path
    state = [0] * n  # 0 new, 1 active, 2 finished
    entry_slot = [-1] * n
    path = [0]
    state[0] = 1
    frames: list[list[int]] = [[0, 0]]
    first_cycle: list[int] | None = None
    closing_slot = -1
    while frames:
        v, i = frames[-1]
        if i == d:
            frames.pop()
            path.pop()
            state[v] = 2
            continue
        frames[-1][1] = i + 1
        t = targets[v][i]
        if state[t] == 0:
            state[t] = 1
            entry_slot[t] = i
            path.append(t)
            frames.append([t, 0])
        elif state[t] == 1:
            first_cycle = path[path.index(t):]
            closing_slot = i
            break
    assert first_cycle is not None, "a uniform-outdegree walk must close a cycle"
    cu = first_cycle
    cu_slot = {cu[i]: entry_slot[cu[i + 1]] for i in range(len(cu) - 1)}
    cu_slot[cu[-1]] = closing_slot
    in_cu = [False] * n
    for v in cu:
        in_cu[v] = True

    candidates = [q for q in sorted(cu) if len(set(targets[q])) >= 2]
    if not candidates:
        return None

    # second cycle: tagged BFS outside C, closing only to its own seed
    origin = [-1] * n
    parent_v = [-1] * n
    parent_s = [-1] * n
    for q in candidates:
        origin[q] = q
    queue = deque(candidates)
    hit: tuple[int, int, int] | None = None
    while queue and hit is None:
        v = queue.popleft()
        ov = origin[v]
        for s in range(d):
            t = targets[v][s]
            if t == ov:
                hit = (ov, v, s)
                break
            if not in_cu[t] and origin[t] == -1:
                origin[t] = ov
                parent_v[t] = v
                parent_s[t] = s
                queue.append(t)
    if hit is None:
        return None
    q, end_v, end_s = hit
    back = [(end_v, end_s)]
    v = end_v
    while v != q:
        back.append((parent_v[v], parent_s[v]))
        v = parent_v[v]
    cv_edges = back[::-1]
    cv = [q] + [targets[a][s] for a, s in cv_edges[:-1]]
    cv_slot = dict(cv_edges)
    u_slot = cu_slot[q]
    v_slot = cv_slot[q]

    # attach every remaining vertex to the two cycles (reverse BFS,
    # cycle vertices ascending, smallest (source, slot) edge first)
    on_cycles = set(cu) | set(cv)
    lvl = [-1] * n
    forest_root = [-1] * n
    for x in on_cycles:
        lvl[x] = 0
        forest_root[x] = x
    attach = [-1] * n
    bfs = deque(sorted(on_cycles))
    while bfs:
        w = bfs.popleft()
        for a, s in g.incoming[w]:
            if lvl[a] == -1:
                lvl[a] = lvl[w] + 1
                attach[a] = s
                forest_root[a] = w if lvl[w] == 0 else forest_root[w]
                bfs.append(a)
    if any(x < 0 for x in lvl):
        raise ValueError("graph is not strongly connected")

    max_lv = max(lvl)
    if max_lv == 0:
        remove_u = True
    else:
        pos_u = {x: i for i, x in enumerate(cu)}
        pos_v = {x: i for i, x in enumerate(cv)}
        roots = sorted({forest_root[x] for x in range(n) if lvl[x] == max_lv})
        best_dist, best_u = -1, True
        for r in roots:
            if r == q:
                dist, on_u = 0, True
            elif r in pos_u:
                dist, on_u = (pos_u[q] - pos_u[r]) % len(cu), True
            else:
                dist, on_u = (len(cv) - pos_v[r]) % len(cv), False
            if dist > best_dist or (dist == best_dist and on_u and not best_u):
                best_dist, best_u = dist, on_u
        remove_u = best_u

    chosen = attach[:]
    for x in cu:
        chosen[x] = cu_slot[x]
    for x in cv:
        chosen[x] = cv_slot[x]
    chosen[q] = v_slot if remove_u else u_slot
    removed_slot = u_slot if remove_u else v_slot

    smap = SpanningMap.from_slots(g, chosen)
    params = find_parameters(smap)
    if len(params.maximal_trees) != 1:
        raise VerificationError(
            "cutting one cycle edge at the shared vertex must leave one maximal tree"
        )
    pair = maximal_tree_to_stable_pair(smap, params)

    rows = []
    for x in range(n):
        row = [-1] * d
        row[chosen[x]] = 0
        nxt = 1
        if x == q:
            row[removed_slot] = 1
            nxt = 2
        for s in range(d):
            if row[s] == -1:
                row[s] = nxt
                nxt += 1
        rows.append(tuple(row))
    return Coloring(tuple(rows)), pair


def flips_round(g: Digraph, s: SpanningMap) -> Grows | PairFound:
    """One round of spanning-edge flips.

    Requires a loop-free graph in which no vertex has two incoming
    bunches.  If the map already has a unique maximal tree, returns its
    pair without flipping.  If the map is a union of cycles, any flip to
    a different target leaves exactly one maximal tree.  Otherwise fix
    the maximal tree with the smallest root r, its deepest vertex p, the
    tree predecessor b of r on p's path and the cycle predecessor c of r,
    and try, committing the first flip set that either strictly grows the
    number of cycle vertices (Grows) or leaves exactly one maximal tree
    (PairFound):

    1. redirect any in-edge of p onto p;
    2. if b's out-edges are not a bunch: move b off r, alone or combined
       with one flip from 1;
    3. otherwise move c off r, alone or combined with one flip from 1.
    """
    params = find_parameters(s)
    if len(params.maximal_trees) == 1:
        return PairFound(s, maximal_tree_to_stable_pair(s, params))
    n, d, targets = g.n, g.d, g.targets

    if params.max_level == 0:
        for a in range(n):
            row = targets[a]
            succ_a = s.successor[a]
            for slot in range(d):
                if row[slot] != succ_a:
                    s2 = flip(s, EdgeRef(a, slot), g)
                    p2 = find_parameters(s2)
                    if len(p2.maximal_trees) != 1:
                        raise ExhaustedFlips(
                            "flip out of a cycle union left multiple maximal trees"
                        )
                    return PairFound(s2, maximal_tree_to_stable_pair(s2, p2))
        raise ExhaustedFlips("every out-edge set is a bunch; no flip available")

    base_cycles = params.cycle_edge_count
    root, deepest = params.maximal_trees[0]
    b = deepest
    for _ in range(params.max_level - 1):
        b = s.successor[b]
    c = params.cycle_predecessor[root]

    def attempt(edges: list[EdgeRef]) -> Grows | PairFound | None:
        s2 = s
        for e in edges:
            s2 = flip(s2, e, g)
        p2 = find_parameters(s2)
        if p2.cycle_edge_count > base_cycles:
            return Grows(s2)
        if len(p2.maximal_trees) == 1:
            return PairFound(s2, maximal_tree_to_stable_pair(s2, p2))
        return None

    pulls = [EdgeRef(a, slot) for a, slot in g.incoming[deepest] if a != deepest]
    for e in pulls:
        res = attempt([e])
        if res is not None:
            return res
    if any(t != root for t in targets[b]):
        side = [EdgeRef(b, slot) for slot in range(d) if targets[b][slot] != root]
    else:
        side = [EdgeRef(c, slot) for slot in range(d) if targets[c][slot] != root]
    for e2 in side:
        res = attempt([e2])
        if res is not None:
            return res
        for e1 in pulls:
            if e1.source == e2.source:
                continue
            res = attempt([e2, e1])
            if res is not None:
                return res
    raise ExhaustedFlips("no flip grew the cycles or isolated a maximal tree")


def _check_quotient(auto: ColoredAutomaton, step: QuotientStep) -> None:
    qg = step.quotient_graph
    if qg.n >= auto.graph.n:
        raise VerificationError("quotient did not shrink")
    t = auto.transitions
    part = step.partition
    for v in range(auto.graph.n):
        for c in range(auto.graph.d):
            if part[t[v][c]] != qg.targets[part[v]][c]:
                raise VerificationError("partition is not a congruence")
    if len(scc_decompose(qg).components) != 1:
        raise VerificationError("quotient is not strongly connected")
    if gcd_of_cycles(qg).gcd != 1:
        raise VerificationError("quotient cycle gcd is not 1")


def reduce_to_terminal(g: Digraph, paranoid: bool = False, stats: PipelineStats | None = None) -> ReductionTrace:
    """Quotient a strongly connected feasible graph down to a terminal.

    The terminal automaton is either a single vertex under the identity
    coloring or a loop coloring found along the way.  ``paranoid`` runs
    the stability oracle on every pair and the full invariant bundle
    (congruence, strong connectivity, gcd 1, shrinkage) on every step.
    """
    if stats is None:
        stats = PipelineStats()
    graph = g
    coloring = Coloring.identity(graph.n, graph.d)
    steps: list[QuotientStep] = []
    while graph.n > 1:
        loop = find_loop(graph)
        if loop is not None:
            coloring = loop_coloring(graph, loop)
            stats.levels.append(LevelEvent(graph.n, "loop"))
            break
        grows = 0
        bunch = find_two_incoming_bunches(graph)
        if bunch is not None:
            pair, _ = bunch
            method = "bunches"
        else:
            shortcut = two_cycles_with_intersection(graph)
            if shortcut is not None:
                coloring, pair = shortcut
                method = "two_cycles"
            else:
                method = "flips"
                rows = [list(r) for r in coloring.color_of_slot]
                s = SpanningMap.from_color(ColoredAutomaton(graph, coloring), 0)
                while True:
                    res = flips_round(graph, s)
                    for v in range(graph.n):
                        if res.map.chosen_slot[v] != s.chosen_slot[v]:
                            x, y = s.chosen_slot[v], res.map.chosen_slot[v]
                            rows[v][x], rows[v][y] = rows[v][y], rows[v][x]
                    s = res.map
                    if isinstance(res, Grows):
                        grows += 1
                        if grows > graph.n:
                            raise ExhaustedFlips("cycle growth outran the vertex count")
                        continue
                    pair = res.pair
                    break
                coloring = Coloring(tuple(tuple(r) for r in rows))
        auto = ColoredAutomaton(graph, coloring)
        if paranoid:
            if not synchro.is_stable_pair(auto, tuple(pair)):
                raise UnstablePair(f"{method} produced unstable pair {tuple(pair)}")
            stats.pairs_checked += 1
        step = stable_pair_congruence(auto, pair)
        if paranoid:
            _check_quotient(auto, step)
            stats.quotient_checks += 1
        stats.levels.append(LevelEvent(graph.n, method, grows))
        steps.append(step)
        graph = step.quotient_graph
        coloring = Coloring.identity(graph.n, graph.d)
    else:
        stats.levels.append(LevelEvent(1, "trivial"))
    return ReductionTrace(tuple(steps), ColoredAutomaton(graph, coloring))


def synchronizing_coloring(g: Digraph, paranoid: bool = False) -> SyncColoring:
    """Synchronizing coloring plus a certified reset word.

    Pipeline: unique sink component check; loop shortcut inside the sink;
    cycle gcd check; quotient reduction to a terminal automaton; coloring
    lift back through every quotient; identity coloring outside the sink;
    final certification by the independent verifier.  Raises
    :class:`Infeasible` when no synchronizing coloring exists.
    """
    stats = PipelineStats(whole_graph_size=g.n)
    try:
        sink = check_sink_scc(g)
    except MultipleSinks as e:
        raise Infeasible("multiple-sinks", e.count) from e
    sink_graph, order = induced_subgraph(g, sink)
    stats.sink_size = sink_graph.n
    loop = find_loop(sink_graph)
    if loop is not None:
        sink_coloring = loop_coloring(sink_graph, loop)
        stats.levels.append(LevelEvent(sink_graph.n, "loop"))
    else:
        report = gcd_of_cycles(sink_graph)
        if report.gcd != 1:
            raise Infeasible("gcd", report.gcd)
        trace = reduce_to_terminal(sink_graph, paranoid, stats)
        level_graphs = [sink_graph] + [st.quotient_graph for st in trace.steps]
        coloring = trace.terminal.coloring
        for i in reversed(range(len(trace.steps))):
            step = trace.steps[i]
            lifted = lift_coloring(step, coloring)
            if paranoid:
                q_ok = synchro.is_synchronizing(
                    ColoredAutomaton(level_graphs[i + 1], coloring)
                ).synchronizing
                l_ok = synchro.is_synchronizing(
                    ColoredAutomaton(level_graphs[i], lifted)
                ).synchronizing
                if q_ok and not l_ok:
                    raise VerificationError(f"lift at level {i} broke synchronization")
                stats.lift_checks += 1
            coloring = lifted
        sink_coloring = coloring

    rows = [tuple(range(g.d))] * g.n
    for new_id, old_id in enumerate(order):
        rows[old_id] = sink_coloring.color_of_slot[new_id]
    full = Coloring(tuple(rows))
    report = synchro.is_synchronizing(ColoredAutomaton(g, full))
    if not report.synchronizing:
        raise VerificationError(
            f"produced coloring failed certification, deadlock {report.witness_deadlock}"
        )
    return SyncColoring(full, report.word, stats)
