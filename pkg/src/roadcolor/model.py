"""Graph, coloring, and automaton model with text and DOT serialization.

A :class:`Digraph` is a finite directed multigraph in which every vertex
owns exactly ``d`` ordered out-edge slots; parallel edges and self-loops
are allowed.  An edge is identified by ``(source, slot)``, never by
``(source, target)``, so parallel edges stay distinguishable.  A
:class:`Coloring` assigns the colors ``0..d-1`` bijectively to each
vertex's slots, which turns the graph into a complete deterministic
automaton over a ``d``-letter alphabet.

Text format (canonical form is bit-exact): optional comment lines
starting with ``#``, a header line ``"n d"``, then exactly ``n`` rows of
``d`` space-separated target vertices, newline-terminated, no trailing
spaces.  A colored graph uses the same format with each row reordered so
that slot index equals color; :func:`serialize_graph` emits that form
when given a coloring.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

Word = tuple[int, ...]


class ParseError(ValueError):
    """Malformed graph text; ``line`` is the 1-based offending line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EdgeRef(NamedTuple):
    source: int
    slot: int


@dataclass(frozen=True)
class Digraph:
    """Multigraph with ``n`` vertices and ``d`` ordered out-slots each."""

    n: int
    d: int
    targets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        rows = tuple(tuple(row) for row in self.targets)
        object.__setattr__(self, "targets", rows)
        if len(rows) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(rows)}")
        for v, row in enumerate(rows):
            if len(row) != self.d:
                raise ValueError(f"vertex {v} has {len(row)} out-slots, expected {self.d}")
            for t in row:
                if not 0 <= t < self.n:
                    raise ValueError(f"vertex {v}: target {t} out of range [0, {self.n})")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "Digraph":
        rows = tuple(tuple(r) for r in rows)
        return cls(len(rows), len(rows[0]) if rows else 0, rows)

    @cached_property
    def incoming(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex, the in-edges as (source, slot), sorted ascending."""
        acc: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for v in range(self.n):
            for s, t in enumerate(self.targets[v]):
                acc[t].append((v, s))
        return tuple(tuple(lst) for lst in acc)


@dataclass(frozen=True)
class Coloring:
    """Per-vertex bijection slot -> color; ``color_of_slot[v][s]`` is the
    color carried by edge ``(v, s)``."""

    color_of_slot: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.color_of_slot)
        object.__setattr__(self, "color_of_slot", rows)
        for v, row in enumerate(rows):
            if sorted(row) != list(range(len(row))):
                raise ValueError(f"vertex {v}: slot colors {row} are not a permutation")

    @classmethod
    def identity(cls, n: int, d: int) -> "Coloring":
        """The slot = color coloring."""
        row = tuple(range(d))
        return cls(tuple(row for _ in range(n)))

    @cached_property
    def slot_of_color(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for row in self.color_of_slot:
            inv = [0] * len(row)
            for s, c in enumerate(row):
                inv[c] = s
            out.append(tuple(inv))
        return tuple(out)


@dataclass(frozen=True)
class ColoredAutomaton:
    """A digraph plus a coloring, read as a deterministic complete automaton."""

    graph: Digraph
    coloring: Coloring

    def __post_init__(self):
        if len(self.coloring.color_of_slot) != self.graph.n:
            raise ValueError("coloring and graph disagree on vertex count")
        for v, row in enumerate(self.coloring.color_of_slot):
            if len(row) != self.graph.d:
                raise ValueError(f"vertex {v}: coloring has {len(row)} slots, graph has {self.graph.d}")

    @cached_property
    def transitions(self) -> tuple[tuple[int, ...], ...]:
        """``transitions[v][c]`` is the target of v's color-c edge."""
        g = self.graph
        soc = self.coloring.slot_of_color
        return tuple(
            tuple(g.targets[v][soc[v][c]] for c in range(g.d)) for v in range(g.n)
        )

    def delta(self, v: int, c: int) -> int:
        return self.transitions[v][c]


def identity_automaton(g: Digraph) -> ColoredAutomaton:
    return ColoredAutomaton(g, Coloring.identity(g.n, g.d))


def apply_word(a: ColoredAutomaton, states: Iterable[int], word: Iterable[int]) -> set[int]:
    """Image of a state set under a word; the empty word is the identity."""
    t = a.transitions
    current = set(states)
    for c in word:
        current = {t[v][c] for v in current}
    return current


def parse_graph(text: str | bytes) -> Digraph:
    """Parse the text format; raises :class:`ParseError` naming the line."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header: tuple[int, int] | None = None
    header_line = 0
    rows: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 2:
                raise ParseError(lineno, f"expected header 'n d', got {raw!r}")
            try:
                n, d = int(fields[0]), int(fields[1])
            except ValueError:
                raise ParseError(lineno, f"expected header 'n d', got {raw!r}") from None
            if n < 1 or d < 1:
                raise ParseError(lineno, f"need n >= 1 and d >= 1, got n={n} d={d}")
            header = (n, d)
            header_line = lineno
            continue
        n, d = header
        if len(rows) >= n:
            raise ParseError(lineno, f"unexpected extra row (header declared {n} rows)")
        if len(fields) != d:
            raise ParseError(lineno, f"row {len(rows) + 1} has {len(fields)} targets, expected {d}")
        try:
            row = tuple(int(f) for f in fields)
        except ValueError:
            raise ParseError(lineno, f"non-integer target in {raw!r}") from None
        for t in row:
            if not 0 <= t < n:
                raise ParseError(lineno, f"target {t} out of range [0, {n})")
        rows.append(row)
    if header is None:
        raise ParseError(1, "empty input, expected header 'n d'")
    n, d = header
    if len(rows) != n:
        raise ParseError(header_line, f"expected {n} rows, got {len(rows)}")
    return Digraph(n, d, tuple(rows))


def serialize_graph(g: Digraph, coloring: Coloring | None = None) -> str:
    """Canonical text form; with a coloring, rows are reordered so that
    slot index equals color (round-trips through :func:`parse_graph`)."""
    lines = [f"{g.n} {g.d}"]
    if coloring is None:
        rows: Iterable[tuple[int, ...]] = g.targets
    else:
        rows = ColoredAutomaton(g, coloring).transitions
    for row in rows:
        lines.append(" ".join(str(t) for t in row))
    return "\n".join(lines) + "\n"


def graph_to_dot(g: Digraph, coloring: Coloring | None = None) -> str:
    """DOT text with one edge per slot, labelled by color (slot order when
    uncolored), in deterministic (vertex, slot) order."""
    out = ["digraph {"]
    for v in range(g.n):
        for s in range(g.d):
            label = s if coloring is None else coloring.color_of_slot[v][s]
            out.append(f"  {v} -> {g.targets[v][s]} [label={label}];")
    out.append("}")
    return "\n".join(out) + "\n"


def induced_subgraph(g: Digraph, vertices: Iterable[int]) -> tuple[Digraph, tuple[int, ...]]:
    """Subgraph on a closed vertex set, renumbered densely.

    Returns ``(sub, order)`` with ``order[new_id] = old_id``.  Raises if
    any edge leaves the set (intended for sink components, which are
    closed under out-edges by definition).
    """
    order = tuple(sorted(set(vertices)))
    remap = {v: i for i, v in enumerate(order)}
    rows = []
    for v in order:
        row = []
        for t in g.targets[v]:
            if t not in remap:
                raise ValueError(f"edge {v} -> {t} leaves the induced vertex set")
            row.append(remap[t])
        rows.append(tuple(row))
    return Digraph(len(order), g.d, tuple(rows)), order
