"""Command-line surface: check, color, verify, gen, dot.

Graphs are read from a file or - for standard input, in the text format
of :mod:`roadcolor.model`.  Exit codes: 0 success, 1 infeasible or not
synchronizing, 2 parse error.
"""

import argparse
import sys
from pathlib import Path

from roadcolor.engine import Infeasible, synchronizing_coloring
from roadcolor.generate import generate_agw
from roadcolor.model import (
    ColoredAutomaton,
    Coloring,
    ParseError,
    apply_word,
    graph_to_dot,
    parse_graph,
    serialize_graph,
)
from roadcolor.precheck import MultipleSinks, check_sink_scc, gcd_of_cycles
from roadcolor.model import induced_subgraph
from roadcolor.synchro import is_synchronizing


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _format_word(word: tuple[int, ...], d: int) -> str:
    if d <= 10:
        return "".join(str(c) for c in word)
    return " ".join(str(c) for c in word)


def cmd_check(args) -> int:
    g = parse_graph(_read_input(args.file))
    try:
        sink = check_sink_scc(g)
    except MultipleSinks as e:
        print(f"multiple-sinks count={e.count}")
        return 1
    sink_graph, _ = induced_subgraph(g, sink)
    value = gcd_of_cycles(sink_graph).gcd
    if sink_graph.n == g.n:
        print(f"strongly-connected gcd={value}")
    else:
        print(f"sink-scc size={sink_graph.n} gcd={value}")
    return 0 if value == 1 else 1


def cmd_color(args) -> int:
    g = parse_graph(_read_input(args.file))
    try:
        result = synchronizing_coloring(g, paranoid=args.paranoid)
    except Infeasible as e:
        print(f"infeasible: {e.reason}={e.detail}")
        return 1
    sys.stdout.write(serialize_graph(g, result.coloring))
    if args.emit_word:
        image = apply_word(ColoredAutomaton(g, result.coloring), range(g.n), result.word)
        assert len(image) == 1, "reset word failed re-simulation"
        print(f"word: {_format_word(result.word, g.d)}")
    return 0


def cmd_verify(args) -> int:
    g = parse_graph(_read_input(args.file))
    auto = ColoredAutomaton(g, Coloring.identity(g.n, g.d))
    report = is_synchronizing(auto)
    if report.synchronizing:
        print(f"word: {_format_word(report.word, g.d)}")
        return 0
    p, q = report.witness_deadlock
    print(f"deadlock: {p} {q}")
    return 1


def cmd_gen(args) -> int:
    g = generate_agw(args.n, args.d, args.seed)
    sys.stdout.write(serialize_graph(g))
    return 0


def cmd_dot(args) -> int:
    g = parse_graph(_read_input(args.file))
    sys.stdout.write(graph_to_dot(g))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadcolor",
        description="Decide road-colorability and construct certified synchronizing colorings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="report sink component and cycle gcd")
    p.add_argument("file", help="graph file, or - for stdin")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("color", help="construct a synchronizing coloring")
    p.add_argument("file", help="graph file, or - for stdin")
    p.add_argument("--emit-word", action="store_true", help="also print a reset word")
    p.add_argument("--paranoid", action="store_true", help="verify every internal step")
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("verify", help="certify a colored graph (slot = color)")
    p.add_argument("file", help="colored graph file, or - for stdin")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a feasible random graph")
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("dot", help="emit DOT with color labels")
    p.add_argument("file", help="graph file, or - for stdin")
    p.set_defaults(func=cmd_dot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
