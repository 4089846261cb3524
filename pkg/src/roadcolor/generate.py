"""Seeded random generator of feasible test graphs.

Graphs come out strongly connected with cycle gcd 1: slot 0 starts as a
random permutation cycle through all vertices, one random chord replaces
one backbone edge, the remaining slots get uniform random targets, and
the whole draw retries (with a seed derived from the master seed) until
the feasibility check passes.  Output is a pure function of (n, d, seed).
"""

import random

from roadcolor.model import Digraph
from roadcolor.precheck import gcd_of_cycles, scc_decompose


def generate_agw(n: int, d: int, seed: int, max_attempts: int = 10_000) -> Digraph:
    """Deterministic strongly connected digraph with cycle gcd 1.

    Raises RuntimeError when the retry budget runs out, which for d = 1
    and n > 1 is inevitable: a strongly connected functional graph is a
    single cycle, so its gcd is its length.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    for attempt in range(max_attempts):
        rng = random.Random(f"{seed}:{attempt}")
        cycle = list(range(n))
        rng.shuffle(cycle)
        slot0 = [0] * n
        for i, v in enumerate(cycle):
            slot0[v] = cycle[(i + 1) % n]
        slot0[rng.randrange(n)] = rng.randrange(n)
        rows = tuple(
            tuple([slot0[v]] + [rng.randrange(n) for _ in range(d - 1)])
            for v in range(n)
        )
        g = Digraph(n, d, rows)
        if len(scc_decompose(g).components) == 1 and gcd_of_cycles(g).gcd == 1:
            return g
    raise RuntimeError(f"no feasible graph with n={n} d={d} in {max_attempts} attempts")
