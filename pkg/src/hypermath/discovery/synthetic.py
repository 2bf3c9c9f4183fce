"""Synthetic deduction chains with a known branching factor.

States are residues modulo a Mersenne prime.  Each of ``b`` rules is an
affine bijection, so every state has exactly ``b`` successors and ``b``
predecessors, and collisions between distinct paths are vanishingly rare.
Visited states live in one shared, hash-consed hypergraph.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

from ..hypergraph import EdgeClass, Hypergraph, Kind
from .search import SearchStats

PRIME = (1 << 61) - 1


@dataclass
class ChainFamily:
    b: int = 3
    seed: int = 0
    maps: list[tuple[int, int]] = field(init=False)
    start: int = field(init=False)

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("branching factor must be positive")
        rng = random.Random(self.seed)
        self.maps = [(rng.randrange(2, PRIME - 1), rng.randrange(PRIME)) for _ in range(self.b)]
        self.start = rng.randrange(PRIME)

    def forward(self, x: int) -> list[int]:
        return [(a * x + c) % PRIME for a, c in self.maps]

    def backward(self, y: int) -> list[int]:
        return [((y - c) * pow(a, -1, PRIME)) % PRIME for a, c in self.maps]

    def goal(self, depth: int) -> int:
        """The last rule applied ``depth`` times: the final node of a breadth-first sweep."""
        x = self.start
        a, c = self.maps[-1]
        for _ in range(depth):
            x = (a * x + c) % PRIME
        return x


@dataclass
class ChainRun:
    stats: SearchStats
    path: list[int]
    graph: Hypergraph


def _node(g: Hypergraph, state: int) -> str:
    return g.add_node(Kind.OPAQUE, state, ())


def _record_path(g: Hypergraph, path: list[int]):
    for x, y in zip(path, path[1:]):
        g.add_edge("chain-step", (_node(g, x),), (_node(g, y),), EdgeClass.COMPUTATION)


def forward_search(fam: ChainFamily, depth: int, budget: int = 10**7) -> ChainRun:
    """Breadth-first from the start state; counts expanded states."""
    g = Hypergraph()
    goal = fam.goal(depth)
    parent = {fam.start: None}
    _node(g, fam.start)
    queue = deque([(fam.start, 0)])
    stats = SearchStats()
    hit = fam.start if fam.start == goal else None
    while queue and hit is None:
        if stats.nodes_expanded >= budget:
            stats.outcome = "timeout"
            break
        x, d = queue.popleft()
        stats.nodes_expanded += 1
        stats.max_depth = max(stats.max_depth, d + 1)
        for y in fam.forward(x):
            if y in parent:
                continue
            parent[y] = x
            _node(g, y)
            if y == goal:
                hit = y
                break
            queue.append((y, d + 1))
    path = []
    if hit is not None:
        stats.outcome = "found"
        while hit is not None:
            path.append(hit)
            hit = parent[hit]
        path.reverse()
        _record_path(g, path)
    return ChainRun(stats, path, g)


def bidirectional_search(fam: ChainFamily, depth: int, budget: int = 10**7) -> ChainRun:
    """Alternate full layers from both ends; stop when the frontiers touch."""
    g = Hypergraph()
    goal = fam.goal(depth)
    fwd = {fam.start: None}
    bwd = {goal: None}
    _node(g, fam.start)
    _node(g, goal)
    layers = {True: [fam.start], False: [goal]}
    stats = SearchStats()
    meet = fam.start if fam.start == goal else None
    forward_turn = True
    while meet is None and (layers[True] or layers[False]):
        seen, other = (fwd, bwd) if forward_turn else (bwd, fwd)
        expand = fam.forward if forward_turn else fam.backward
        nxt = []
        for x in layers[forward_turn]:
            if stats.nodes_expanded >= budget:
                stats.outcome = "timeout"
                break
            stats.nodes_expanded += 1
            for y in expand(x):
                if y in seen:
                    continue
                seen[y] = x
                _node(g, y)
                if y in other:
                    meet = y
                    break
                nxt.append(y)
            if meet is not None:
                break
        if stats.outcome == "timeout":
            break
        layers[forward_turn] = nxt
        stats.max_depth += 1
        forward_turn = not forward_turn
    path = []
    if meet is not None:
        stats.outcome = "found"
        x = meet
        while x is not None:
            path.append(x)
            x = fwd[x]
        path.reverse()
        x = bwd[meet]
        while x is not None:
            path.append(x)
            x = bwd[x]
        _record_path(g, path)
    return ChainRun(stats, path, g)


def fit_slope(depths: list[int], counts: list[int]) -> float:
    """Least-squares slope of log(count) against depth."""
    xs = [float(d) for d in depths]
    ys = [math.log(c) for c in counts]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return num / den


def scaling_table(b: int = 3, depths=(4, 6, 8), seed: int = 0) -> list[dict]:
    fam = ChainFamily(b, seed)
    rows = []
    for d in depths:
        f = forward_search(fam, d)
        bi = bidirectional_search(fam, d)
        rows.append({"depth": d, "forward": f.stats.nodes_expanded, "bidirectional": bi.stats.nodes_expanded,
                     "forward_found": f.stats.outcome == "found", "bidirectional_found": bi.stats.outcome == "found"})
    return rows
