"""Structural measures over a finite hypergraph snapshot.

All minimizations range over the constructions actually recorded in the graph
(construction, computation and deduction edges, never typing edges).
"""
from __future__ import annotations

import csv
import heapq
import io
import itertools
import math
import sys
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .hypergraph import (
    EXTENSION_RULES, TYPING_COLOR, BudgetZero, HyperEdge, Hypergraph, HypergraphError, Kind, Node,
    UnknownInput, backward_closure, extend_layer,
)
from .kernel import syntax

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


class Unreachable(HypergraphError):
    pass


class Unproven(HypergraphError):
    pass


class ZeroLength(HypergraphError):
    pass


class GuardExceeded(HypergraphError):
    pass


@dataclass(frozen=True)
class CostModel:
    edge_cost: Callable[[HyperEdge], float] = lambda e: 1.0
    input_cost: Callable[[Node], float] = lambda n: 0.0

    def scaled(self, factor: float) -> "CostModel":
        ec, ic = self.edge_cost, self.input_cost
        return CostModel(lambda e: factor * ec(e), lambda n: factor * ic(n))


UNIT = CostModel()


@dataclass
class ComplexityReport:
    node: str
    value: float
    witness: Hypergraph
    exact: bool
    explored: int = 0


@dataclass
class EfficiencyReport:
    value: float
    numerator: float
    denominator: float
    exact: bool
    proof: Optional[str] = None


def derivation_edges(g: Hypergraph, n: str) -> list[HyperEdge]:
    return [e for e in g.incoming(n) if e.color != TYPING_COLOR]


# -- depth and neighbourhoods --------------------------------------------------

def depths(g: Hypergraph) -> dict[str, int]:
    """Layer index of every node reachable from the roots."""
    remaining = {}
    for e in g.edges.values():
        if e.color != TYPING_COLOR:
            remaining[e.id] = len(set(e.inputs))
    out: dict[str, int] = {}
    heap = [(0, r) for r in sorted(g.roots)]
    # edges with no inputs are available at layer 0
    for eid, k in remaining.items():
        if k == 0:
            heap.extend((1, o) for o in g.edges[eid].outputs)
    heapq.heapify(heap)
    while heap:
        d, n = heapq.heappop(heap)
        if n in out:
            continue
        out[n] = d
        for e in g.outgoing(n):
            if e.color == TYPING_COLOR:
                continue
            remaining[e.id] -= 1
            if remaining[e.id] == 0:
                level = 1 + max(out[i] for i in e.inputs)
                for o in e.outputs:
                    if o not in out:
                        heapq.heappush(heap, (level, o))
    return out


def depth(g: Hypergraph, node: str) -> int:
    g.node(node)
    d = depths(g).get(node)
    if d is None:
        raise Unreachable(node)
    return d


def neighborhood(g: Hypergraph, node: str, d: int, rules: Iterable[str] = ("and-intro-form", "not-form"),
                 budget: float = math.inf, context: Iterable[str] = ()) -> Hypergraph:
    """Nodes reachable from ``{node} ∪ context`` by at most ``d`` extension layers.

    Each layer draws its inputs from the ball built so far; at most ``budget``
    nodes join per layer, in (rule colour, input tuple) order.
    """
    g.node(node)
    if d < 0:
        raise ValueError("d must be non-negative")
    if budget <= 0:
        raise BudgetZero("specialization budget must be positive")
    work = g.copy()
    work.frozen = False
    ball = dict.fromkeys([node, *sorted(context)])
    for _ in range(d):
        pool = sorted(ball)
        fresh: dict[str, None] = {}
        for color in sorted(set(rules)):
            rule = EXTENSION_RULES[color]
            eligible = [n for n in pool if rule.accepts(work, n)]
            for xs in itertools.product(eligible, repeat=rule.arity):
                if len(fresh) >= budget:
                    break
                nid = rule.build(work, xs)
                if nid not in ball:
                    fresh[nid] = None
        ball.update(fresh)
    edges = [e.id for n in ball for e in work.incoming(n)
             if e.is_construction and all(i in ball for i in e.inputs)]
    sub = work.subgraph(ball, edges)
    sub.frozen = True
    return sub


# -- complexity --------------------------------------------------------------

def complexity(sub: Hypergraph, model: CostModel = UNIT) -> float:
    """Edge costs plus input-node costs of a sub-hypergraph."""
    produced = {o for e in sub.edges.values() for o in e.outputs}
    total = sum(model.edge_cost(e) for e in sub.edges.values())
    total += sum(model.input_cost(sub.nodes[n]) for n in sub.nodes if n not in produced)
    return total


class _Search:
    def __init__(self, g: Hypergraph, target: str, model: CostModel, budget: int):
        self.g = g
        self.model = model
        self.budget = budget
        self.explored = 0
        self.truncated = False
        self.options: dict[str, list] = {}
        # the node's own construction history is always a valid upper bound
        closure = backward_closure(g, target)
        self.best_cost = complexity(closure, model)
        self.best_key = self._key(closure.edges.values())
        self.best_choice = {n: None for n in closure.nodes}
        for e in closure.edges.values():
            for o in e.outputs:
                self.best_choice[o] = e

    @staticmethod
    def _key(edges):
        return tuple(sorted((e.color, e.id) for e in edges))

    def candidates(self, n: str) -> list:
        opts = self.options.get(n)
        if opts is None:
            opts = []
            if n in self.g.roots:
                opts.append(None)
            edges = derivation_edges(self.g, n)
            edges.sort(key=lambda e: (self.model.edge_cost(e), e.color, e.id))
            opts.extend(edges)
            self.options[n] = opts
        return opts

    def reaches(self, chosen: dict, start: Iterable[str], goal: str) -> bool:
        stack, seen = list(start), set()
        while stack:
            x = stack.pop()
            if x == goal:
                return True
            if x in seen:
                continue
            seen.add(x)
            e = chosen.get(x)
            if e is not None:
                stack.extend(e.inputs)
        return False

    def run(self, target: str):
        self.dfs([target], {}, {}, 0.0)

    def dfs(self, pending: list, chosen: dict, used: dict, cost: float):
        while pending and pending[-1] in chosen:
            pending = pending[:-1]
        if not pending:
            key = self._key(used.values())
            if (cost, key) < (self.best_cost, self.best_key):
                self.best_cost, self.best_key = cost, key
                self.best_choice = dict(chosen)
            return
        n = pending[-1]
        rest = pending[:-1]
        for opt in self.candidates(n):
            if self.explored >= self.budget:
                self.truncated = True
                return
            self.explored += 1
            if opt is None:
                c = cost + self.model.input_cost(self.g.nodes[n])
                if c > self.best_cost:
                    continue
                chosen[n] = None
                self.dfs(rest, chosen, used, c)
                del chosen[n]
                continue
            if n in opt.inputs or self.reaches(chosen, opt.inputs, n):
                continue
            fresh = opt.id not in used
            c = cost + (self.model.edge_cost(opt) if fresh else 0.0)
            if c > self.best_cost:
                continue
            chosen[n] = opt
            if fresh:
                used[opt.id] = opt
            self.dfs(rest + sorted(set(opt.inputs), reverse=True), chosen, used, c)
            if fresh:
                del used[opt.id]
            del chosen[n]


def _witness(g: Hypergraph, choice: dict) -> Hypergraph:
    edges = sorted({e.id for e in choice.values() if e is not None})
    return g.subgraph(choice.keys(), edges)


def min_complexity(g: Hypergraph, node: str, model: CostModel = UNIT, budget: int = 10_000) -> ComplexityReport:
    """Cheapest recorded derivation of ``node`` (branch and bound).

    Each needed node picks one incoming edge (or, for roots, stands as a
    leaf); shared edges are paid once.  Ties go to the lexicographically
    smallest sorted edge-colour sequence.
    """
    if node not in g.nodes:
        raise UnknownInput(node)
    s = _Search(g, node, model, budget)
    s.run(node)
    return ComplexityReport(node, s.best_cost, _witness(g, s.best_choice), not s.truncated, s.explored)


# -- length ------------------------------------------------------------------

def edge_length(g: Hypergraph, e: HyperEdge, out: str, val: dict[str, int]) -> int:
    """Length of ``out`` when derived through ``e`` from inputs of known length.

    A node's own construction adds its surface tokens (parentheses excluded);
    any other constructive edge counts one token; a computation edge passes
    the source length through.
    """
    if not e.is_construction:
        return max(val[i] for i in e.inputs)
    if g.construction_edge(out) is not e:
        return 1 + sum(val[i] for i in e.inputs)
    k = g.nodes[out].kind
    if k is Kind.APP:
        return sum(val[i] for i in e.inputs)
    if k is Kind.LAMBDA:
        dom, body = e.inputs
        if g.nodes[dom].kind is Kind.NAT:
            return 2 + val[body]
        return 2 + val[dom] + val[body]
    if k in (Kind.PI, Kind.SIGMA):
        return 2 + sum(val[i] for i in e.inputs)
    return 1 + sum(val[i] for i in e.inputs)


def leaf_tokens(g: Hypergraph, n: str) -> int:
    node = g.nodes[n]
    if node.kind is Kind.AXIOM:
        return syntax.token_length(syntax.show(g, n))
    return 1


def lengths(g: Hypergraph, targets: Iterable[str], budget: int = 100_000) -> tuple[dict[str, int], dict[str, HyperEdge], bool]:
    """Shortest-expression lengths for every node feeding into ``targets``.

    Generalised Dijkstra: every edge value is monotone in its inputs and at
    least as large as each of them, so nodes settle in increasing order.
    Returns (lengths, chosen edge per node, finished).
    """
    need = set()
    stack = list(targets)
    while stack:
        n = stack.pop()
        if n in need:
            continue
        need.add(n)
        for e in derivation_edges(g, n):
            stack.extend(e.inputs)
    remaining: dict[str, int] = {}
    heap: list = []
    for n in sorted(need):
        if n in g.roots:
            heap.append((leaf_tokens(g, n), n, ""))
        for e in derivation_edges(g, n):
            if e.id not in remaining:
                remaining[e.id] = len(set(e.inputs))
                if not e.inputs:
                    heap.append((edge_length(g, e, n, {}), n, e.id))
    heapq.heapify(heap)
    val: dict[str, int] = {}
    via: dict[str, HyperEdge] = {}
    pops = 0
    while heap:
        if pops >= budget:
            return val, via, False
        v, n, eid = heapq.heappop(heap)
        if n in val:
            continue
        pops += 1
        val[n] = v
        if eid:
            via[n] = g.edges[eid]
        for e in g.outgoing(n):
            if e.id not in remaining:
                continue
            remaining[e.id] -= 1
            if remaining[e.id]:
                continue
            for o in e.outputs:
                if o not in val and o in need:
                    heapq.heappush(heap, (edge_length(g, e, o, val), o, e.id))
    return val, via, True


def _tree_witness(g: Hypergraph, node: str, via: dict[str, HyperEdge]) -> Hypergraph:
    nodes, edges, stack = set(), set(), [node]
    while stack:
        n = stack.pop()
        if n in nodes:
            continue
        nodes.add(n)
        e = via.get(n)
        if e is not None:
            edges.add(e.id)
            stack.extend(e.inputs)
    return g.subgraph(nodes, sorted(edges))


def length(g: Hypergraph, node: str, budget: int = 100_000) -> ComplexityReport:
    """Token count of the shortest recorded expression for ``node``."""
    if node not in g.nodes:
        raise UnknownInput(node)
    val, via, done = lengths(g, [node], budget)
    if node in val:
        return ComplexityReport(node, val[node], _tree_witness(g, node, via), True)
    # fall back to the node's own construction
    return ComplexityReport(node, syntax.length_of(g, node), backward_closure(g, node), False)


# -- efficiency --------------------------------------------------------------

def proofs_of(g: Hypergraph, prop: str) -> list[str]:
    return sorted(set(g.typing_sources(prop)))


def proof_statement_length(g: Hypergraph, proof: str, budget: int = 100_000) -> tuple[float, bool]:
    """Sum of shortest lengths over the statements making up ``proof``."""
    stmts = sorted(g.ancestors([proof]))
    val, _, done = lengths(g, stmts, budget)
    total = 0
    for s in stmts:
        total += val[s] if s in val else syntax.length_of(g, s)
    return total, done and all(s in val for s in stmts)


def efficiency(g: Hypergraph, prop: str, budget: int = 100_000, numerator: str = "length",
               model: CostModel = UNIT) -> EfficiencyReport:
    """Minimal proof complexity over recorded proofs divided by statement length."""
    if prop not in g.nodes:
        raise UnknownInput(prop)
    proofs = proofs_of(g, prop)
    if not proofs:
        raise Unproven(prop)
    best, best_p, exact = math.inf, None, True
    for p in proofs:
        if numerator == "length":
            v, ok = proof_statement_length(g, p, budget)
        elif numerator == "edges":
            rep = min_complexity(g, p, model, budget)
            v, ok = rep.value, rep.exact
        else:
            raise ValueError(f"unknown numerator {numerator!r}")
        exact &= ok
        if v < best:
            best, best_p = v, p
    lrep = length(g, prop, budget)
    if lrep.value <= 0:
        raise ZeroLength(prop)
    return EfficiencyReport(best / lrep.value, best, lrep.value, exact and lrep.exact, best_p)


# -- growth and hubs ---------------------------------------------------------

def growth_experiment(k: int, layers: int, override: bool = False) -> list[int]:
    """Layer sizes of conjunction-only extension that pairs the newest layer."""
    if k < 1:
        raise ValueError("need at least one atom")
    if layers < 0:
        raise ValueError("layers must be non-negative")
    if layers > 4 and not override:
        raise GuardExceeded(f"{layers} layers would create about k^{2 ** layers} nodes")
    g = Hypergraph()
    newest = [g.add_node(Kind.ATOM, atom_name(i)) for i in range(k)]
    sizes = [len(newest)]
    for _ in range(layers):
        g, newest = extend_layer(g, ["and-intro-form"], frontier=newest)
        sizes.append(len(newest))
    return sizes


def atom_name(i: int) -> str:
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    return letters[i] if i < 26 else f"A{i}"


def hub_scores(g: Hypergraph, samples: Optional[int] = None, seed: int = 0) -> dict[str, dict]:
    """Degrees plus betweenness on the node/edge bipartite expansion."""
    import networkx as nx

    b = nx.DiGraph()
    b.add_nodes_from(sorted(g.nodes))
    for eid in sorted(g.edges):
        e = g.edges[eid]
        b.add_node("e:" + eid)
        for i in e.inputs:
            b.add_edge(i, "e:" + eid)
        for o in e.outputs:
            b.add_edge("e:" + eid, o)
    if samples is not None and samples >= b.number_of_nodes():
        samples = None
    bc = nx.betweenness_centrality(b, k=samples, seed=seed) if b.number_of_nodes() else {}
    out = {}
    for n in sorted(g.nodes):
        out[n] = {
            "outDegree": len(g._outgoing.get(n, ())),
            "inDegree": len(g._incoming.get(n, ())),
            "betweennessApprox": bc.get(n, 0.0),
        }
    return out


# -- CSV ----------------------------------------------------------------------

NODE_COLUMNS = ["id", "kind", "depth", "m", "m_exact", "l", "l_exact", "E", "E_exact",
                "in_degree", "out_degree", "betweenness", "betweenness_exact"]


def node_rows(g: Hypergraph, budget: int = 2_000, samples: Optional[int] = 64, seed: int = 0) -> list[dict]:
    dep = depths(g)
    val, _, done = lengths(g, sorted(g.nodes), budget * 50)
    hubs = hub_scores(g, samples, seed)
    exact_bc = samples is None or samples >= len(g.nodes) + len(g.edges)
    rows = []
    for n in g.topological_order():
        m = min_complexity(g, n, UNIT, budget)
        e_val, e_exact = "", ""
        if proofs_of(g, n):
            er = efficiency(g, n, budget * 50)
            e_val, e_exact = _fmt(er.value), er.exact
        rows.append({
            "id": n, "kind": g.nodes[n].kind.value, "depth": dep.get(n, ""),
            "m": _fmt(m.value), "m_exact": m.exact,
            "l": val.get(n, syntax.length_of(g, n) if g.nodes[n].kind is not Kind.OPAQUE else ""),
            "l_exact": n in val,
            "E": e_val, "E_exact": e_exact,
            "in_degree": hubs[n]["inDegree"], "out_degree": hubs[n]["outDegree"],
            "betweenness": _fmt(hubs[n]["betweennessApprox"]), "betweenness_exact": exact_bc,
        })
    return rows


def _fmt(x: float) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return f"{x:.6g}"


def write_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def growth_csv(sizes: list[int]) -> str:
    return write_csv([{"layer": j, "count": c} for j, c in enumerate(sizes)], ["layer", "count"])
