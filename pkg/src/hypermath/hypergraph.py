"""Hash-consed, ordered, colored, acyclic hypergraph store.

Nodes are identified by a digest of ``(kind, payload, inputs)`` so that two
structurally identical constructions always land on the same node.  Every
non-root node is the output of exactly one *construction* hyperedge; further
edges into a node come from computation (reduction) or deduction (typing)
rules and record alternative ways of reaching it.
"""
from __future__ import annotations

import hashlib
import heapq
import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional


class Kind(str, Enum):
    SORT = "Sort"
    NAT = "Nat"
    ZERO = "NatZero"
    SUCC = "NatSucc"
    VAR = "Var"
    LAMBDA = "Lambda"
    APP = "App"
    PI = "PiForm"
    SIGMA = "SigmaForm"
    PAIR = "Pair"
    PROJ1 = "Proj1"
    PROJ2 = "Proj2"
    ID = "IdForm"
    REFL = "Refl"
    CONG = "Cong"
    REC = "Rec"
    DEFREF = "DefRef"
    AND = "PropAnd"
    IMPLIES = "PropImplies"
    NOT = "PropNot"
    ATOM = "Atom"
    AXIOM = "Axiom"
    # opaque vertex for synthetic graphs (search experiments, tests)
    OPAQUE = "Opaque"


class EdgeClass(str, Enum):
    FORMATION = "Formation"
    INTRODUCTION = "Introduction"
    ELIMINATION = "Elimination"
    COMPUTATION = "Computation"
    DEDUCTION = "Deduction"


CONSTRUCTION_CLASSES = frozenset(
    {EdgeClass.FORMATION, EdgeClass.INTRODUCTION, EdgeClass.ELIMINATION, EdgeClass.DEDUCTION}
)


@dataclass(frozen=True)
class Rule:
    color: str
    arity: int
    edge_class: EdgeClass


# construction rule per kind; nullary kinds are roots and carry no edge
KIND_RULES: dict[Kind, Rule] = {
    Kind.SUCC: Rule("succ", 1, EdgeClass.INTRODUCTION),
    Kind.LAMBDA: Rule("lambda", 2, EdgeClass.INTRODUCTION),
    Kind.APP: Rule("app", 2, EdgeClass.ELIMINATION),
    Kind.PI: Rule("pi-form", 2, EdgeClass.FORMATION),
    Kind.SIGMA: Rule("sigma-form", 2, EdgeClass.FORMATION),
    Kind.PAIR: Rule("pair", 2, EdgeClass.INTRODUCTION),
    Kind.PROJ1: Rule("proj1", 1, EdgeClass.ELIMINATION),
    Kind.PROJ2: Rule("proj2", 1, EdgeClass.ELIMINATION),
    Kind.ID: Rule("id-form", 3, EdgeClass.FORMATION),
    Kind.REFL: Rule("refl", 1, EdgeClass.INTRODUCTION),
    Kind.CONG: Rule("cong", 1, EdgeClass.DEDUCTION),
    Kind.REC: Rule("rec", 4, EdgeClass.ELIMINATION),
    Kind.AND: Rule("and-intro-form", 2, EdgeClass.FORMATION),
    Kind.IMPLIES: Rule("implies-form", 2, EdgeClass.FORMATION),
    Kind.NOT: Rule("not-form", 1, EdgeClass.FORMATION),
    Kind.OPAQUE: Rule("opaque", -1, EdgeClass.DEDUCTION),
}
NULLARY_KINDS = frozenset(
    {Kind.SORT, Kind.NAT, Kind.ZERO, Kind.VAR, Kind.DEFREF, Kind.ATOM, Kind.AXIOM}
)
COMPUTATION_COLORS = ("beta", "iota", "proj-red", "delta")
TYPING_COLOR = "typing"


class HypergraphError(Exception):
    pass


class ArityMismatch(HypergraphError):
    pass


class CycleDetected(HypergraphError):
    pass


class UnknownInput(HypergraphError):
    pass


class BudgetZero(HypergraphError):
    pass


class FrozenGraph(HypergraphError):
    pass


def _digest(*parts) -> str:
    return hashlib.blake2b(repr(parts).encode(), digest_size=8).hexdigest()


def node_key(kind: Kind, payload, inputs: tuple[str, ...]) -> str:
    return _digest(kind.value, payload, inputs)


@dataclass(frozen=True)
class Node:
    id: str
    kind: Kind
    payload: object
    inputs: tuple[str, ...] = ()

    @property
    def is_root(self) -> bool:
        return not self.inputs and self.kind in NULLARY_KINDS


@dataclass(frozen=True)
class HyperEdge:
    id: str
    color: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    edge_class: EdgeClass

    @property
    def is_construction(self) -> bool:
        return self.edge_class in CONSTRUCTION_CLASSES and self.color != TYPING_COLOR


@dataclass
class Hypergraph:
    """Append-only store.  Mutation bumps ``revision``; :meth:`snapshot` freezes a copy."""

    nodes: dict[str, Node] = field(default_factory=dict)
    edges: dict[str, HyperEdge] = field(default_factory=dict)
    roots: dict[str, None] = field(default_factory=dict)
    types: dict[str, str] = field(default_factory=dict)
    definitions: dict[str, str] = field(default_factory=dict)
    tombstones: dict[str, None] = field(default_factory=dict)
    revision: int = 0
    frozen: bool = False
    _incoming: dict[str, list[str]] = field(default_factory=dict, repr=False)
    _outgoing: dict[str, list[str]] = field(default_factory=dict, repr=False)
    # kernel-side memo tables; keyed by node ids, valid for the graph's lifetime
    cache: dict[str, dict] = field(default_factory=dict, repr=False)

    # -- basic access ---------------------------------------------------

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownInput(node_id) from None

    def kind(self, node_id: str) -> Kind:
        return self.node(node_id).kind

    def incoming(self, node_id: str) -> list[HyperEdge]:
        return [self.edges[e] for e in self._incoming.get(node_id, ())]

    def outgoing(self, node_id: str) -> list[HyperEdge]:
        return [self.edges[e] for e in self._outgoing.get(node_id, ())]

    def construction_edge(self, node_id: str) -> Optional[HyperEdge]:
        for e in self.incoming(node_id):
            if e.is_construction:
                return e
        return None

    def memo(self, name: str) -> dict:
        return self.cache.setdefault(name, {})

    # -- mutation ---------------------------------------------------------

    def _check_writable(self):
        if self.frozen:
            raise FrozenGraph("snapshot is immutable; call copy() first")

    def add_node(self, kind: Kind, payload=None, inputs: Iterable[str] = ()) -> str:
        """Return the canonical id for the construction, adding it if new."""
        inputs = tuple(inputs)
        for i in inputs:
            if i not in self.nodes:
                raise UnknownInput(i)
        if kind in NULLARY_KINDS:
            if inputs:
                raise ArityMismatch(f"{kind.value} takes no inputs, got {len(inputs)}")
        else:
            rule = KIND_RULES[kind]
            if rule.arity >= 0 and rule.arity != len(inputs):
                raise ArityMismatch(f"{rule.color} expects {rule.arity} inputs, got {len(inputs)}")
        nid = node_key(kind, payload, inputs)
        if nid in self.nodes:
            return nid
        self._check_writable()
        self.nodes[nid] = Node(nid, kind, payload, inputs)
        if kind in NULLARY_KINDS:
            self.roots[nid] = None
        else:
            rule = KIND_RULES[kind]
            self._insert_edge(rule.color, inputs, (nid,), rule.edge_class)
        self.revision += 1
        return nid

    def add_edge(self, color: str, inputs: Iterable[str], outputs: Iterable[str],
                 edge_class: EdgeClass) -> str:
        inputs, outputs = tuple(inputs), tuple(outputs)
        if not outputs:
            raise ArityMismatch("a hyperedge needs at least one output")
        for i in inputs + outputs:
            if i not in self.nodes:
                raise UnknownInput(i)
        eid = _digest(color, inputs, outputs)
        if eid in self.edges:
            return eid
        self._check_writable()
        if edge_class in CONSTRUCTION_CLASSES and color != TYPING_COLOR:
            if any(o in self.roots for o in outputs):
                raise CycleDetected("construction edges may not output a root")
            anc = self.ancestors(inputs)
            if any(o in anc for o in outputs):
                raise CycleDetected(f"{color} would close a construction cycle")
        self._insert_edge(color, inputs, outputs, edge_class)
        self.revision += 1
        return eid

    def _insert_edge(self, color, inputs, outputs, edge_class) -> str:
        eid = _digest(color, inputs, outputs)
        self.edges[eid] = HyperEdge(eid, color, inputs, outputs, edge_class)
        for o in outputs:
            self._incoming.setdefault(o, []).append(eid)
        for i in dict.fromkeys(inputs):
            self._outgoing.setdefault(i, []).append(eid)
        return eid

    def set_type(self, node_id: str, type_id: str) -> str:
        """Record ``node : type`` with a typing (deduction) edge; returns the edge id."""
        if type_id not in self.nodes:
            raise UnknownInput(type_id)
        eid = self.add_edge(TYPING_COLOR, (node_id,), (type_id,), EdgeClass.DEDUCTION)
        self.types.setdefault(node_id, type_id)
        return eid

    def typing_sources(self, type_id: str) -> list[str]:
        """All nodes with a recorded typing edge into ``type_id``."""
        return [e.inputs[0] for e in self.incoming(type_id) if e.color == TYPING_COLOR]

    def tombstone(self, node_ids: Iterable[str]):
        self._check_writable()
        for n in node_ids:
            self.tombstones[n] = None
        self.revision += 1

    # -- snapshots ----------------------------------------------------------

    def copy(self) -> "Hypergraph":
        g = Hypergraph(
            nodes=dict(self.nodes), edges=dict(self.edges), roots=dict(self.roots),
            types=dict(self.types), definitions=dict(self.definitions),
            tombstones=dict(self.tombstones), revision=self.revision,
        )
        g._incoming = {k: list(v) for k, v in self._incoming.items()}
        g._outgoing = {k: list(v) for k, v in self._outgoing.items()}
        g.cache = {k: dict(v) for k, v in self.cache.items()}
        return g

    def snapshot(self) -> "Hypergraph":
        g = self.copy()
        g.frozen = True
        return g

    # -- structure queries ----------------------------------------------

    def ancestors(self, node_ids: Iterable[str]) -> set[str]:
        """Transitive construction inputs of ``node_ids`` (inclusive)."""
        seen: set[str] = set()
        stack = list(node_ids)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            for e in self.incoming(n):
                if e.is_construction:
                    stack.extend(e.inputs)
        return seen

    def topological_order(self) -> list[str]:
        """Kahn's algorithm over construction edges; raises CycleDetected on failure."""
        indeg = {n: 0 for n in self.nodes}
        for e in self.edges.values():
            if e.is_construction:
                for o in e.outputs:
                    indeg[o] += len(set(e.inputs))
        # a heap keeps the order canonical whatever the insertion history
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order = []
        while ready:
            n = heapq.heappop(ready)
            order.append(n)
            for e in self.outgoing(n):
                if not e.is_construction:
                    continue
                for o in e.outputs:
                    indeg[o] -= 1
                    if indeg[o] == 0:
                        heapq.heappush(ready, o)
        if len(order) != len(self.nodes):
            raise CycleDetected("construction relation is not acyclic")
        return order

    def construction_edges(self) -> list[HyperEdge]:
        return [e for e in self.edges.values() if e.is_construction]

    def subgraph(self, node_ids: Iterable[str], edge_ids: Iterable[str]) -> "Hypergraph":
        keep = set(node_ids)
        g = Hypergraph()
        for nid in self.nodes:
            if nid in keep:
                g.nodes[nid] = self.nodes[nid]
                if nid in self.roots:
                    g.roots[nid] = None
                t = self.types.get(nid)
                if t is not None and t in keep:
                    g.types[nid] = t
        for eid in edge_ids:
            e = self.edges[eid]
            g._insert_edge(e.color, e.inputs, e.outputs, e.edge_class)
        for n, body in self.definitions.items():
            if body in keep:
                g.definitions[n] = body
        return g


def backward_closure(graph: Hypergraph, node_id: str) -> Hypergraph:
    """Minimal sub-hypergraph holding ``node_id`` and its construction history."""
    graph.node(node_id)
    nodes = graph.ancestors([node_id])
    edges = [e.id for n in nodes for e in graph.incoming(n) if e.is_construction]
    return graph.subgraph(nodes, edges)


# -- extension ---------------------------------------------------------------

PROPOSITION_KINDS = frozenset({Kind.ATOM, Kind.AND, Kind.IMPLIES, Kind.NOT, Kind.ID, Kind.PI})


@dataclass(frozen=True)
class ExtensionRule:
    color: str
    arity: int
    accepts: Callable[[Hypergraph, str], bool]
    build: Callable[[Hypergraph, tuple[str, ...]], str]


def _is_prop(g: Hypergraph, n: str) -> bool:
    node = g.nodes[n]
    if node.kind in (Kind.ATOM, Kind.AND, Kind.IMPLIES, Kind.NOT):
        return True
    t = g.types.get(n)
    return t is not None and g.nodes[t].kind is Kind.SORT


def _is_nat_value(g: Hypergraph, n: str) -> bool:
    node = g.nodes[n]
    if node.kind in (Kind.ZERO, Kind.SUCC):
        return True
    t = g.types.get(n)
    return t is not None and g.nodes[t].kind is Kind.NAT


EXTENSION_RULES: dict[str, ExtensionRule] = {
    "and-intro-form": ExtensionRule(
        "and-intro-form", 2, _is_prop, lambda g, xs: g.add_node(Kind.AND, None, xs)),
    "implies-form": ExtensionRule(
        "implies-form", 2, _is_prop, lambda g, xs: g.add_node(Kind.IMPLIES, None, xs)),
    "not-form": ExtensionRule(
        "not-form", 1, _is_prop, lambda g, xs: g.add_node(Kind.NOT, None, xs)),
    "succ": ExtensionRule(
        "succ", 1, _is_nat_value, lambda g, xs: g.add_node(Kind.SUCC, None, xs)),
}


def extend_layer(graph: Hypergraph, rules: Iterable[str], budget: float = math.inf,
                 frontier: Optional[Iterable[str]] = None) -> tuple[Hypergraph, list[str]]:
    """One application of the extension operator.

    Inputs are drawn from ``frontier`` when given (newest-layer pairing),
    otherwise from the whole graph.  At most ``budget`` new nodes survive;
    candidates are visited in (rule color, input id tuple) order.
    Returns the new snapshot and the list of newly added node ids.
    """
    if budget <= 0:
        raise BudgetZero("specialization budget must be positive")
    out = graph.copy()
    out.frozen = False
    pool = sorted(frontier) if frontier is not None else sorted(graph.nodes)
    added: list[str] = []
    for color in sorted(set(rules)):
        rule = EXTENSION_RULES[color]
        eligible = [n for n in pool if rule.accepts(graph, n)]
        for xs in itertools.product(eligible, repeat=rule.arity):
            if len(added) >= budget:
                break
            before = len(out.nodes)
            nid = rule.build(out, xs)
            if len(out.nodes) > before:
                added.append(nid)
    out.frozen = True
    return out, added


def extend(graph: Hypergraph, rules: Iterable[str], budget: float = math.inf,
           frontier: Optional[Iterable[str]] = None) -> Hypergraph:
    return extend_layer(graph, rules, budget, frontier)[0]


# -- serialization ------------------------------------------------------------

def to_json(graph: Hypergraph) -> dict:
    order = graph.topological_order()
    return {
        "roots": [n for n in order if n in graph.roots],
        "nodes": [
            {"id": n, "kind": graph.nodes[n].kind.value,
             "payload": graph.nodes[n].payload,
             "inputs": list(graph.nodes[n].inputs),
             "type": graph.types.get(n)}
            for n in order
        ],
        "edges": [
            {"id": e.id, "color": e.color, "class": e.edge_class.value,
             "inputs": list(e.inputs), "outputs": list(e.outputs)}
            for e in sorted(graph.edges.values(), key=lambda e: (e.color, e.id))
        ],
        "definitions": dict(sorted(graph.definitions.items())),
        "tombstones": sorted(graph.tombstones),
    }


def _payload_from_json(p):
    if isinstance(p, list):
        return tuple(_payload_from_json(x) for x in p)
    return p


def from_json(doc: dict) -> Hypergraph:
    g = Hypergraph()
    for rec in doc.get("nodes", []):
        kind = Kind(rec["kind"])
        payload = _payload_from_json(rec.get("payload"))
        inputs = tuple(rec.get("inputs", ()))
        nid = node_key(kind, payload, inputs)
        if nid != rec["id"]:
            raise HypergraphError(f"node id {rec['id']} does not match its content")
        g.nodes[nid] = Node(nid, kind, payload, inputs)
        if kind in NULLARY_KINDS:
            g.roots[nid] = None
    for rec in doc.get("edges", []):
        g._insert_edge(rec["color"], tuple(rec["inputs"]), tuple(rec["outputs"]),
                       EdgeClass(rec["class"]))
    for rec in doc.get("nodes", []):
        if rec.get("type"):
            g.types[rec["id"]] = rec["type"]
    g.definitions.update(doc.get("definitions", {}))
    for n in doc.get("tombstones", []):
        g.tombstones[n] = None
    g.revision = len(g.nodes) + len(g.edges)
    return g


def dumps_json(graph: Hypergraph) -> bytes:
    return json.dumps(to_json(graph), indent=1, sort_keys=True).encode()


def node_label(node: Node) -> str:
    if node.payload is None:
        return node.kind.value
    return f"{node.kind.value}:{node.payload}"


def to_dot(graph: Hypergraph) -> str:
    """DOT text; each hyperedge becomes an auxiliary point vertex."""
    lines = ["digraph hypergraph {", "  rankdir=BT;"]
    for n in graph.topological_order():
        label = node_label(graph.nodes[n]).replace('"', "'")
        lines.append(f'  n{n} [label="{label}"];')
    for e in sorted(graph.edges.values(), key=lambda e: (e.color, e.id)):
        lines.append(f'  e{e.id} [shape=point, xlabel="{e.color}"];')
        for pos, i in enumerate(e.inputs):
            lines.append(f'  n{i} -> e{e.id} [label="{pos}"];')
        for o in e.outputs:
            lines.append(f"  e{e.id} -> n{o};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export(graph: Hypergraph, fmt: str) -> bytes:
    if fmt == "json":
        return dumps_json(graph)
    if fmt == "dot":
        return to_dot(graph).encode()
    raise ValueError(f"unknown export format {fmt!r}")


def load(data: bytes | str) -> Hypergraph:
    return from_json(json.loads(data))


def structurally_equal(a: Hypergraph, b: Hypergraph) -> bool:
    return (set(a.nodes) == set(b.nodes) and set(a.edges) == set(b.edges)
            and set(a.roots) == set(b.roots) and a.types == b.types
            and a.definitions == b.definitions)
