"""Abstraction mining, utility scoring and corpus rewriting.

A pattern is the top portion of some stored term: concrete nodes down to a
frontier of holes.  Holes are linear and numbered left to right.  A hole
whose fillers mention binders that sit inside the pattern is higher order:
its argument is the filler closed over those binders, and the abstraction
body applies the hole to them.

Costs are tree costs (shared subterms are paid per occurrence), priced by the
construction rule of each node under a :class:`~hypermath.metrics.CostModel`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

from .corpus import Corpus, EmptyCorpus
from .hypergraph import KIND_RULES, EdgeClass, HyperEdge, Hypergraph, Kind, Node
from .kernel import terms as T
from .kernel.reduce import FuelExhausted, normalize
from .kernel.typing import KernelError, check_proof, define, infer, nf
from .metrics import UNIT, CostModel

GREEDY = "greedy-leftmost-nonoverlapping"
NUMERAL_FOLD = "numeral-fold"
PROVENANCE_COLOR = "abstraction"

# enumeration caps keep mining polynomial on large corpora
_MAX_PARTIALS = 256
_MAX_CANDIDATES = 24


class SemanticDrift(RuntimeError):
    pass


class UtilityMismatch(RuntimeError):
    pass


# -- costs -------------------------------------------------------------------

class Pricing:
    """Tree cost of terms under a cost model (memoised per instance)."""

    def __init__(self, g: Hypergraph, model: CostModel = UNIT):
        self.g = g
        self.model = model
        self._kind: dict[Kind, float] = {}
        self._memo: dict[str, float] = {}

    def internal(self, kind: Kind) -> float:
        c = self._kind.get(kind)
        if c is None:
            rule = KIND_RULES[kind]
            c = self.model.edge_cost(HyperEdge("", rule.color, (), (), rule.edge_class))
            self._kind[kind] = c
        return c

    def leaf(self, node: Node) -> float:
        return self.model.input_cost(node)

    def node_cost(self, t: str) -> float:
        node = self.g.nodes[t]
        return self.internal(node.kind) if node.inputs else self.leaf(node)

    def tree(self, t: str) -> float:
        hit = self._memo.get(t)
        if hit is None:
            hit = self.node_cost(t) + sum(self.tree(c) for c in self.g.nodes[t].inputs)
            self._memo[t] = hit
        return hit

    def app_chain(self, k: int, name: str) -> float:
        return k * self.internal(Kind.APP) + self.leaf(Node("", Kind.DEFREF, name))


def corpus_cost(c: Corpus, model: CostModel = UNIT) -> float:
    p = Pricing(c.graph, model)
    return sum(p.tree(t) for _, t in c.programs())


# -- patterns ------------------------------------------------------------------

@dataclass(frozen=True)
class HoleInfo:
    higher_order: bool
    depth: int
    domains: tuple[str, ...]  # binder domains above the hole, outermost first


@dataclass
class Abstraction:
    pattern: tuple
    holes: tuple[HoleInfo, ...]
    text: str
    hole_types: Optional[tuple[str, ...]] = None
    body: Optional[str] = None
    cost: float = 0.0
    utility: float = 0.0
    occurrences: int = 0
    name: Optional[str] = None
    refs: frozenset = frozenset()

    @property
    def arity(self) -> int:
        return len(self.holes)


@dataclass
class RewriteOutcome:
    cost_before: float
    cost_after: float
    occurrences: int
    utility: float
    strategy: str
    rewritten: dict = field(default_factory=dict)  # label -> (old node, new node)


def _enumerate(g: Hypergraph, t: str, b: int, size: int, arity: int, memo: dict) -> list:
    """Top portions of ``t`` at binder depth ``b``: (pattern, size, holes)."""
    key = (t, b, size, arity)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out = []
    if arity >= 1:
        ho = any(i < b for i in T.free_vars(g, t))
        out.append((("H", ho), 0, 1))
    node = g.nodes[t]
    legal = node.kind is not Kind.OPAQUE and not (node.kind is Kind.VAR and node.payload >= b)
    if size >= 1 and legal:
        partial = [((), 1, 0)]
        for pos, c in enumerate(node.inputs):
            cb = b + 1 if T.binds(node.kind, pos) else b
            nxt = []
            for kids, s, h in partial:
                for cp, cs, ch in _enumerate(g, c, cb, size - s, arity - h, memo):
                    nxt.append((kids + (cp,), s + cs, h + ch))
                    if len(nxt) >= _MAX_PARTIALS:
                        break
                if len(nxt) >= _MAX_PARTIALS:
                    break
            partial = nxt
        for kids, s, h in partial:
            out.append((("N", node.kind.value, node.payload, kids), s, h))
    memo[key] = out
    return out


def _holes(g: Hypergraph, pat: tuple) -> Optional[tuple[HoleInfo, ...]]:
    """Hole descriptors in order, or None if a higher-order hole sits under
    a binder whose domain is not a closed, hole-free subterm."""
    out: list[HoleInfo] = []

    def walk(p, b, doms):
        if p[0] == "H":
            if p[1] and any(d is None for d in doms):
                return False
            out.append(HoleInfo(p[1], b, tuple(doms) if p[1] else ()))
            return True
        kind = Kind(p[1])
        for pos, cp in enumerate(p[3]):
            if T.binds(kind, pos):
                dom = _materialize(g, p[3][0])
                if dom is not None and not T.is_closed(g, dom):
                    dom = None
                if not walk(cp, b + 1, doms + [dom]):
                    return False
            elif not walk(cp, b, doms):
                return False
        return True

    return tuple(out) if walk(pat, 0, []) else None


def _materialize(g: Hypergraph, pat: tuple) -> Optional[str]:
    """Node id of a hole-free pattern (already present by hash-consing)."""
    if pat[0] == "H":
        return None
    kids = []
    for cp in pat[3]:
        k = _materialize(g, cp)
        if k is None:
            return None
        kids.append(k)
    return g.add_node(Kind(pat[1]), pat[2], kids)


def _concrete(pat: tuple) -> tuple[int, int]:
    """(concrete node count, internal concrete node count)."""
    if pat[0] == "H":
        return 0, 0
    n, i = 1, 1 if pat[3] else 0
    for cp in pat[3]:
        a, b = _concrete(cp)
        n, i = n + a, i + b
    return n, i


_KW = {
    Kind.SUCC: "succ", Kind.LAMBDA: "lam", Kind.APP: "app", Kind.PI: "pi", Kind.SIGMA: "sigma",
    Kind.PAIR: "pair", Kind.PROJ1: "fst", Kind.PROJ2: "snd", Kind.ID: "Id", Kind.REFL: "refl",
    Kind.CONG: "cong", Kind.REC: "rec", Kind.AND: "and", Kind.IMPLIES: "implies", Kind.NOT: "not",
}


def pattern_text(pat: tuple) -> str:
    """Readable, deterministic serialisation (``?j`` holes, ``?j^`` higher order)."""
    counter = itertools.count()

    def go(p, b):
        if p[0] == "H":
            return f"?{next(counter)}" + ("^" if p[1] else "")
        kind = Kind(p[1])
        if kind is Kind.ZERO:
            return "zero"
        if kind is Kind.NAT:
            return "Nat"
        if kind is Kind.SORT:
            return "Type"
        if kind is Kind.VAR:
            return f"x{b - 1 - p[2]}"
        if kind in (Kind.DEFREF, Kind.ATOM):
            return str(p[2])
        if kind is Kind.AXIOM:
            return f"(axiom {p[2][0]})"
        parts = [_KW[kind]]
        for pos, cp in enumerate(p[3]):
            if T.binds(kind, pos):
                parts.append(f"[x{b}]")
                parts.append(go(cp, b + 1))
            else:
                parts.append(go(cp, b))
        return "(" + " ".join(parts) + ")"

    return go(pat, 0)


def _defrefs(g: Hypergraph, t: str) -> set[str]:
    return {g.nodes[n].payload for n in g.ancestors([t]) if g.nodes[n].kind is Kind.DEFREF}


def dependencies(g: Hypergraph, t: str) -> frozenset:
    """Definition names ``t`` depends on, transitively through bodies."""
    seen: set[str] = set()
    todo = sorted(_defrefs(g, t))
    while todo:
        name = todo.pop()
        if name in seen:
            continue
        seen.add(name)
        body = g.definitions.get(name)
        if body is not None:
            todo.extend(sorted(_defrefs(g, body) - seen))
    return frozenset(seen)


# -- rewriting ---------------------------------------------------------------

class _Rewriter:
    def __init__(self, g: Hypergraph, ab: Abstraction, name: str, pricing: Pricing, build: bool):
        self.g = g
        self.ab = ab
        self.name = name
        self.p = pricing
        self.build = build
        self.memo: dict = {}
        self.filler_ctx = T.sort(g)

    def match(self, pat, t, b, out) -> bool:
        if pat[0] == "H":
            if not pat[1] and any(i < b for i in T.free_vars(self.g, t)):
                return False
            out.append(t)
            return True
        node = self.g.nodes[t]
        if node.kind.value != pat[1] or node.payload != pat[2] or len(node.inputs) != len(pat[3]):
            return False
        for pos, (cp, c) in enumerate(zip(pat[3], node.inputs)):
            if not self.match(cp, c, b + 1 if T.binds(node.kind, pos) else b, out):
                return False
        return True

    def _arg(self, filler: str, hole: HoleInfo, ctx: tuple):
        """Rewritten argument for one hole: (node, cost, occurrences, type)."""
        g = self.g
        if hole.higher_order:
            inner = tuple(reversed(hole.domains)) + ctx
            node, cost, occ = self.run(filler, inner)
            wrapped = filler
            for d in reversed(hole.domains):
                wrapped = T.lam(g, d, wrapped)
                cost += self.p.internal(Kind.LAMBDA) + self.p.tree(d)
            ty = nf(g, infer(g, wrapped, ctx))
            if self.build:
                for d in reversed(hole.domains):
                    node = T.lam(g, d, node)
            return node, cost, occ, ty
        # first-order: the binders above the hole are never consulted
        inner = (self.filler_ctx,) * hole.depth + ctx
        node, cost, occ = self.run(filler, inner)
        ty = nf(g, infer(g, filler, inner))
        if self.build:
            node = T.shift(g, node, -hole.depth)
        return node, cost, occ, ty

    def try_here(self, t: str, ctx: tuple):
        fillers: list[str] = []
        if not self.match(self.ab.pattern, t, 0, fillers):
            return None
        args, cost, occ, types = [], self.p.app_chain(len(fillers), self.name), 1, []
        try:
            for f, hole in zip(fillers, self.ab.holes):
                node, c, o, ty = self._arg(f, hole, ctx)
                args.append(node)
                cost += c
                occ += o
                types.append(ty)
        except (KernelError, FuelExhausted):
            return None
        types = tuple(types)
        if self.ab.hole_types is None:
            if any(not T.is_closed(self.g, ty) for ty in types):
                return None
            self.ab.hole_types = types
        elif types != self.ab.hole_types:
            return None
        node = T.app(self.g, T.defref(self.g, self.name), *args) if self.build else None
        return node, cost, occ

    def run(self, t: str, ctx: tuple):
        key = (t, ctx)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res = self.try_here(t, ctx)
        if res is None:
            node = self.g.nodes[t]
            cost, occ, kids = self.p.node_cost(t), 0, []
            for pos, c in enumerate(node.inputs):
                cctx = (node.inputs[0],) + ctx if T.binds(node.kind, pos) else ctx
                kn, kc, ko = self.run(c, cctx)
                kids.append(kn)
                cost += kc
                occ += ko
            built = T.rebuild(self.g, t, tuple(kids)) if self.build else None
            res = (built, cost, occ)
        self.memo[key] = res
        return res


def _targets(c: Corpus, ab: Abstraction, skip: set):
    """Programs the abstraction may rewrite (never a definition it depends on)."""
    for label, t in c.programs():
        if label[0] == "def" and (label[1] in ab.refs or label[1] in skip):
            continue
        yield label, t


def simulate(c: Corpus, ab: Abstraction, name: str, model: CostModel = UNIT) -> tuple[float, int]:
    """Dry-run the greedy rewrite: (rewritten corpus cost excluding the body, occurrences)."""
    pricing = Pricing(c.graph, model)
    rw = _Rewriter(c.graph, ab, name, pricing, build=False)
    total, occ = 0.0, 0
    for label, t in c.programs():
        if label[0] == "def" and label[1] in ab.refs:
            total += pricing.tree(t)
            continue
        _, cost, o = rw.run(t, ())
        total += cost
        occ += o
    return total, occ


def _build_body(g: Hypergraph, ab: Abstraction) -> str:
    k = ab.arity
    counter = itertools.count()

    def go(p, b):
        if p[0] == "H":
            j = next(counter)
            h = T.var(g, k - 1 - j + b)
            if ab.holes[j].higher_order:
                return T.app(g, h, *(T.var(g, i) for i in range(b - 1, -1, -1)))
            return h
        kids = []
        for pos, cp in enumerate(p[3]):
            kids.append(go(cp, b + 1 if T.binds(Kind(p[1]), pos) else b))
        return g.add_node(Kind(p[1]), p[2], kids)

    body = go(ab.pattern, 0)
    for ty in reversed(ab.hole_types or ()):
        body = T.lam(g, ty, body)
    return body


def fresh_name(c: Corpus) -> str:
    i = len(c.abstractions) + 1
    while f"abs{i}" in c.graph.definitions:
        i += 1
    return f"abs{i}"


def evaluate(c: Corpus, ab: Abstraction, model: CostModel = UNIT, name: Optional[str] = None) -> Optional[Abstraction]:
    """Fix hole types, build the body and compute the utility by simulation."""
    g = c.graph
    ab = replace(ab, hole_types=None)
    name = name or fresh_name(c)
    pricing = Pricing(g, model)
    before = sum(pricing.tree(t) for _, t in c.programs())
    after, occ = simulate(c, ab, name, model)
    if ab.hole_types is None and ab.arity:
        return None
    if ab.hole_types is None:
        ab.hole_types = ()
    try:
        body = _build_body(g, ab)
        infer(g, body)
    except (KernelError, FuelExhausted):
        return None
    ab.body = body
    ab.cost = pricing.tree(body)
    ab.occurrences = occ
    ab.utility = before - ab.cost - after
    return ab


def utility(c: Corpus, ab: Abstraction, strategy: str = GREEDY, model: CostModel = UNIT) -> float:
    """Utility of ``ab`` against ``c``; nothing is committed."""
    if strategy != GREEDY:
        raise ValueError(f"unknown strategy {strategy!r}")
    ev = evaluate(c, ab, model, ab.name)
    if ev is None:
        raise KernelError("abstraction cannot be instantiated against this corpus")
    return ev.utility


def candidates(c: Corpus, max_size: int = 8, max_arity: int = 2,
               roots: Optional[list[str]] = None) -> list[Abstraction]:
    """Patterns occurring at least twice across the stored terms.

    Ordered by an occurrence-count estimate of the saving, then by text.
    """
    if max_size < 2 or max_arity < 0:
        raise ValueError("need max_size >= 2 and max_arity >= 0")
    g = c.graph
    progs = c.programs()
    if not progs:
        raise EmptyCorpus("corpus holds no terms")
    # tree occurrence counts: a shared subterm counts once per position
    occ = _tree_counts(g, [t for _, t in progs])
    allowed = None if roots is None else set(g.ancestors(roots))
    memo: dict = {}
    tally: dict[tuple, int] = {}
    for t in sorted(occ):
        if allowed is not None and t not in allowed:
            continue
        if not g.nodes[t].inputs or g.nodes[t].kind is Kind.OPAQUE:
            continue
        for pat, size, holes in _enumerate(g, t, 0, max_size, max_arity, memo):
            if pat[0] == "H" or size < 2:
                continue
            tally[pat] = tally.get(pat, 0) + occ[t]
    out = []
    p = Pricing(g)
    app = p.internal(Kind.APP)
    for pat, n in tally.items():
        if n < 2:
            continue
        holes = _holes(g, pat)
        if holes is None:
            continue
        _, internal = _concrete(pat)
        est = n * (internal - app * len(holes)) - internal
        out.append((-est, pattern_text(pat), pat, holes))
    out.sort(key=lambda r: (r[0], r[1]))
    return [Abstraction(pat, holes, text, refs=_pattern_refs(g, pat)) for _, text, pat, holes in out]


def _pattern_refs(g: Hypergraph, pat: tuple) -> frozenset:
    names: set[str] = set()

    def go(p):
        if p[0] == "H":
            return
        if p[1] == Kind.DEFREF.value:
            names.add(p[2])
        for cp in p[3]:
            go(cp)

    go(pat)
    deps = set(names)
    for n in names:
        body = g.definitions.get(n)
        if body is not None:
            deps |= dependencies(g, body)
    return frozenset(deps)


def _tree_counts(g: Hypergraph, roots: list[str]) -> dict[str, int]:
    """Number of tree positions at which each node occurs below ``roots``."""
    # post-order over the subterms only; the full graph can be far larger
    topo: list[str] = []
    seen: set[str] = set()
    for r in roots:
        stack = [(r, False)]
        while stack:
            n, done = stack.pop()
            if done:
                topo.append(n)
                continue
            if n in seen:
                continue
            seen.add(n)
            stack.append((n, True))
            stack.extend((ch, False) for ch in g.nodes[n].inputs)
    count = {n: 0 for n in topo}
    for r in roots:
        count[r] += 1
    for n in reversed(topo):
        for ch in g.nodes[n].inputs:
            count[ch] += count[n]
    return count


def mine(c: Corpus, max_size: int = 8, max_arity: int = 2, top_k: int = 5,
         model: CostModel = UNIT, roots: Optional[list[str]] = None,
         evaluate_limit: int = _MAX_CANDIDATES) -> list[Abstraction]:
    """Top ``top_k`` abstractions by simulated utility (ties by pattern text)."""
    scored = []
    name = fresh_name(c)
    for cand in candidates(c, max_size, max_arity, roots)[:max(evaluate_limit, top_k)]:
        ev = evaluate(c, cand, model, name)
        if ev is None or ev.occurrences < 2:
            continue
        scored.append(ev)
    scored.sort(key=lambda a: (-a.utility, a.text))
    return scored[:top_k]


def rewrite(c: Corpus, ab, strategy: str = GREEDY, model: CostModel = UNIT,
            check: str = "all", fuel: int = 20_000) -> RewriteOutcome:
    """Commit a rewrite of every stored term.

    With the greedy strategy ``ab`` is an adopted :class:`Abstraction`; with
    ``numeral-fold`` it is the name of a unary definition on numerals.
    """
    if strategy == NUMERAL_FOLD:
        return _fold_numerals(c, ab, model, fuel)
    if strategy != GREEDY:
        raise ValueError(f"unknown strategy {strategy!r}")
    if ab.name is None or ab.name not in c.graph.definitions:
        raise ValueError("abstraction must be adopted (defined) before rewriting")
    g = c.graph
    pricing = Pricing(g, model)
    before = corpus_cost(c, model)
    rw = _Rewriter(g, ab, ab.name, pricing, build=True)
    occurrences = 0
    changed = {}
    for label, t in _targets(c, ab, {ab.name}):
        new, _, occ = rw.run(t, ())
        occurrences += occ
        if new != t:
            changed[label] = (t, new)
    for label, (old, new) in changed.items():
        if check == "all":
            _preserved(g, old, new, fuel)
        g.add_edge(PROVENANCE_COLOR, (new,), (old,), EdgeClass.COMPUTATION)
        c.replace(label, new)
        if label[0] == "def":
            g.memo("step").pop(T.defref(g, label[1]), None)
            g.add_edge("delta", (T.defref(g, label[1]),), (new,), EdgeClass.COMPUTATION)
        elif label[0] == "proof":
            if not check_proof(g, new, label[1], fuel):
                raise SemanticDrift(f"rewritten proof of {label[1]} no longer checks")
    after = corpus_cost(c, model)
    return RewriteOutcome(before, after, occurrences, before - after, strategy, changed)


def _preserved(g: Hypergraph, old: str, new: str, fuel: int):
    try:
        a = normalize(g, old, fuel).node
        b = normalize(g, new, fuel).node
    except FuelExhausted as exc:
        raise SemanticDrift(f"could not confirm normal forms within fuel: {exc}") from None
    if a != b:
        raise SemanticDrift(f"normal form of {old} changed under rewriting")


def _fold_numerals(c: Corpus, name: str, model: CostModel, fuel: int) -> RewriteOutcome:
    """Replace closed numerals n by (name k) whenever that evaluates to n and is shorter."""
    from .kernel.syntax import length_of

    g = c.graph
    f = T.defref(g, name)
    before = corpus_cost(c, model)
    cache: dict[str, str] = {}
    count = 0

    def fold(t):
        nonlocal count
        if t in cache:
            return cache[t]
        v = T.numeral_value(g, t)
        if v is not None and v >= 2:
            out = t
            for k in range(v):
                cand = T.app(g, f, T.numeral(g, k))
                try:
                    if normalize(g, cand, fuel).node == t and length_of(g, cand) < length_of(g, out):
                        out = cand
                        count += 1
                        break
                except FuelExhausted:
                    continue
        else:
            node = g.nodes[t]
            out = T.rebuild(g, t, tuple(fold(ch) for ch in node.inputs))
        cache[t] = out
        return out

    changed = {}
    for label, t in c.programs():
        if label[0] == "def" and label[1] == name:
            continue
        new = fold(t)
        if new != t:
            _preserved(g, t, new, fuel)
            changed[label] = (t, new)
    for label, (old, new) in changed.items():
        g.add_edge(PROVENANCE_COLOR, (new,), (old,), EdgeClass.COMPUTATION)
        c.replace(label, new)
    after = corpus_cost(c, model)
    return RewriteOutcome(before, after, count, before - after, NUMERAL_FOLD, changed)


def adopt(c: Corpus, ab: Abstraction, round_no: int = 0, model: CostModel = UNIT) -> RewriteOutcome:
    """Define ``ab``, rewrite the corpus with it and tombstone dead nodes."""
    g = c.graph
    name = ab.name or fresh_name(c)
    ab = evaluate(c, ab, model, name)
    if ab is None:
        raise KernelError("abstraction cannot be instantiated against this corpus")
    ab.name = name
    old_roots = [t for _, t in c.programs()]
    before = corpus_cost(c, model)
    define(g, name, ab.body)
    out = rewrite(c, ab, GREEDY, model)
    out.cost_before = before
    out.utility = before - out.cost_after
    if out.utility != ab.utility:
        raise UtilityMismatch(f"simulated {ab.utility}, measured {out.utility}")
    dead = g.ancestors(old_roots) - c.live_nodes()
    if dead:
        g.tombstone(sorted(dead))
    c.abstractions.append({
        "name": name, "round": round_no, "utility": ab.utility, "occurrences": out.occurrences,
        "cost": ab.cost, "arity": ab.arity, "pattern": ab.text, "body": ab.body,
    })
    return out


@dataclass
class CompressResult:
    corpus: Corpus
    adopted: list[Abstraction]
    outcomes: list[RewriteOutcome]
    costs: list[float]


def compress(c: Corpus, rounds: int = 1, max_size: int = 8, max_arity: int = 2,
             model: CostModel = UNIT, top_k: int = 5) -> CompressResult:
    """Repeatedly adopt the best abstraction while its utility is positive."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    adopted, outcomes = [], []
    costs = [corpus_cost(c, model)]
    for r in range(rounds):
        try:
            best = mine(c, max_size, max_arity, top_k, model)
        except EmptyCorpus:
            break
        if not best or best[0].utility <= 0:
            break
        ab = best[0]
        out = adopt(c, ab, r, model)
        ab.name = c.abstractions[-1]["name"]
        adopted.append(ab)
        outcomes.append(out)
        costs.append(corpus_cost(c, model))
    return CompressResult(c, adopted, outcomes, costs)


def branching_factor(c: Corpus) -> int:
    """Building blocks available to one extension step: rules plus definitions."""
    fixed = sum(1 for r in KIND_RULES.values() if r.arity >= 0)
    return fixed + len(c.graph.definitions)
