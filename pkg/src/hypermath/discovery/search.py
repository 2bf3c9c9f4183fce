"""Bounded proof search over the corpus graph.

Budgets count expanded goals (backward) or produced facts (forward), never
wall-clock time, so every search is reproducible.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..corpus import Corpus
from ..hypergraph import Hypergraph, Kind
from ..kernel import terms as T
from ..kernel.reduce import FuelExhausted
from ..kernel.typing import DEFAULT_FUEL, KernelError, _canon, check_proof, infer, nf

TACTICS = ("known", "assumption", "refl", "intro", "cong", "lemma", "mp", "induction", "and-intro")
MAX_DEPTH = 8
REFUTE_MAX = 16
LINEAR_RULES = ("and-left", "and-right", "not")


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    max_depth: int = 0
    outcome: str = "exhausted"  # found | exhausted | timeout

    @property
    def effective_branching(self) -> float:
        if self.max_depth < 1 or self.nodes_expanded < 1:
            return 1.0
        return max(1.0, self.nodes_expanded ** (1.0 / self.max_depth))

    def to_json(self) -> dict:
        return {"nodesExpanded": self.nodes_expanded, "maxDepth": self.max_depth,
                "effectiveBranching": round(self.effective_branching, 6), "outcome": self.outcome}


@dataclass
class SearchResult:
    proof: Optional[str]
    stats: SearchStats
    # deduction steps in the proof, ignoring binder introductions and leaves
    steps: Optional[int] = None
    counterexample: Optional[dict] = None
    # closed subgoals settled along the way, kept when the goal itself fails
    partial: list[tuple[str, str]] = field(default_factory=list)
    tactics: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.proof is not None


class _OutOfBudget(Exception):
    pass


def _same(g: Hypergraph, a: str, b: str, fuel: int) -> bool:
    if a == b:
        return True
    try:
        na, nb = nf(g, a, fuel), nf(g, b, fuel)
    except FuelExhausted:
        return False
    return na == nb or _canon(g, na) == _canon(g, nb)


def _nf_or_self(g: Hypergraph, t: str, fuel: int) -> str:
    try:
        return nf(g, t, fuel)
    except FuelExhausted:
        return t


def universal_equation(g: Hypergraph, prop: str) -> Optional[tuple[int, str, str]]:
    """(binder count, lhs, rhs) for props of the form Π(x:ℕ)… Id ℕ lhs rhs."""
    n, t = 0, prop
    nat = T.nat(g)
    while g.nodes[t].kind is Kind.PI and g.nodes[t].inputs[0] == nat:
        t = g.nodes[t].inputs[1]
        n += 1
    node = g.nodes[t]
    if node.kind is not Kind.ID or node.inputs[0] != nat:
        return None
    return n, node.inputs[1], node.inputs[2]


def _match(g: Hypergraph, pat: str, t: str, n: int, env: dict[int, str]) -> bool:
    pn = g.nodes[pat]
    if pn.kind is Kind.VAR and pn.payload < n:
        bound = env.get(pn.payload)
        if bound is None:
            env[pn.payload] = t
            return True
        return bound == t
    tn = g.nodes[t]
    if pn.kind is not tn.kind or pn.payload != tn.payload or len(pn.inputs) != len(tn.inputs):
        return False
    if pn.kind is Kind.VAR:
        return False
    return all(_match(g, p, s, n, env) for p, s in zip(pn.inputs, tn.inputs))


def _implication(g: Hypergraph, prop: str) -> Optional[tuple[str, str]]:
    node = g.nodes[prop]
    if node.kind is Kind.IMPLIES:
        return node.inputs
    if node.kind is Kind.PI and 0 not in T.free_vars(g, node.inputs[1]) and node.inputs[0] != T.nat(g):
        return node.inputs[0], T.shift(g, node.inputs[1], -1)
    return None


class BackwardProver:
    """Goal-directed search by iterative deepening over a fixed tactic list."""

    def __init__(self, c: Corpus, budget: int, order: Iterable[str] = TACTICS,
                 fuel: int = DEFAULT_FUEL):
        self.c, self.g, self.budget, self.fuel = c, c.graph, budget, fuel
        self.order = tuple(order)
        self.expanded = 0
        self.deepest = 0
        self.known: dict[str, str] = {}
        self.known_nf: dict[str, str] = {}
        self.lemmas: list[tuple[int, str, str, str]] = []
        self.implications: list[tuple[str, str, str]] = []
        self.solved: dict[tuple, tuple[str, int, tuple]] = {}
        self.failed: dict[tuple, int] = {}
        for prop, proofs in c.proven.items():
            if proofs:
                self.add_fact(prop, proofs[-1])

    def add_fact(self, prop: str, proof: str):
        if prop in self.known:
            return
        g = self.g
        self.known[prop] = proof
        self.known_nf.setdefault(_nf_or_self(g, prop, self.fuel), proof)
        eq = universal_equation(g, prop)
        if eq is not None and eq[0] > 0:
            self.lemmas.append((eq[0], eq[1], eq[2], proof))
        imp = _implication(g, prop)
        if imp is not None:
            self.implications.append((imp[0], imp[1], proof))
        # a new fact can close goals that failed before
        self.failed.clear()

    # -- driver ----------------------------------------------------------

    def prove(self, goal: str, max_depth: int = MAX_DEPTH) -> SearchResult:
        stats = SearchStats()
        for d in range(1, max_depth + 1):
            try:
                hit = self.solve(goal, (), d, 1)
            except _OutOfBudget:
                stats.outcome = "timeout"
                break
            if hit is not None:
                proof, steps, used = hit
                if check_proof(self.g, proof, goal, self.fuel):
                    stats.outcome = "found"
                    stats.nodes_expanded, stats.max_depth = self.expanded, self.deepest
                    return SearchResult(proof, stats, steps, tactics=list(used))
                break
        stats.nodes_expanded, stats.max_depth = self.expanded, self.deepest
        return SearchResult(None, stats, partial=self.partial())

    def partial(self) -> list[tuple[str, str]]:
        return sorted((k[0], v[0]) for k, v in self.solved.items()
                      if not k[1] and k[0] not in self.known and v[1] > 0)

    def solve(self, goal: str, ctx: tuple, remaining: int, level: int):
        if remaining <= 0:
            return None
        key = (goal, ctx)
        hit = self.solved.get(key)
        if hit is not None:
            return hit
        if self.failed.get(key, 0) >= remaining:
            return None
        self.expanded += 1
        if self.expanded > self.budget:
            raise _OutOfBudget
        self.deepest = max(self.deepest, level)
        for name in self.order:
            try:
                out = getattr(self, "_t_" + name.replace("-", "_"))(goal, ctx, remaining, level)
            except (KernelError, FuelExhausted):
                out = None
            if out is not None:
                proof, steps, used = out
                out = (proof, steps, (name,) + used)
                self.solved[key] = out
                return out
        self.failed[key] = remaining
        return None

    def _sub(self, goal, ctx, remaining, level):
        return self.solve(goal, ctx, remaining - 1, level + 1)

    def _shape(self, goal: str):
        node = self.g.nodes[goal]
        if node.kind in (Kind.PI, Kind.IMPLIES, Kind.AND, Kind.ID):
            return node
        return self.g.nodes[_nf_or_self(self.g, goal, self.fuel)]

    # -- tactics; each returns (proof, deduction steps, tactic trace) -----

    def _t_known(self, goal, ctx, remaining, level):
        if not T.is_closed(self.g, goal):
            return None
        p = self.known.get(goal)
        if p is None:
            p = self.known_nf.get(_nf_or_self(self.g, goal, self.fuel))
        return None if p is None else (p, 0, ())

    def _t_assumption(self, goal, ctx, remaining, level):
        g = self.g
        for i, ty in enumerate(ctx):
            if _same(g, T.shift(g, ty, i + 1), goal, self.fuel):
                return T.var(g, i), 0, ()
        return None

    def _t_refl(self, goal, ctx, remaining, level):
        node = self._shape(goal)
        if node.kind is not Kind.ID:
            return None
        _, a, b = node.inputs
        if _same(self.g, a, b, self.fuel):
            return T.refl(self.g, a), 1, ()
        return None

    def _t_intro(self, goal, ctx, remaining, level):
        g = self.g
        node = self._shape(goal)
        if node.kind is Kind.PI:
            dom, cod = node.inputs
        elif node.kind is Kind.IMPLIES:
            dom, cod = node.inputs[0], T.shift(g, node.inputs[1], 1)
        else:
            return None
        sub = self._sub(cod, (dom,) + ctx, remaining, level)
        if sub is None:
            return None
        return T.lam(g, dom, sub[0]), sub[1], sub[2]

    def _t_induction(self, goal, ctx, remaining, level):
        g = self.g
        node = self._shape(goal)
        if node.kind is not Kind.PI or _nf_or_self(g, node.inputs[0], self.fuel) != T.nat(g):
            return None
        dom, cod = node.inputs
        if 0 not in T.free_vars(g, cod) or universal_equation(g, cod) is None:
            return None
        base_goal = T.instantiate(g, cod, T.zero(g))
        concl = T.instantiate(g, T.shift(g, cod, 2, 1), T.succ(g, T.var(g, 1)))
        step_goal = T.pi(g, T.nat(g), T.pi(g, cod, concl))
        base = self._sub(base_goal, ctx, remaining, level)
        if base is None:
            return None
        step = self._sub(step_goal, ctx, remaining, level)
        if step is None:
            return None
        motive = T.lam(g, T.nat(g), cod)
        body = T.rec(g, T.shift(g, motive, 1), T.shift(g, base[0], 1), T.shift(g, step[0], 1), T.var(g, 0))
        return T.lam(g, dom, body), 1 + base[1] + step[1], base[2] + step[2]

    def _t_cong(self, goal, ctx, remaining, level):
        g = self.g
        node = self._shape(goal)
        if node.kind is not Kind.ID:
            return None
        ty, a, b = node.inputs
        if g.nodes[a].kind is not Kind.SUCC or g.nodes[b].kind is not Kind.SUCC:
            a, b = _nf_or_self(g, a, self.fuel), _nf_or_self(g, b, self.fuel)
            if g.nodes[a].kind is not Kind.SUCC or g.nodes[b].kind is not Kind.SUCC:
                return None
        sub = self._sub(T.ident(g, ty, g.nodes[a].inputs[0], g.nodes[b].inputs[0]), ctx, remaining, level)
        if sub is None:
            return None
        return T.cong(g, sub[0]), 1 + sub[1], sub[2]

    def _t_lemma(self, goal, ctx, remaining, level):
        g = self.g
        node = self._shape(goal)
        if node.kind is not Kind.ID or node.inputs[0] != T.nat(g):
            return None
        _, a, b = node.inputs
        for n, lhs, rhs, proof in self.lemmas:
            env: dict[int, str] = {}
            if _match(g, lhs, a, n, env) and _match(g, rhs, b, n, env) and len(env) == n:
                args = [env[n - 1 - j] for j in range(n)]
                return T.app(g, proof, *args), 1, ()
        return None

    def _t_mp(self, goal, ctx, remaining, level):
        g = self.g
        options = list(self.implications)
        for i, ty in enumerate(ctx):
            imp = _implication(g, T.shift(g, ty, i + 1))
            if imp is not None:
                options.append((imp[0], imp[1], T.var(g, i)))
        for a, b, f in options:
            if _same(g, b, goal, self.fuel):
                sub = self._sub(a, ctx, remaining, level)
                if sub is not None:
                    return T.app(g, f, sub[0]), 1 + sub[1], sub[2]
        return None

    def _t_and_intro(self, goal, ctx, remaining, level):
        node = self._shape(goal)
        if node.kind is not Kind.AND:
            return None
        left = self._sub(node.inputs[0], ctx, remaining, level)
        if left is None:
            return None
        right = self._sub(node.inputs[1], ctx, remaining, level)
        if right is None:
            return None
        return T.pair(self.g, left[0], right[0]), 1 + left[1] + right[1], left[2] + right[2]


def refute(c: Corpus, goal: str, upto: int = REFUTE_MAX, limit: int = 400,
           fuel: int = 20_000) -> Optional[dict]:
    """A ground instance in 0..upto on which the two sides differ, if any."""
    g = c.graph
    eq = universal_equation(g, goal)
    if eq is None:
        return None
    n, lhs, rhs = eq
    combos = sorted(itertools.product(range(upto + 1), repeat=n), key=lambda t: (sum(t), t))
    for inst in combos[:limit]:
        sides = []
        for side in (lhs, rhs):
            t = side
            for v in reversed(inst):
                t = T.instantiate(g, t, T.numeral(g, v))
            try:
                sides.append(T.numeral_value(g, nf(g, t, fuel)))
            except FuelExhausted:
                sides.append(None)
        if None not in sides and sides[0] != sides[1]:
            return {"instance": list(inst), "lhs": sides[0], "rhs": sides[1]}
    return None


def prove_backward(c: Corpus, goal: str, budget: int, order: Iterable[str] = TACTICS,
                   max_depth: int = MAX_DEPTH, fuel: int = DEFAULT_FUEL) -> SearchResult:
    res = BackwardProver(c, budget, order, fuel).prove(goal, max_depth)
    if not res:
        res.counterexample = refute(c, goal)
    return res


# -- forward chaining ------------------------------------------------------------

class ForwardChainer:
    """Saturates facts layer by layer; every produced fact carries its proof."""

    def __init__(self, c: Corpus, goal: str, fuel: int = DEFAULT_FUEL):
        self.c, self.g, self.goal, self.fuel = c, c.graph, goal, fuel
        self.goal_nf = _nf_or_self(self.g, goal, fuel)
        self.facts: dict[str, str] = {}
        for prop, proofs in c.proven.items():
            if proofs:
                self.facts[prop] = proofs[-1]
        self.expanded = 0
        self.layers = 0
        self.found: Optional[str] = self.facts.get(goal)
        self.wants_pairs = any(self.g.nodes[n].kind is Kind.AND for n in self.g.ancestors([goal]))
        self.terms = self._goal_terms()

    def _goal_terms(self) -> list[str]:
        """Closed ℕ-valued subterms of the goal, outermost first."""
        g, out, seen = self.g, [], set()
        stack = [self.goal]
        nat = T.nat(g)
        while stack:
            t = stack.pop(0)
            if t in seen:
                continue
            seen.add(t)
            if T.is_closed(g, t) and g.nodes[t].kind not in (Kind.NAT, Kind.SORT):
                try:
                    if nf(g, infer(g, t, (), self.fuel), self.fuel) == nat:
                        out.append(t)
                except (KernelError, FuelExhausted):
                    pass
            stack.extend(g.nodes[t].inputs)
        return out

    def _emit(self, prop: str, proof: str, budget: int) -> bool:
        if self.expanded >= budget:
            raise _OutOfBudget
        if prop in self.facts:
            return False
        self.expanded += 1
        self.facts[prop] = proof
        if prop == self.goal or _same(self.g, prop, self.goal, self.fuel):
            if check_proof(self.g, proof, self.goal, self.fuel):
                self.found = proof
                return True
        return False

    def layer(self, budget: int) -> list[tuple[str, str]]:
        """One round of every forward rule over the current facts."""
        g = self.g
        before = dict(self.facts)
        nat = T.nat(g)
        produced: list[tuple[str, str]] = []

        def emit(prop, proof):
            fresh = prop not in self.facts
            hit = self._emit(prop, proof, budget)
            if fresh:
                produced.append((prop, proof))
            return hit

        if self.layers == 0:
            for t in self.terms:
                if emit(T.ident(g, nat, t, t), T.refl(g, t)):
                    return produced
        self.layers += 1
        facts = sorted(before.items())
        for prop, proof in facts:
            node = g.nodes[prop]
            if node.kind is Kind.ID and node.inputs[0] == nat:
                _, a, b = node.inputs
                if emit(T.ident(g, nat, T.succ(g, a), T.succ(g, b)), T.cong(g, proof)):
                    return produced
            if node.kind is Kind.AND:
                if emit(node.inputs[0], T.proj1(g, proof)) or emit(node.inputs[1], T.proj2(g, proof)):
                    return produced
            if node.kind is Kind.PI and node.inputs[0] == nat:
                for t in self.terms:
                    if emit(T.instantiate(g, node.inputs[1], t), T.app(g, proof, t)):
                        return produced
            imp = _implication(g, prop)
            if imp is not None and imp[0] in before:
                if emit(imp[1], T.app(g, proof, before[imp[0]])):
                    return produced
        if self.wants_pairs:
            for (pa, xa), (pb, xb) in itertools.product(facts, repeat=2):
                if emit(T.conj(g, pa, pb), T.pair(g, xa, xb)):
                    return produced
        return produced


def prove_forward(c: Corpus, goal: str, budget: int, max_layers: int = MAX_DEPTH,
                  fuel: int = DEFAULT_FUEL) -> SearchResult:
    fw = ForwardChainer(c, goal, fuel)
    stats = SearchStats()
    if fw.found is not None:
        stats.outcome = "found"
        return SearchResult(fw.found, stats, 0)
    try:
        for _ in range(max_layers):
            new = fw.layer(budget)
            stats.max_depth = fw.layers
            if fw.found is not None or not new:
                break
    except _OutOfBudget:
        stats.outcome = "timeout"
    stats.nodes_expanded = fw.expanded
    if fw.found is not None:
        stats.outcome = "found"
        return SearchResult(fw.found, stats, stats.max_depth)
    return SearchResult(None, stats)


def prove_bidirectional(c: Corpus, goal: str, budget: int, order: Iterable[str] = TACTICS,
                        max_depth: int = MAX_DEPTH, fuel: int = DEFAULT_FUEL) -> SearchResult:
    """Alternate one forward layer with one deepening round of backward search.

    Facts produced forward are handed to the backward prover, so a backward
    subgoal that the forward side already reached closes immediately.
    """
    fw = ForwardChainer(c, goal, fuel)
    stats = SearchStats()
    if fw.found is not None:
        stats.outcome = "found"
        return SearchResult(fw.found, stats, 0)
    bw = BackwardProver(c, budget, order, fuel)
    forward_share = max(1, budget // (4 * max_depth))
    forward_open = True
    for d in range(1, max_depth + 1):
        spent = fw.expanded + bw.expanded
        if forward_open:
            try:
                new = fw.layer(fw.expanded + min(forward_share, budget - spent))
            except _OutOfBudget:
                new = []
            forward_open = bool(new)
            if fw.found is not None:
                stats.outcome = "found"
                stats.nodes_expanded = fw.expanded + bw.expanded
                stats.max_depth = max(d, bw.deepest)
                return SearchResult(fw.found, stats, fw.layers)
            for prop, proof in new:
                if T.is_closed(c.graph, prop):
                    bw.add_fact(prop, proof)
        bw.budget = budget - fw.expanded
        try:
            hit = bw.solve(goal, (), d, 1)
        except _OutOfBudget:
            stats.outcome = "timeout"
            break
        if hit is not None:
            proof, steps, used = hit
            stats.nodes_expanded = fw.expanded + bw.expanded
            stats.max_depth = bw.deepest
            if check_proof(c.graph, proof, goal, fuel):
                stats.outcome = "found"
                return SearchResult(proof, stats, steps, tactics=list(used))
            break
    stats.nodes_expanded = fw.expanded + bw.expanded
    stats.max_depth = max(bw.deepest, fw.layers)
    res = SearchResult(None, stats, partial=bw.partial())
    res.counterexample = refute(c, goal)
    return res


# -- linearized deductions -------------------------------------------------------

@dataclass
class LinearizedResult:
    counts: list[int]
    found: list[tuple[tuple[str, str], ...]]
    bound: int


def library_facts(library) -> list[str]:
    if isinstance(library, Hypergraph):
        return sorted(n for n, node in library.nodes.items()
                      if node.kind in (Kind.ATOM, Kind.AND, Kind.IMPLIES, Kind.NOT))
    return sorted(library)


def enumerate_linearized(c: Corpus, goal: Optional[str], library, depth: int,
                         seed: Optional[str] = None) -> LinearizedResult:
    """Every chain s_{i+1} = rule(s_i, g) with g drawn from the fixed library.

    The count at depth ``d`` is the number of rule sequences, so it is exactly
    (2|G| + 1)^d for the three rules used here.
    """
    g = c.graph
    lib = library_facts(library)
    for f in lib:
        if f not in g.nodes:
            raise ValueError("library must be part of the corpus graph")
    if seed is None:
        if not lib:
            raise ValueError("empty library needs an explicit seed statement")
        seed = lib[0]
    frontier: list[tuple[str, tuple]] = [(seed, ())]
    counts = [1]
    found = [()] if seed == goal else []
    for _ in range(depth):
        nxt = []
        for s, chain in frontier:
            for rule in LINEAR_RULES:
                inputs = lib if rule != "not" else (None,)
                for f in inputs:
                    if rule == "and-left":
                        t = T.conj(g, s, f)
                    elif rule == "and-right":
                        t = T.conj(g, f, s)
                    else:
                        t = T.neg(g, s)
                    link = chain + ((rule, f or ""),)
                    nxt.append((t, link))
                    if t == goal:
                        found.append(link)
        frontier = nxt
        counts.append(len(frontier))
    return LinearizedResult(counts, found, linear_ratio_bound(len(lib)))


def linear_ratio_bound(library_size: int, max_arity: int = 2) -> int:
    return len(LINEAR_RULES) * library_size ** (max_arity - 1)
