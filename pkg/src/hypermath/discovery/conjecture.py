"""Conjecture generation over universally quantified equations of naturals.

Equations are kept as small expression trees alongside their kernel nodes:

    ("var", name) | ("zero",) | ("succ", e) | ("call", fname, (e, ...))
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Optional

from ..corpus import Corpus, EmptyCorpus
from ..kernel import terms as T
from ..kernel.reduce import FuelExhausted, normalize
from ..kernel.syntax import parse

Expr = tuple
VARS = ("a", "b", "c")
GROUND_MAX = 10


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for side in (self.lhs, self.rhs):
            for v in _vars(side):
                seen.setdefault(v, None)
        return list(seen)

    def canonical(self) -> "Equation":
        """Rename variables to a, b, c in order of first appearance."""
        ren = {v: VARS[i] for i, v in enumerate(self.variables())}
        return Equation(rename(self.lhs, ren), rename(self.rhs, ren))

    def text(self) -> str:
        body = f"(Id Nat {render(self.lhs)} {render(self.rhs)})"
        for v in reversed(self.variables()):
            body = f"(pi ({v} Nat) {body})"
        return body

    def to_json(self):
        return [self.lhs, self.rhs]


@dataclass
class Conjecture:
    proposition: str
    generator: str
    parents: tuple[str, ...]
    equation: Optional[Equation]
    text: str
    status: str = "open"

    _NEXT = {"open": {"proven", "refuted", "abandoned"}}

    def mark(self, status: str):
        if status not in self._NEXT.get(self.status, ()):
            raise ValueError(f"cannot move a {self.status} conjecture to {status}")
        self.status = status


def _vars(e: Expr) -> Iterable[str]:
    if e[0] == "var":
        yield e[1]
    elif e[0] == "succ":
        yield from _vars(e[1])
    elif e[0] == "call":
        for a in e[2]:
            yield from _vars(a)


def rename(e: Expr, ren: dict) -> Expr:
    if e[0] == "var":
        return ("var", ren.get(e[1], e[1]))
    if e[0] == "succ":
        return ("succ", rename(e[1], ren))
    if e[0] == "call":
        return ("call", e[1], tuple(rename(a, ren) for a in e[2]))
    return e


def numeral(k: int) -> Expr:
    e: Expr = ("zero",)
    for _ in range(k):
        e = ("succ", e)
    return e


def value(e: Expr) -> Optional[int]:
    k = 0
    while e[0] == "succ":
        k += 1
        e = e[1]
    return k if e[0] == "zero" else None


def render(e: Expr) -> str:
    v = value(e)
    if v is not None:
        return str(v)
    if e[0] == "var":
        return e[1]
    if e[0] == "succ":
        return f"(succ {render(e[1])})"
    return "(" + " ".join([e[1]] + [render(a) for a in e[2]]) + ")"


def size(e: Expr) -> int:
    if e[0] in ("var", "zero"):
        return 0
    if e[0] == "succ":
        return 1 + size(e[1])
    return 1 + sum(size(a) for a in e[2])


def substitute(e: Expr, env: dict) -> Expr:
    if e[0] == "var":
        return env.get(e[1], e)
    if e[0] == "succ":
        return ("succ", substitute(e[1], env))
    if e[0] == "call":
        return ("call", e[1], tuple(substitute(a, env) for a in e[2]))
    return e


def equation_node(c: Corpus, eq: Equation) -> str:
    return parse(c.graph, eq.text())


def ground_term(c: Corpus, e: Expr) -> str:
    """Kernel node for a variable-free expression."""
    g = c.graph
    if e[0] == "zero":
        return T.zero(g)
    if e[0] == "succ":
        return T.succ(g, ground_term(c, e[1]))
    if e[0] == "call":
        return T.app(g, T.defref(g, e[1]), *(ground_term(c, a) for a in e[2]))
    raise ValueError(f"free variable {e[1]!r} in a ground expression")


def ground_value(c: Corpus, e: Expr, env: dict[str, int], fuel: int = 20_000) -> Optional[int]:
    """Evaluate a closed instance with the kernel."""
    closed = substitute(e, {k: numeral(v) for k, v in env.items()})
    memo = c.graph.memo("ground")
    if closed in memo:
        return memo[closed]
    try:
        nf = normalize(c.graph, ground_term(c, closed), fuel).node
        out = T.numeral_value(c.graph, nf)
    except FuelExhausted:
        out = None
    memo[closed] = out
    return out


def holds_on_instances(c: Corpus, eq: Equation, upto: int = GROUND_MAX, limit: int = 400) -> Optional[dict]:
    """None when every instance in 0..upto agrees, otherwise a counterexample."""
    vs = eq.variables()
    combos = sorted(itertools.product(range(upto + 1), repeat=len(vs)), key=lambda t: (sum(t), t))
    for inst in combos[:limit]:
        env = dict(zip(vs, inst))
        lv, rv = ground_value(c, eq.lhs, env), ground_value(c, eq.rhs, env)
        if lv is None or rv is None or lv != rv:
            return {"instance": env, "lhs": lv, "rhs": rv}
    return None


# -- generators ----------------------------------------------------------------

def _binary(c: Corpus) -> list[str]:
    return [n for n in sorted(c.definitions) if c.info.get("def:" + n, {}).get("arity") == 2]


def _unary(c: Corpus) -> list[str]:
    return [n for n in sorted(c.definitions) if c.info.get("def:" + n, {}).get("arity") == 1]


def swap_arguments(e: Expr) -> Expr:
    if e[0] == "succ":
        return ("succ", swap_arguments(e[1]))
    if e[0] == "call":
        args = tuple(swap_arguments(a) for a in e[2])
        return ("call", e[1], tuple(reversed(args)) if len(args) == 2 else args)
    return e


def shift_succ(e: Expr) -> Optional[Expr]:
    """f(x, S y) -> f(S x, y) at the outermost binary call that allows it."""
    if e[0] == "call" and len(e[2]) == 2 and e[2][1][0] == "succ":
        x, y = e[2]
        return ("call", e[1], (("succ", x), y[1]))
    if e[0] == "succ":
        inner = shift_succ(e[1])
        return None if inner is None else ("succ", inner)
    return None


def reversals(c: Corpus, facts: list[tuple[str, Equation]]) -> list[tuple[Equation, str, tuple]]:
    out = []
    for prop, eq in facts:
        out.append((Equation(swap_arguments(eq.lhs), swap_arguments(eq.rhs)).canonical(), "reverse", (prop,)))
        moved = shift_succ(eq.lhs)
        if moved is not None:
            out.append((Equation(moved, eq.rhs).canonical(), "reverse", (prop,)))
    return out


def _constants(e: Expr, path=()) -> list[tuple]:
    if value(e) is not None:
        return [path]
    out = []
    if e[0] == "succ":
        out += _constants(e[1], path + (0,))
    elif e[0] == "call":
        for i, a in enumerate(e[2]):
            out += _constants(a, path + (i,))
    return out


def _replace_at(e: Expr, path: tuple, new: Expr) -> Expr:
    if not path:
        return new
    if e[0] == "succ":
        return ("succ", _replace_at(e[1], path[1:], new))
    args = list(e[2])
    args[path[0]] = _replace_at(args[path[0]], path[1:], new)
    return ("call", e[1], tuple(args))


def specializations(c: Corpus, facts: list[tuple[str, Equation]]) -> list[tuple[Equation, str, tuple]]:
    out = []
    for prop, eq in facts:
        for v in eq.variables():
            for k in (0, 1):
                env = {v: numeral(k)}
                out.append((Equation(substitute(eq.lhs, env), substitute(eq.rhs, env)).canonical(),
                            "specialize", (prop,)))
        fresh = next(x for x in ("n", "m", "p", "q") if x not in eq.variables())
        for side in ("lhs", "rhs"):
            e = getattr(eq, side)
            for path in _constants(e):
                if not path:
                    continue
                g = _replace_at(e, path, ("var", fresh))
                new = Equation(g, eq.rhs) if side == "lhs" else Equation(eq.lhs, g)
                out.append((new.canonical(), "generalize", (prop,)))
    return out


def compositions(c: Corpus, facts: list[tuple[str, Equation]]) -> list[tuple[Equation, str, tuple]]:
    """Feed S or a unary definition into one variable of a proven fact."""
    out = []
    wraps = [lambda x: ("succ", x)] + [lambda x, f=f: ("call", f, (x,)) for f in _unary(c)]
    for prop, eq in facts:
        for v in eq.variables():
            for wrap in wraps:
                env = {v: wrap(("var", v))}
                out.append((Equation(substitute(eq.lhs, env), substitute(eq.rhs, env)).canonical(),
                            "compose", (prop,)))
    return out


def expression_pool(c: Corpus, max_size: int = 2) -> list[Expr]:
    """Compositions of S and the defined functions over a, b and 0."""
    layers = [[("var", "a"), ("var", "b"), ("zero",)]]
    unary, binary = _unary(c), _binary(c)
    for _ in range(max_size):
        prev = [e for layer in layers for e in layer]
        top = layers[-1]
        new = []
        for e in top:
            new.append(("succ", e))
            for f in unary:
                new.append(("call", f, (e,)))
        for f in binary:
            for x in prev:
                for y in prev:
                    if x in top or y in top:
                        if size(x) + size(y) + 1 <= len(layers):
                            new.append(("call", f, (x, y)))
        layers.append(new)
    seen: dict[Expr, None] = {}
    for layer in layers:
        for e in layer:
            if size(e) <= max_size:
                seen.setdefault(e, None)
    return list(seen)


def _fingerprint(c: Corpus, e: Expr, grid: int) -> Optional[tuple]:
    vals = []
    for a in range(grid):
        for b in range(grid):
            v = ground_value(c, e, {"a": a, "b": b})
            if v is None:
                return None
            vals.append(v)
    return tuple(vals)


def inductive_generalizations(c: Corpus, scratch: dict, upto: int = GROUND_MAX) -> list[tuple[Equation, str, tuple]]:
    """Pairs of composed expressions that agree on every ground instance tried."""
    key = ("inductive", tuple(_unary(c)), tuple(_binary(c)), upto)
    hit = scratch.get(key)
    if hit is not None:
        return hit
    pool = expression_pool(c)
    groups: dict[tuple, list[Expr]] = {}
    for e in pool:
        fp = _fingerprint(c, e, 4)
        if fp is not None:
            groups.setdefault(fp, []).append(e)
    out = []
    for fp in sorted(groups):
        members = sorted(groups[fp], key=lambda e: (-size(e), render(e)))
        for lhs, rhs in itertools.combinations(members, 2):
            if size(lhs) == 0:
                continue
            eq = Equation(lhs, rhs).canonical()
            if holds_on_instances(c, eq, upto) is None:
                out.append((eq, "inductive-generalization", ()))
    scratch[key] = out
    return out


def equational_facts(c: Corpus) -> list[tuple[str, Equation]]:
    out = []
    for prop in c.proven:
        eq = c.info.get(prop, {}).get("equation")
        if eq is not None:
            out.append((prop, Equation(_tuplify(eq[0]), _tuplify(eq[1]))))
    return out


def _tuplify(x):
    if isinstance(x, (list, tuple)):
        return tuple(_tuplify(y) for y in x)
    return x


def generate_conjectures(c: Corpus, n: int, rng: random.Random, scratch: Optional[dict] = None,
                         closed: Iterable[str] = ()) -> list[Conjecture]:
    """Up to ``n`` open conjectures in seeded random order.

    ``closed`` lists propositions already settled (proven, refuted or
    abandoned); they are never proposed again.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not c.definitions and not c.proven:
        raise EmptyCorpus("nothing to generalize from")
    scratch = {} if scratch is None else scratch
    facts = equational_facts(c)
    raw = (reversals(c, facts) + specializations(c, facts) + compositions(c, facts)
           + inductive_generalizations(c, scratch))
    raw = [r for r in raw if r[0].lhs != r[0].rhs]
    rng.shuffle(raw)
    done = set(closed) | set(c.proven)
    seen: set[str] = set()
    out: list[Conjecture] = []
    for eq, gen, parents in raw:
        if len(out) >= n:
            break
        prop = equation_node(c, eq)
        if prop in done or prop in seen:
            continue
        seen.add(prop)
        out.append(Conjecture(prop, gen, parents, eq, eq.text()))
    return out
