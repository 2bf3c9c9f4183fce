"""Term construction helpers over the hypergraph (nameless variables).

Binders: ``Lambda(dom, body)``, ``PiForm(dom, cod)`` and ``SigmaForm(dom, cod)``
bind variable 0 inside their second input.
"""
from __future__ import annotations

from ..hypergraph import Hypergraph, Kind

BINDER_KINDS = frozenset({Kind.LAMBDA, Kind.PI, Kind.SIGMA})


def binds(kind: Kind, position: int) -> bool:
    return kind in BINDER_KINDS and position == 1


# -- smart constructors ----------------------------------------------------

def sort(g: Hypergraph) -> str:
    return g.add_node(Kind.SORT)


def nat(g: Hypergraph) -> str:
    return g.add_node(Kind.NAT)


def zero(g: Hypergraph) -> str:
    return g.add_node(Kind.ZERO)


def succ(g: Hypergraph, n: str) -> str:
    return g.add_node(Kind.SUCC, None, (n,))


def numeral(g: Hypergraph, k: int) -> str:
    n = zero(g)
    for _ in range(k):
        n = succ(g, n)
    return n


def var(g: Hypergraph, i: int) -> str:
    return g.add_node(Kind.VAR, i)


def lam(g: Hypergraph, dom: str, body: str) -> str:
    return g.add_node(Kind.LAMBDA, None, (dom, body))


def app(g: Hypergraph, f: str, *args: str) -> str:
    for a in args:
        f = g.add_node(Kind.APP, None, (f, a))
    return f


def pi(g: Hypergraph, dom: str, cod: str) -> str:
    return g.add_node(Kind.PI, None, (dom, cod))


def sigma(g: Hypergraph, dom: str, cod: str) -> str:
    return g.add_node(Kind.SIGMA, None, (dom, cod))


def pair(g: Hypergraph, a: str, b: str) -> str:
    return g.add_node(Kind.PAIR, None, (a, b))


def proj1(g: Hypergraph, p: str) -> str:
    return g.add_node(Kind.PROJ1, None, (p,))


def proj2(g: Hypergraph, p: str) -> str:
    return g.add_node(Kind.PROJ2, None, (p,))


def ident(g: Hypergraph, ty: str, a: str, b: str) -> str:
    return g.add_node(Kind.ID, None, (ty, a, b))


def refl(g: Hypergraph, a: str) -> str:
    return g.add_node(Kind.REFL, None, (a,))


def cong(g: Hypergraph, p: str) -> str:
    return g.add_node(Kind.CONG, None, (p,))


def rec(g: Hypergraph, motive: str, base: str, step: str, target: str) -> str:
    return g.add_node(Kind.REC, None, (motive, base, step, target))


def defref(g: Hypergraph, name: str) -> str:
    return g.add_node(Kind.DEFREF, name)


def atom(g: Hypergraph, name: str) -> str:
    return g.add_node(Kind.ATOM, name)


def axiom(g: Hypergraph, name: str, prop: str) -> str:
    return g.add_node(Kind.AXIOM, (name, prop))


def conj(g: Hypergraph, a: str, b: str) -> str:
    return g.add_node(Kind.AND, None, (a, b))


def implies(g: Hypergraph, a: str, b: str) -> str:
    return g.add_node(Kind.IMPLIES, None, (a, b))


def neg(g: Hypergraph, a: str) -> str:
    return g.add_node(Kind.NOT, None, (a,))


def rebuild(g: Hypergraph, node_id: str, inputs: tuple[str, ...]) -> str:
    node = g.nodes[node_id]
    if inputs == node.inputs:
        return node_id
    return g.add_node(node.kind, node.payload, inputs)


def numeral_value(g: Hypergraph, n: str):
    """Integer value of a closed succ-tower, or None."""
    k = 0
    while True:
        node = g.nodes[n]
        if node.kind is Kind.ZERO:
            return k
        if node.kind is not Kind.SUCC:
            return None
        k += 1
        n = node.inputs[0]


# -- variables -------------------------------------------------------------

def free_vars(g: Hypergraph, t: str) -> frozenset[int]:
    memo = g.memo("fv")
    hit = memo.get(t)
    if hit is not None:
        return hit
    node = g.nodes[t]
    if node.kind is Kind.VAR:
        out = frozenset((node.payload,))
    else:
        acc: set[int] = set()
        for pos, child in enumerate(node.inputs):
            fv = free_vars(g, child)
            if binds(node.kind, pos):
                acc.update(i - 1 for i in fv if i > 0)
            else:
                acc.update(fv)
        out = frozenset(acc)
    memo[t] = out
    return out


def is_closed(g: Hypergraph, t: str) -> bool:
    return not free_vars(g, t)


def shift(g: Hypergraph, t: str, d: int, cutoff: int = 0) -> str:
    """Add ``d`` to every free variable index >= ``cutoff``."""
    if d == 0:
        return t
    fv = free_vars(g, t)
    if not fv or max(fv) < cutoff:
        return t
    memo = g.memo("shift")
    key = (t, d, cutoff)
    hit = memo.get(key)
    if hit is not None:
        return hit
    node = g.nodes[t]
    if node.kind is Kind.VAR:
        i = node.payload
        if i >= cutoff:
            if i + d < 0:
                raise ValueError("negative variable index after shift")
            out = var(g, i + d)
        else:
            out = t
    else:
        out = rebuild(g, t, tuple(
            shift(g, c, d, cutoff + 1 if binds(node.kind, pos) else cutoff)
            for pos, c in enumerate(node.inputs)))
    memo[key] = out
    return out


def instantiate(g: Hypergraph, body: str, arg: str, depth: int = 0) -> str:
    """Substitute ``arg`` for variable ``depth`` in ``body`` and drop that binder."""
    fv = free_vars(g, body)
    if not fv or max(fv) < depth:
        return body
    memo = g.memo("inst")
    key = (body, arg, depth)
    hit = memo.get(key)
    if hit is not None:
        return hit
    node = g.nodes[body]
    if node.kind is Kind.VAR:
        i = node.payload
        if i == depth:
            out = shift(g, arg, depth)
        elif i > depth:
            out = var(g, i - 1)
        else:
            out = body
    else:
        out = rebuild(g, body, tuple(
            instantiate(g, c, arg, depth + 1 if binds(node.kind, pos) else depth)
            for pos, c in enumerate(node.inputs)))
    memo[key] = out
    return out


def size(g: Hypergraph, t: str) -> int:
    """Tree size (shared subterms counted per occurrence)."""
    memo = g.memo("size")
    hit = memo.get(t)
    if hit is None:
        hit = 1 + sum(size(g, c) for c in g.nodes[t].inputs)
        memo[t] = hit
    return hit
