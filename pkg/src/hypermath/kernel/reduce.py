"""Computation edges: beta, iota, projection and definition unfolding.

Every contraction is persisted as a (1,1) Computation edge from the redex
term to its reduct, so a normalization run leaves its whole reduction
history in the graph.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..hypergraph import EdgeClass, Hypergraph, Kind
from . import terms as T


class FuelExhausted(Exception):
    def __init__(self, partial: str, steps: int):
        super().__init__(f"normalization ran out of fuel after {steps} steps")
        self.partial = partial
        self.steps = steps


@dataclass(frozen=True)
class NormalForm:
    node: str
    steps: int


def _record(g: Hypergraph, color: str, src: str, dst: str) -> str:
    g.add_edge(color, (src,), (dst,), EdgeClass.COMPUTATION)
    return dst


def head_redex(g: Hypergraph, t: str) -> Optional[tuple[str, str]]:
    """Contract a redex at the head of ``t``; returns (color, reduct) or None."""
    node = g.nodes[t]
    k = node.kind
    if k is Kind.DEFREF:
        body = g.definitions.get(node.payload)
        if body is None:
            return None
        return "delta", body
    if k is Kind.APP:
        f, a = node.inputs
        fn = g.nodes[f]
        if fn.kind is Kind.LAMBDA:
            return "beta", T.instantiate(g, fn.inputs[1], a)
        return None
    if k in (Kind.PROJ1, Kind.PROJ2):
        p = g.nodes[node.inputs[0]]
        if p.kind is Kind.PAIR:
            return "proj-red", p.inputs[0 if k is Kind.PROJ1 else 1]
        return None
    if k is Kind.REC:
        motive, base, step, target = node.inputs
        tn = g.nodes[target]
        if tn.kind is Kind.ZERO:
            return "iota", base
        if tn.kind is Kind.SUCC:
            pred = tn.inputs[0]
            below = T.rec(g, motive, base, step, pred)
            sn = g.nodes[step]
            inner = g.nodes[sn.inputs[1]] if sn.kind is Kind.LAMBDA else None
            if inner is not None and inner.kind is Kind.LAMBDA:
                # step is a literal two-argument lambda: unwind in one edge
                body = inner.inputs[1]
                return "iota", T.instantiate(g, T.instantiate(g, body, T.shift(g, below, 1)), pred)
            return "iota", T.app(g, step, pred, below)
        return None
    return None


def reduce_step(g: Hypergraph, t: str) -> Optional[str]:
    """Contract the head redex of ``t`` if there is one (recording the edge)."""
    hit = head_redex(g, t)
    if hit is None:
        return None
    color, out = hit
    return _record(g, color, t, out)


def step(g: Hypergraph, t: str) -> Optional[str]:
    """One leftmost-outermost contraction anywhere in ``t``; None if normal."""
    succ_memo = g.memo("step")
    if t in succ_memo:
        return succ_memo[t]
    colors = g.memo("step-color")
    out = None
    hit = head_redex(g, t)
    if hit is not None:
        color, out = hit
    else:
        node = g.nodes[t]
        for pos, child in enumerate(node.inputs):
            r = step(g, child)
            if r is not None:
                color = colors[child]
                out = T.rebuild(g, t, node.inputs[:pos] + (r,) + node.inputs[pos + 1:])
                break
    if out is not None:
        _record(g, color, t, out)
        colors[t] = color
    succ_memo[t] = out
    return out


def normalize(g: Hypergraph, t: str, fuel: int = 10_000) -> NormalForm:
    """Leftmost-outermost normalization; raises FuelExhausted past ``fuel`` steps."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    nf_memo = g.memo("nf")
    hit = nf_memo.get(t)
    if hit is not None:
        nf, steps = hit
        if steps <= fuel:
            return NormalForm(nf, steps)
    cur, steps = t, 0
    trail = [t]
    while True:
        known = nf_memo.get(cur)
        if known is not None:
            nf, rest = known
            total = steps + rest
            if total > fuel:
                # walk the recorded chain to report the exact partial reduct
                while steps < fuel:
                    cur = step(g, cur)
                    steps += 1
                raise FuelExhausted(cur, steps)
            _remember(nf_memo, trail, nf, total)
            return NormalForm(nf, total)
        nxt = step(g, cur)
        if nxt is None:
            _remember(nf_memo, trail, cur, steps)
            return NormalForm(cur, steps)
        if steps == fuel:
            raise FuelExhausted(cur, steps)
        steps += 1
        cur = nxt
        trail.append(cur)


def _remember(memo: dict, trail: list[str], nf: str, total: int):
    for i, n in enumerate(trail):
        memo.setdefault(n, (nf, total - i))


def is_normal(g: Hypergraph, t: str) -> bool:
    return step(g, t) is None


def reduction_chain(g: Hypergraph, t: str, fuel: int = 10_000) -> list[str]:
    """The sequence of whole terms visited while normalizing ``t``."""
    chain = [t]
    while len(chain) <= fuel:
        nxt = step(g, chain[-1])
        if nxt is None:
            return chain
        chain.append(nxt)
    raise FuelExhausted(chain[-1], fuel)
