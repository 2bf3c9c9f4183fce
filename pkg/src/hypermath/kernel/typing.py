"""Type inference and proof checking for the Peano fragment.

Contexts are tuples of type node ids, innermost binder first; the type stored
at position ``i`` lives in the context formed by positions ``i+1 ...``.
Definitional equality is "same normal form within the fuel budget".
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..hypergraph import EdgeClass, Hypergraph, Kind
from . import terms as T
from .reduce import FuelExhausted, normalize

DEFAULT_FUEL = 5_000

Context = tuple[str, ...]


class KernelError(Exception):
    pass


class TypeMismatch(KernelError):
    def __init__(self, message: str, expected: Optional[str] = None, actual: Optional[str] = None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class UnboundVariable(KernelError):
    pass


class DuplicateName(KernelError):
    pass


class OpenTerm(KernelError):
    pass


@dataclass(frozen=True)
class Judgment:
    subject: str
    type: str
    evidence: str


@dataclass(frozen=True)
class CheckResult:
    status: str  # "valid" | "invalid" | "unknown"
    expected: Optional[str] = None
    actual: Optional[str] = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.status == "valid"

    @property
    def unknown(self) -> bool:
        return self.status == "unknown"


def nf(g: Hypergraph, t: str, fuel: int = DEFAULT_FUEL) -> str:
    return normalize(g, t, fuel).node


def _canon(g: Hypergraph, t: str) -> str:
    """Read propositional connectives as their type formers (And = Σ, ⇒ = Π)."""
    memo = g.memo("canon")
    hit = memo.get(t)
    if hit is not None:
        return hit
    node = g.nodes[t]
    ins = tuple(_canon(g, c) for c in node.inputs)
    if node.kind is Kind.AND:
        out = T.sigma(g, ins[0], T.shift(g, ins[1], 1))
    elif node.kind is Kind.IMPLIES:
        out = T.pi(g, ins[0], T.shift(g, ins[1], 1))
    else:
        out = T.rebuild(g, t, ins)
    memo[t] = out
    return out


def convertible(g: Hypergraph, a: str, b: str, fuel: int = DEFAULT_FUEL) -> bool:
    """Definitional equality; FuelExhausted propagates as 'unknown'."""
    if a == b:
        return True
    na, nb = nf(g, a, fuel), nf(g, b, fuel)
    return na == nb or _canon(g, na) == _canon(g, nb)


def _whnf_kind(g: Hypergraph, t: str, fuel: int) -> tuple[str, Kind]:
    n = nf(g, t, fuel)
    return n, g.nodes[n].kind


class Checker:
    """Bidirectional checker bound to one graph and fuel budget."""

    def __init__(self, g: Hypergraph, fuel: int = DEFAULT_FUEL):
        self.g = g
        self.fuel = fuel
        self._memo: dict[tuple[Context, str], str] = g.memo("infer")

    def expect(self, ctx: Context, t: str, ty: str):
        actual = self.infer(ctx, t)
        if not convertible(self.g, actual, ty, self.fuel):
            raise TypeMismatch(f"{self.g.nodes[t].kind.value} has the wrong type", ty, actual)

    def expect_sort(self, ctx: Context, t: str):
        ty = self.infer(ctx, t)
        _, k = _whnf_kind(self.g, ty, self.fuel)
        if k is not Kind.SORT:
            raise TypeMismatch("expected a type", T.sort(self.g), ty)

    def infer(self, ctx: Context, t: str) -> str:
        key = (ctx, t)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = self._infer(ctx, t)
        self._memo[key] = out
        return out

    def _infer(self, ctx: Context, t: str) -> str:
        g = self.g
        node = g.nodes[t]
        k = node.kind
        ins = node.inputs
        if k in (Kind.SORT, Kind.NAT, Kind.ATOM):
            return T.sort(g)
        if k is Kind.ZERO:
            return T.nat(g)
        if k is Kind.SUCC:
            self.expect(ctx, ins[0], T.nat(g))
            return T.nat(g)
        if k is Kind.VAR:
            i = node.payload
            if i >= len(ctx):
                raise UnboundVariable(f"variable #{i} escapes a context of depth {len(ctx)}")
            return T.shift(g, ctx[i], i + 1)
        if k is Kind.LAMBDA:
            dom, body = ins
            self.expect_sort(ctx, dom)
            return T.pi(g, dom, self.infer((dom,) + ctx, body))
        if k in (Kind.PI, Kind.SIGMA):
            dom, cod = ins
            self.expect_sort(ctx, dom)
            self.expect_sort((dom,) + ctx, cod)
            return T.sort(g)
        if k is Kind.APP:
            f, a = ins
            fty, fk = _whnf_kind(g, self.infer(ctx, f), self.fuel)
            fty = _canon(g, fty)
            fk = g.nodes[fty].kind
            if fk is not Kind.PI:
                raise TypeMismatch("applying a non-function", None, fty)
            dom, cod = g.nodes[fty].inputs
            self.expect(ctx, a, dom)
            return T.instantiate(g, cod, a)
        if k is Kind.PAIR:
            a, b = ins
            return T.sigma(g, self.infer(ctx, a), T.shift(g, self.infer(ctx, b), 1))
        if k in (Kind.PROJ1, Kind.PROJ2):
            p = ins[0]
            pty, _ = _whnf_kind(g, self.infer(ctx, p), self.fuel)
            pty = _canon(g, pty)
            if g.nodes[pty].kind is not Kind.SIGMA:
                raise TypeMismatch("projecting from a non-pair", None, pty)
            dom, cod = g.nodes[pty].inputs
            if k is Kind.PROJ1:
                return dom
            return T.instantiate(g, cod, T.proj1(g, p))
        if k is Kind.ID:
            ty, a, b = ins
            self.expect_sort(ctx, ty)
            self.expect(ctx, a, ty)
            self.expect(ctx, b, ty)
            return T.sort(g)
        if k is Kind.REFL:
            a = ins[0]
            return T.ident(g, self.infer(ctx, a), a, a)
        if k is Kind.CONG:
            p = ins[0]
            pty, pk = _whnf_kind(g, self.infer(ctx, p), self.fuel)
            if pk is not Kind.ID or g.nodes[g.nodes[pty].inputs[0]].kind is not Kind.NAT:
                raise TypeMismatch("cong needs a proof of an equation between naturals", None, pty)
            ty, a, b = g.nodes[pty].inputs
            return T.ident(g, ty, T.succ(g, a), T.succ(g, b))
        if k is Kind.REC:
            return self._infer_rec(ctx, *ins)
        if k is Kind.DEFREF:
            body = g.definitions.get(node.payload)
            if body is None:
                raise UnboundVariable(f"no definition named {node.payload!r}")
            return self.infer((), body)
        if k in (Kind.AND, Kind.IMPLIES):
            self.expect_sort(ctx, ins[0])
            self.expect_sort(ctx, ins[1])
            return T.sort(g)
        if k is Kind.NOT:
            self.expect_sort(ctx, ins[0])
            return T.sort(g)
        if k is Kind.AXIOM:
            _, prop = node.payload
            self.expect_sort((), prop)
            return prop
        raise TypeMismatch(f"cannot type a {k.value} node")

    def _infer_rec(self, ctx: Context, motive: str, base: str, step: str, target: str) -> str:
        g = self.g
        N = T.nat(g)
        self.expect(ctx, motive, T.pi(g, N, T.sort(g)))
        self.expect(ctx, base, T.app(g, motive, T.zero(g)))
        m1 = T.shift(g, motive, 1)
        m2 = T.shift(g, motive, 2)
        step_ty = T.pi(g, N, T.pi(g, T.app(g, m1, T.var(g, 0)),
                                   T.app(g, m2, T.succ(g, T.var(g, 1)))))
        self.expect(ctx, step, step_ty)
        self.expect(ctx, target, N)
        return T.app(g, motive, target)


def infer(g: Hypergraph, t: str, ctx: Context = (), fuel: int = DEFAULT_FUEL) -> str:
    return Checker(g, fuel).infer(ctx, t)


def judge(g: Hypergraph, t: str, fuel: int = DEFAULT_FUEL) -> Judgment:
    """Type a closed node and record the typing edge."""
    if not T.is_closed(g, t):
        raise UnboundVariable("judgments are only recorded for closed terms")
    ty = nf(g, infer(g, t, (), fuel), fuel)
    return Judgment(t, ty, g.set_type(t, ty))


_BUILDERS = {
    Kind.ZERO: lambda g: T.zero(g),
    Kind.NAT: lambda g: T.nat(g),
    Kind.SORT: lambda g: T.sort(g),
}


def mk_constructor(g: Hypergraph, kind: Kind, *args, fuel: int = DEFAULT_FUEL) -> Judgment:
    """Build a node of ``kind`` from ``args`` and type it in the empty context.

    Nodes whose inputs fail the kind's typing signature are rejected before
    anything is recorded.
    """
    if kind in _BUILDERS:
        nid = _BUILDERS[kind](g)
    elif kind is Kind.VAR:
        raise UnboundVariable(f"variable #{args[0]} is unbound at top level")
    elif kind in (Kind.DEFREF, Kind.ATOM):
        nid = g.add_node(kind, args[0])
    elif kind is Kind.AXIOM:
        nid = T.axiom(g, args[0], args[1])
    else:
        nid = _probe(g, kind, tuple(args), fuel)
    return judge(g, nid, fuel)


def _probe(g: Hypergraph, kind: Kind, args: tuple[str, ...], fuel: int) -> str:
    # type-check on a scratch copy so a rejected construction leaves no trace
    scratch = g.copy()
    nid = scratch.add_node(kind, None, args)
    infer(scratch, nid, (), fuel)
    return g.add_node(kind, None, args)


def define(g: Hypergraph, name: str, body: str, fuel: int = DEFAULT_FUEL) -> str:
    """Bind ``name`` to a closed, well-typed ``body`` and return its DefRef node."""
    if name in g.definitions:
        raise DuplicateName(name)
    if not T.is_closed(g, body):
        raise OpenTerm(f"definition {name!r} has free variables")
    ty = infer(g, body, (), fuel)
    ref = T.defref(g, name)
    g.definitions[name] = body
    g.add_edge("delta", (ref,), (body,), EdgeClass.COMPUTATION)
    g.set_type(ref, ty)
    g.revision += 1
    return ref


def rebind(g: Hypergraph, name: str, body: str, fuel: int = DEFAULT_FUEL):
    """Point an existing definition at an equivalent body (used by rewriting)."""
    old = g.definitions[name]
    if not convertible(g, old, body, fuel):
        raise TypeMismatch(f"new body of {name!r} is not definitionally equal", old, body)
    g.definitions[name] = body
    ref = T.defref(g, name)
    g.add_edge("delta", (ref,), (body,), EdgeClass.COMPUTATION)
    g.memo("step").pop(ref, None)
    g.revision += 1


def check_proof(g: Hypergraph, proof: str, prop: str, fuel: int = DEFAULT_FUEL) -> CheckResult:
    """Re-derive ``proof : prop``; records the judgment on success."""
    try:
        ck = Checker(g, fuel)
        pty, pk = _whnf_kind(g, ck.infer((), prop), fuel)
        if pk is not Kind.SORT:
            return CheckResult("invalid", T.sort(g), pty, "target is not a proposition")
        actual = ck.infer((), proof)
        if not convertible(g, actual, prop, fuel):
            return CheckResult("invalid", prop, actual, "proof proves a different proposition")
    except FuelExhausted as exc:
        return CheckResult("unknown", prop, None, str(exc))
    except TypeMismatch as exc:
        return CheckResult("invalid", exc.expected, exc.actual, str(exc))
    except UnboundVariable as exc:
        return CheckResult("invalid", prop, None, str(exc))
    g.add_edge("typing", (proof,), (prop,), EdgeClass.DEDUCTION)
    g.types.setdefault(proof, actual)
    return CheckResult("valid", prop, actual)


def is_proposition(g: Hypergraph, t: str, fuel: int = DEFAULT_FUEL) -> bool:
    try:
        ty = nf(g, infer(g, t, (), fuel), fuel)
    except (KernelError, FuelExhausted):
        return False
    return g.nodes[ty].kind is Kind.SORT
