"""S-expression surface syntax.

Grammar (whitespace separates tokens, ``;`` starts a line comment)::

    term  ::= zero | Nat | Type | NUMBER | NAME
            | (succ term) | (lam BINDER term) | (pi (NAME term) term)
            | (sigma (NAME term) term) | (pair term term) | (fst term) | (snd term)
            | (Id term term term) | (refl term) | (cong term)
            | (rec term term term term) | (and term term) | (implies term term)
            | (not term) | (axiom NAME term) | (term term+)
    BINDER ::= NAME | (NAME term)          ; a bare name binds a Nat variable

A NAME resolves to the nearest enclosing binder, then to a definition, then
(if capitalised) to an atom.  Numbers are sugar for succ towers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from ..hypergraph import Hypergraph, Kind
from . import terms as T

KEYWORDS = frozenset({
    "zero", "Nat", "Type", "succ", "lam", "pi", "sigma", "pair", "fst", "snd",
    "Id", "refl", "cong", "rec", "and", "implies", "not", "axiom",
})
_ARITY = {
    "succ": 1, "pair": 2, "fst": 1, "snd": 1, "Id": 3, "refl": 1, "cong": 1,
    "rec": 4, "and": 2, "implies": 2, "not": 1,
}
_TOKEN = re.compile(r"\s+|;[^\n]*|(\()|(\))|([^\s();]+)")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_'\-]*")


class ParseError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        line = text.count("\n", 0, offset) + 1
        col = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.offset = offset
        self.line = line
        self.column = col


@dataclass
class _Tok:
    text: str
    pos: int


Sexp = Union[_Tok, list]


def tokenize(text: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("unexpected character", text, pos)
        if m.lastindex:
            out.append(_Tok(m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    return out


def _read(text: str) -> Sexp:
    toks = tokenize(text)
    if not toks:
        raise ParseError("empty input", text, 0)
    stack: list[list] = [[]]
    opens: list[int] = []
    for tok in toks:
        if tok.text == "(":
            stack.append([])
            opens.append(tok.pos)
        elif tok.text == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", text, tok.pos)
            done = stack.pop()
            done.insert(0, _Tok("(", opens.pop()))
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) > 1:
        raise ParseError("missing ')'", text, opens[-1])
    if len(stack[0]) != 1:
        extra = stack[0][1]
        raise ParseError("trailing input", text, extra.pos if isinstance(extra, _Tok) else extra[0].pos)
    return stack[0][0]


class _Parser:
    def __init__(self, g: Hypergraph, text: str):
        self.g = g
        self.text = text

    def fail(self, msg: str, sx: Sexp):
        pos = sx.pos if isinstance(sx, _Tok) else sx[0].pos
        raise ParseError(msg, self.text, pos)

    def term(self, sx: Sexp, scope: tuple[str, ...]) -> str:
        g = self.g
        if isinstance(sx, _Tok):
            return self.atom(sx, scope)
        items = sx[1:]
        if not items:
            self.fail("empty application", sx)
        head = items[0]
        if isinstance(head, _Tok) and head.text in KEYWORDS and head.text not in ("zero", "Nat", "Type"):
            return self.form(sx, head.text, items[1:], scope)
        if len(items) < 2:
            self.fail("application needs an argument", sx)
        f = self.term(head, scope)
        return T.app(g, f, *(self.term(a, scope) for a in items[1:]))

    def atom(self, tok: _Tok, scope: tuple[str, ...]) -> str:
        g = self.g
        s = tok.text
        if s == "zero":
            return T.zero(g)
        if s == "Nat":
            return T.nat(g)
        if s == "Type":
            return T.sort(g)
        if s.isdigit():
            return T.numeral(g, int(s))
        if s in KEYWORDS:
            self.fail(f"keyword {s!r} used as a value", tok)
        if not _NAME.fullmatch(s):
            self.fail(f"bad identifier {s!r}", tok)
        if s in scope and s != "_":
            return T.var(g, scope.index(s))
        if s in g.definitions:
            return T.defref(g, s)
        if s[0].isupper():
            return T.atom(g, s)
        self.fail(f"unbound name {s!r}", tok)

    def binder(self, sx: Sexp, scope) -> tuple[str, str]:
        if isinstance(sx, _Tok):
            return self.name(sx), T.nat(self.g)
        if len(sx) != 3 or not isinstance(sx[1], _Tok):
            self.fail("binder must be NAME or (NAME type)", sx)
        return self.name(sx[1]), self.term(sx[2], scope)

    def name(self, tok: _Tok) -> str:
        if tok.text in KEYWORDS or not _NAME.fullmatch(tok.text):
            self.fail(f"bad binder name {tok.text!r}", tok)
        return tok.text

    def form(self, sx, kw: str, args: list, scope) -> str:
        g = self.g
        if kw in ("lam", "pi", "sigma"):
            if len(args) != 2:
                self.fail(f"{kw} takes a binder and a body", sx)
            if kw != "lam" and isinstance(args[0], _Tok):
                self.fail(f"{kw} binder needs an explicit type", sx)
            name, dom = self.binder(args[0], scope)
            body = self.term(args[1], (name,) + scope)
            return {"lam": T.lam, "pi": T.pi, "sigma": T.sigma}[kw](g, dom, body)
        if kw == "axiom":
            if len(args) != 2 or not isinstance(args[0], _Tok):
                self.fail("axiom takes a name and a proposition", sx)
            return T.axiom(g, self.name(args[0]), self.term(args[1], scope))
        if len(args) != _ARITY[kw]:
            self.fail(f"{kw} expects {_ARITY[kw]} arguments, got {len(args)}", sx)
        xs = [self.term(a, scope) for a in args]
        build = {
            "succ": T.succ, "pair": T.pair, "fst": T.proj1, "snd": T.proj2,
            "Id": T.ident, "refl": T.refl, "cong": T.cong, "rec": T.rec,
            "and": T.conj, "implies": T.implies, "not": T.neg,
        }[kw]
        return build(g, *xs)


def parse(g: Hypergraph, text: str) -> str:
    """Parse ``text`` into ``g`` and return the node id."""
    return _Parser(g, text).term(_read(text), ())


# -- printing ----------------------------------------------------------------

def binder_name(depth: int) -> str:
    return f"x{depth}"


_SIMPLE = {
    Kind.SUCC: "succ", Kind.PAIR: "pair", Kind.PROJ1: "fst", Kind.PROJ2: "snd",
    Kind.ID: "Id", Kind.REFL: "refl", Kind.CONG: "cong", Kind.REC: "rec",
    Kind.AND: "and", Kind.IMPLIES: "implies", Kind.NOT: "not",
}


def show(g: Hypergraph, t: str, depth: int = 0) -> str:
    """Canonical surface form; ``depth`` is the number of enclosing binders."""
    node = g.nodes[t]
    k = node.kind
    if k is Kind.ZERO:
        return "zero"
    if k is Kind.NAT:
        return "Nat"
    if k is Kind.SORT:
        return "Type"
    if k is Kind.VAR:
        return binder_name(depth - 1 - node.payload)
    if k in (Kind.DEFREF, Kind.ATOM):
        return node.payload
    if k is Kind.AXIOM:
        name, prop = node.payload
        return f"(axiom {name} {show(g, prop, depth)})"
    if k in (Kind.LAMBDA, Kind.PI, Kind.SIGMA):
        dom, body = node.inputs
        x = binder_name(depth)
        kw = {Kind.LAMBDA: "lam", Kind.PI: "pi", Kind.SIGMA: "sigma"}[k]
        if k is Kind.LAMBDA and g.nodes[dom].kind is Kind.NAT:
            b = x
        else:
            b = f"({x} {show(g, dom, depth)})"
        return f"({kw} {b} {show(g, body, depth + 1)})"
    if k is Kind.APP:
        spine = []
        while g.nodes[t].kind is Kind.APP:
            f, a = g.nodes[t].inputs
            spine.append(a)
            t = f
        parts = [show(g, t, depth)] + [show(g, a, depth) for a in reversed(spine)]
        return "(" + " ".join(parts) + ")"
    if k in _SIMPLE:
        return "(" + " ".join([_SIMPLE[k]] + [show(g, c, depth) for c in node.inputs]) + ")"
    raise ValueError(f"no surface syntax for {k.value}")


def token_length(text: str) -> int:
    """Number of non-parenthesis tokens."""
    return sum(1 for tok in tokenize(text) if tok.text not in "()")


def length_of(g: Hypergraph, t: str) -> int:
    return token_length(show(g, t))
