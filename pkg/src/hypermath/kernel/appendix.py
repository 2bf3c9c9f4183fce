"""Reference constructions: addition, doubling, one induction proof and the
distributivity of dependent functions over dependent pairs."""
from __future__ import annotations

from ..hypergraph import Hypergraph
from . import terms as T
from .syntax import parse
from .typing import Checker, TypeMismatch, convertible, define, infer

ADD = "(lam m (lam n (rec (lam _ Nat) m (lam k (lam v (succ v))) n)))"
# the index k is never used: each step adds two successors to the running value
DOUBLE = "(lam n (rec (lam _ Nat) zero (lam k (lam y (succ (succ y)))) n))"

SUCC_LEFT = "(pi (a Nat) (pi (b Nat) (Id Nat (add (succ a) b) (succ (add a b)))))"
SUCC_LEFT_PROOF = (
    "(lam a (lam b (rec (lam b (Id Nat (add (succ a) b) (succ (add a b))))"
    " (refl (succ a))"
    " (lam k (lam (ih (Id Nat (add (succ a) k) (succ (add a k)))) (cong ih)))"
    " b)))"
)
SUCC_RIGHT = "(pi (a Nat) (pi (b Nat) (Id Nat (add a (succ b)) (succ (add a b)))))"
SUCC_RIGHT_PROOF = "(lam a (lam b (refl (succ (add a b)))))"

DIST_TYPE = (
    "(pi (A Type) (pi (P (pi (x A) Type)) (pi (Q (pi (x A) Type))"
    " (pi (f (pi (x A) (sigma (y (P x)) (Q x))))"
    " (sigma (g (pi (x A) (P x))) (pi (x A) (Q x)))))))"
)


def ensure_arithmetic(g: Hypergraph) -> dict[str, str]:
    """Define ``add`` and ``double`` unless already present."""
    out = {}
    for name, text in (("add", ADD), ("double", DOUBLE)):
        if name in g.definitions:
            out[name] = T.defref(g, name)
        else:
            out[name] = define(g, name, parse(g, text))
    return out


def add_term(g: Hypergraph, m: int, n: int) -> str:
    return T.app(g, T.defref(g, "add"), T.numeral(g, m), T.numeral(g, n))


def double_term(g: Hypergraph, n: int) -> str:
    return T.app(g, T.defref(g, "double"), T.numeral(g, n))


def distributivity(g: Hypergraph) -> dict[str, str]:
    """Build the distributivity witness one hyperedge at a time.

    Context while building the pair, innermost first: f, Q, P, A.
    """
    sort = T.sort(g)
    A = sort
    P_ty = T.pi(g, T.var(g, 0), sort)                        # under A
    Q_ty = T.pi(g, T.var(g, 1), sort)                        # under P, A
    f_ty = T.pi(g, T.var(g, 2), T.sigma(g, T.app(g, T.var(g, 2), T.var(g, 0)),
                                        T.app(g, T.var(g, 2), T.var(g, 1))))
    f = T.var(g, 0)
    # extend the context by x : A, then apply the hypothesis
    x_dom = T.var(g, 3)
    fx = T.app(g, T.var(g, 1), T.var(g, 0))
    t1 = T.proj1(g, fx)
    t2 = T.proj2(g, fx)
    gfun = T.lam(g, x_dom, t1)
    hfun = T.lam(g, x_dom, t2)
    result = T.pair(g, gfun, hfun)
    term = T.lam(g, A, T.lam(g, P_ty, T.lam(g, Q_ty, T.lam(g, f_ty, result))))
    return {"hypothesis": f, "f_x": fx, "t1": t1, "t2": t2, "g": gfun, "h": hfun,
            "pair": result, "term": term, "context": (f_ty, Q_ty, P_ty, A)}


def build_appendix_examples(g: Hypergraph) -> dict[str, str]:
    """Construct and type-check every reference example; returns a name table."""
    table = dict(ensure_arithmetic(g))
    table["add_body"] = g.definitions["add"]
    table["double_body"] = g.definitions["double"]
    table["add_rec"] = g.nodes[g.nodes[g.definitions["add"]].inputs[1]].inputs[1]
    table["double_rec"] = g.nodes[g.definitions["double"]].inputs[1]
    table["double_step"] = g.nodes[table["double_rec"]].inputs[2]

    for key, prop_text, proof_text in (
        ("succ_left", SUCC_LEFT, SUCC_LEFT_PROOF),
        ("succ_right", SUCC_RIGHT, SUCC_RIGHT_PROOF),
    ):
        prop, proof = parse(g, prop_text), parse(g, proof_text)
        if not convertible(g, infer(g, proof), prop):
            raise TypeMismatch(f"{key} proof does not check", prop, infer(g, proof))
        g.set_type(proof, prop)
        table[key] = prop
        table[key + "_proof"] = proof

    dist = distributivity(g)
    ctx = dist.pop("context")
    expected = parse(g, DIST_TYPE)
    actual = infer(g, dist["term"])
    if not convertible(g, actual, expected):
        raise TypeMismatch("distributivity term has the wrong type", expected, actual)
    Checker(g).infer(ctx, dist["pair"])
    g.set_type(dist["term"], expected)
    table.update({"dist_" + k: v for k, v in dist.items()})
    table["dist_type"] = expected
    return table
