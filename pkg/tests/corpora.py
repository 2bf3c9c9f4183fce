"""Small graphs (at most 30 nodes) with several recorded constructions per node."""
import random

from hypermath.corpus import Corpus
from hypermath.hypergraph import CycleDetected, EdgeClass, Hypergraph, Kind
from hypermath.kernel import terms as T
from hypermath.kernel.reduce import normalize
from hypermath.kernel.typing import check_proof, define


def two():
    g = Hypergraph()
    T.numeral(g, 2)
    return g


def numerals_with_shortcuts():
    g = Hypergraph()
    ns = [T.numeral(g, k) for k in range(6)]
    # alternative one-step derivations that skip part of the tower
    g.add_edge("shortcut", [ns[1]], [ns[4]], EdgeClass.DEDUCTION)
    g.add_edge("shortcut", [ns[0], ns[2]], [ns[5]], EdgeClass.DEDUCTION)
    return g


def beta_redex():
    g = Hypergraph()
    nat = T.nat(g)
    f = T.lam(g, nat, T.succ(g, T.succ(g, T.var(g, 0))))
    normalize(g, T.app(g, f, T.numeral(g, 1)))
    return g


def named_two():
    g = Hypergraph()
    define(g, "two", T.numeral(g, 2))
    T.numeral(g, 3)
    return g


def proofs():
    g = Hypergraph()
    a = T.atom(g, "A")
    check_proof(g, T.axiom(g, "h", a), a)
    nat = T.nat(g)
    z = T.zero(g)
    check_proof(g, T.refl(g, z), T.ident(g, nat, z, z))
    one = T.numeral(g, 1)
    redex = T.app(g, T.lam(g, nat, T.var(g, 0)), one)
    check_proof(g, T.refl(g, one), T.ident(g, nat, redex, one))
    return g


def two_proofs_of_one_fact():
    g = Hypergraph()
    nat = T.nat(g)
    one = T.numeral(g, 1)
    prop = T.ident(g, nat, one, one)
    check_proof(g, T.refl(g, one), prop)
    check_proof(g, T.cong(g, T.refl(g, T.zero(g))), prop)
    return g


def random_dag(seed: int):
    """Atoms, connectives over them, and a few extra deduction edges."""
    rng = random.Random(seed)
    g = Hypergraph()
    pool = [T.atom(g, n) for n in "ABC"[: rng.randint(2, 3)]]
    while len(g.nodes) < rng.randint(8, 13):
        kind = rng.choice([Kind.AND, Kind.IMPLIES, Kind.NOT])
        args = [rng.choice(pool) for _ in range(1 if kind is Kind.NOT else 2)]
        pool.append(g.add_node(kind, None, args))
    derived = sorted(n for n in g.nodes if n not in g.roots)
    for _ in range(rng.randint(1, 5)):
        out = rng.choice(derived)
        ins = rng.sample(sorted(g.nodes), rng.randint(1, 2))
        try:
            g.add_edge(rng.choice(["mp", "and-elim", "lemma"]), ins, [out], EdgeClass.DEDUCTION)
        except CycleDetected:
            pass
    return g


def all_small():
    out = {
        "two": two(),
        "numerals-with-shortcuts": numerals_with_shortcuts(),
        "beta-redex": beta_redex(),
        "named-two": named_two(),
        "proofs": proofs(),
        "two-proofs": two_proofs_of_one_fact(),
    }
    for s in range(12):
        out[f"random-{s}"] = random_dag(s)
    for name, g in out.items():
        assert len(g.nodes) <= 30, (name, len(g.nodes))
    return out


def toy_corpus(seed: int):
    """A few unary numeric definitions that share a randomly chosen motif."""
    rng = random.Random(seed)
    c = Corpus()
    g = c.graph
    nat = T.nat(g)
    motif = [rng.choice(["succ", "wrap"]) for _ in range(rng.randint(2, 3))]

    def apply(kind, x):
        if kind == "succ":
            return T.succ(g, x)
        return T.app(g, T.lam(g, nat, T.succ(g, T.var(g, 0))), x)

    def body(depth):
        x = T.var(g, 0) if rng.random() < 0.7 else T.numeral(g, rng.randint(0, 2))
        for _ in range(depth):
            if rng.random() < 0.5:
                for k in motif:
                    x = apply(k, x)
            else:
                x = apply(rng.choice(["succ", "wrap"]), x)
        return x

    for i in range(rng.randint(3, 5)):
        define(g, f"f{i}", T.lam(g, nat, body(rng.randint(1, 3))))
    return c
