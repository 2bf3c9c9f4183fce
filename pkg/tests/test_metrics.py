
import pytest
from hypothesis import given, settings, strategies as st

from hypermath.hypergraph import Hypergraph, Kind, UnknownInput, backward_closure
from hypermath.kernel import appendix, terms as T
from hypermath.kernel.reduce import normalize
from hypermath.kernel.syntax import token_length
from hypermath.metrics import (
    UNIT, CostModel, GuardExceeded, Unproven, complexity, depth, depths, efficiency,
    growth_experiment, hub_scores, length, min_complexity, neighborhood, proofs_of,
)

import corpora
import oracles


def layer_replay(g):
    """Depths by replaying every derivation edge layer by layer."""
    have = {r: 0 for r in g.roots}
    d = 0
    while True:
        d += 1
        new = {}
        for e in g.edges.values():
            if e.color == "typing" or not all(i in have for i in e.inputs):
                continue
            for o in e.outputs:
                if o not in have:
                    new[o] = d
        if not new:
            return have
        have.update(new)


# -- depth -------------------------------------------------------------------

def test_depth_of_a_root(graph):
    assert depth(graph, T.zero(graph)) == 0


def test_depth_of_two(graph):
    assert depth(graph, T.numeral(graph, 2)) == 2


def test_depth_of_four_is_a_minimum_over_its_derivations(arith):
    four = normalize(arith, appendix.add_term(arith, 2, 2)).node
    # the succ tower is shallower than the reduction chain from add 2 2
    assert depth(arith, four) == 4
    assert depth(arith, four) <= 1 + depth(arith, appendix.add_term(arith, 2, 2))


def test_depth_of_unknown_node(graph):
    with pytest.raises(UnknownInput):
        depth(graph, "0123456789abcdef")


def test_depths_match_layer_replay():
    for name, g in corpora.all_small().items():
        assert depths(g) == layer_replay(g), name


# -- neighbourhoods ----------------------------------------------------------

def test_neighborhood_radius_zero(graph):
    a = T.atom(graph, "A")
    T.atom(graph, "B")
    assert set(neighborhood(graph, a, 0).nodes) == {a}


def test_negation_is_one_step_away(graph):
    a = T.atom(graph, "A")
    ball = neighborhood(graph, a, 1, rules=("not-form",))
    assert set(ball.nodes) == {a, T.neg(graph, a)}


@pytest.mark.parametrize("d", [0, 1, 2])
def test_conjunction_ball_size(graph, d):
    a, b = T.atom(graph, "A"), T.atom(graph, "B")
    ball = neighborhood(graph, a, d, rules=("and-intro-form",), context=[b])
    assert len(ball.nodes) == oracles.neighborhood_count(2, d)


def test_neighborhood_rejects_negative_radius(graph):
    with pytest.raises(ValueError):
        neighborhood(graph, T.atom(graph, "A"), -1)


# -- complexity ---------------------------------------------------------------

def test_complexity_of_empty_graph(graph):
    assert complexity(graph) == 0


def test_complexity_of_two(graph):
    assert complexity(backward_closure(graph, T.numeral(graph, 2))) == 2


def test_complexity_of_add_body(arith):
    sub = backward_closure(arith, arith.definitions["add"])
    # one construction edge per non-root node in the closure
    assert complexity(sub) == sum(1 for n in sub.nodes if sub.nodes[n].inputs)


def test_input_costs_are_charged_once_per_leaf(graph):
    two = backward_closure(graph, T.numeral(graph, 2))
    model = CostModel(lambda e: 2.0, lambda n: 10.0)
    assert complexity(two, model) == 2 * 2 + 10


def test_min_complexity_examples(graph):
    assert min_complexity(graph, T.zero(graph)).value == 0
    rep = min_complexity(graph, T.numeral(graph, 2))
    assert rep.value == 2 and rep.exact
    assert len(rep.witness.edges) == 2


def test_naming_shortens_derivations(arith):
    named = appendix.add_term(arith, 2, 2)
    inline = T.app(arith, arith.definitions["add"], T.numeral(arith, 2), T.numeral(arith, 2))
    assert min_complexity(arith, named).value <= min_complexity(arith, inline).value


def test_shortcut_edges_are_used():
    g = corpora.numerals_with_shortcuts()
    assert min_complexity(g, T.numeral(g, 4)).value == 2
    assert min_complexity(g, T.numeral(g, 5)).value == 3


def test_min_complexity_unknown_node(graph):
    with pytest.raises(UnknownInput):
        min_complexity(graph, "0123456789abcdef")


# -- length -------------------------------------------------------------------

def test_length_of_zero(graph):
    assert length(graph, T.zero(graph)).value == 1


def test_length_of_four_with_and_without_double(graph):
    four = T.numeral(graph, 4)
    assert length(graph, four).value == token_length("(succ (succ (succ (succ zero))))") == 5
    appendix.ensure_arithmetic(graph)
    normalize(graph, appendix.double_term(graph, 2))
    # the computation edge from (double 2) now offers a shorter spelling
    assert length(graph, four).value == token_length("(double (succ (succ zero)))") == 4


def test_lengths_never_grow_when_definitions_arrive(graph):
    base = [T.numeral(graph, k) for k in range(7)]
    before = {n: length(graph, n).value for n in base}
    appendix.ensure_arithmetic(graph)
    for m in range(4):
        normalize(graph, appendix.double_term(graph, m))
        normalize(graph, appendix.add_term(graph, m, m))
    for n in base:
        assert length(graph, n).value <= before[n]


def test_length_of_a_beta_redex_result():
    g = corpora.beta_redex()
    three = T.numeral(g, 3)
    # (app (lam Nat (succ (succ #0))) (succ zero)) is longer than the tower
    assert length(g, three).value == 4


# -- efficiency ----------------------------------------------------------------

def test_succ_left_is_more_efficient_than_succ_right(examples):
    g, t = examples
    left = efficiency(g, t["succ_left"]).value
    right = efficiency(g, t["succ_right"]).value
    assert left > right
    assert left == oracles.efficiency(g, t["succ_left"])
    assert right == oracles.efficiency(g, t["succ_right"])


def test_efficiency_of_an_axiom(graph):
    a = T.atom(graph, "A")
    ax = T.axiom(graph, "h", a)
    graph.set_type(ax, a)
    rep = efficiency(graph, a)
    assert rep.proof == ax
    assert rep.numerator == token_length("(axiom h A)")
    assert rep.denominator == 1
    assert rep.value == 3


def test_efficiency_of_unproven_fact(graph):
    with pytest.raises(Unproven):
        efficiency(graph, T.atom(graph, "A"))


def test_efficiency_takes_the_best_proof():
    g = corpora.two_proofs_of_one_fact()
    nat = T.nat(g)
    one = T.numeral(g, 1)
    prop = T.ident(g, nat, one, one)
    assert len(proofs_of(g, prop)) == 2
    assert efficiency(g, prop).value == oracles.efficiency(g, prop)


# -- growth ----------------------------------------------------------------------

@pytest.mark.parametrize("k,layers,expected", [
    (2, 3, [2, 4, 16, 256]),
    (1, 3, [1, 1, 1, 1]),
    (3, 2, [3, 9, 81]),
])
def test_growth_examples(k, layers, expected):
    assert growth_experiment(k, layers) == expected


def test_growth_guard():
    with pytest.raises(GuardExceeded):
        growth_experiment(2, 5)
    assert growth_experiment(1, 6, override=True) == [1] * 7


def test_growth_rejects_bad_arguments():
    with pytest.raises(ValueError):
        growth_experiment(0, 2)
    with pytest.raises(ValueError):
        growth_experiment(2, -1)


# -- hubs ------------------------------------------------------------------------

def test_isolated_root_has_no_hub_score(graph):
    z = T.zero(graph)
    assert hub_scores(graph)[z] == {"outDegree": 0, "inDegree": 0, "betweennessApprox": 0.0}


def test_chain_middle_is_the_hub(graph):
    chain = [T.atom(graph, "A")]
    for i in range(4):
        chain.append(graph.add_node(Kind.OPAQUE, f"c{i}", [chain[-1]]))
    scores = hub_scores(graph)
    between = [scores[n]["betweennessApprox"] for n in chain]
    # the expansion interleaves edge vertices, so node i sits at position 2i
    expected = oracles.path_betweenness(9)[::2]
    assert between == pytest.approx(expected)
    assert max(between) == between[2]
    assert [scores[n]["outDegree"] for n in chain] == [1, 1, 1, 1, 0]


# -- oracle agreement on small corpora ---------------------------------------------

@pytest.mark.parametrize("name", sorted(corpora.all_small()))
def test_metrics_match_oracles(name):
    g = corpora.all_small()[name]
    ol = oracles.lengths(g)
    for n in sorted(g.nodes):
        assert min_complexity(g, n).value == oracles.min_complexity(g, n), n
        assert length(g, n).value == ol[n], n
        if proofs_of(g, n):
            assert efficiency(g, n).value == pytest.approx(oracles.efficiency(g, n))


def colour_cost(e):
    return {"succ": 3.0, "shortcut": 5.0, "mp": 2.0}.get(e.color, 1.0)


@pytest.mark.parametrize("name", ["numerals-with-shortcuts", "random-3", "random-7"])
def test_weighted_complexity_matches_oracle(name):
    g = corpora.all_small()[name]
    model = CostModel(colour_cost)
    for n in sorted(g.nodes):
        assert min_complexity(g, n, model).value == oracles.min_complexity(g, n, colour_cost), n


# -- properties -------------------------------------------------------------------

seeds = st.integers(0, 10_000)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_depth_bounds_min_complexity(s):
    g = corpora.random_dag(s)
    dep = depths(g)
    for n in g.nodes:
        assert dep[n] <= min_complexity(g, n).value


@given(seeds, seeds)
@settings(max_examples=30, deadline=None)
def test_complexity_is_additive_over_disjoint_parts(a, b):
    g = Hypergraph()
    # prefixing atom names keeps the two copies disjoint
    ids_a = set(_copy_into(g, corpora.random_dag(a), "L").values())
    ids_b = set(_copy_into(g, corpora.random_dag(b), "R").values())
    assert not ids_a & ids_b
    part_a = [e.id for e in g.edges.values() if set(e.outputs) <= ids_a]
    part_b = [e.id for e in g.edges.values() if set(e.outputs) <= ids_b]
    sub_a, sub_b = g.subgraph(ids_a, part_a), g.subgraph(ids_b, part_b)
    both = g.subgraph(ids_a | ids_b, part_a + part_b)
    assert complexity(both) == complexity(sub_a) + complexity(sub_b)


def _copy_into(g, src, prefix):
    ids = {}
    for n in src.topological_order():
        node = src.nodes[n]
        if node.kind is Kind.ATOM:
            ids[n] = T.atom(g, prefix + node.payload)
        else:
            ids[n] = g.add_node(node.kind, node.payload, [ids[i] for i in node.inputs])
    return ids


@given(seeds, st.integers(1, 40))
@settings(max_examples=30, deadline=None)
def test_budget_monotonicity(s, budget):
    g = corpora.random_dag(s)
    for n in sorted(g.nodes):
        small = min_complexity(g, n, UNIT, budget)
        large = min_complexity(g, n, UNIT, budget * 4)
        assert large.value <= small.value
        assert large.exact or not small.exact


@given(seeds, st.sampled_from([0.5, 2.0, 7.0]))
@settings(max_examples=30, deadline=None)
def test_rescaling_keeps_the_argmax(s, factor):
    g, t = _proven_corpus(s)
    base = CostModel(colour_cost)
    plain = {p: efficiency(g, p, numerator="edges", model=base).value for p in t}
    scaled = {p: efficiency(g, p, numerator="edges", model=base.scaled(factor)).value for p in t}
    for p in t:
        assert scaled[p] == pytest.approx(factor * plain[p])
    assert max(plain, key=lambda p: (plain[p], p)) == max(scaled, key=lambda p: (scaled[p], p))


def _proven_corpus(s):
    g = Hypergraph()
    props = []
    for i in range(3):
        a = T.atom(g, "PQR"[i])
        for _ in range(s % (i + 2)):
            a = T.neg(g, a)
        ax = T.axiom(g, f"h{i}", a)
        g.set_type(ax, a)
        props.append(a)
    return g, props


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_random_corpora_match_oracles(s):
    g = corpora.random_dag(s)
    ol = oracles.lengths(g)
    for n in sorted(g.nodes):
        assert min_complexity(g, n).value == oracles.min_complexity(g, n)
        assert length(g, n).value == ol[n]
