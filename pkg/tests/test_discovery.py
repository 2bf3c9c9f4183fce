import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from hypermath.config import RunConfig
from hypermath.corpus import Corpus, EmptyCorpus
from hypermath.discovery import (
    ChainFamily, bidirectional_search, criteria_report, dumps_log, enumerate_linearized,
    forward_search, generate_conjectures, interestingness, novelty, prove_backward,
    prove_bidirectional, prove_forward, refute, replay, run_loop, seed_corpus,
)
from hypermath.discovery.criteria import MalformedLog, parse_log
from hypermath.discovery.search import linear_ratio_bound
from hypermath.discovery.synthetic import fit_slope
from hypermath.kernel import terms as T
from hypermath.kernel.appendix import SUCC_LEFT, SUCC_RIGHT
from hypermath.kernel.syntax import parse
from hypermath.kernel.typing import check_proof

import oracles


def two_atoms():
    c = Corpus()
    g = c.graph
    a, b = T.atom(g, "A"), T.atom(g, "B")
    c.admit(a, T.axiom(g, "a", a))
    c.admit(b, T.axiom(g, "b", b))
    return c, a, b


# -- conjectures ----------------------------------------------------------------

def test_succ_left_is_among_the_conjectures(seed):
    g = seed.graph
    every = generate_conjectures(seed, 10_000, random.Random(0))
    hits = [cj for cj in every if cj.proposition == parse(g, SUCC_LEFT)]
    assert len(hits) == 1 and hits[0].generator == "reverse"


def test_right_identity_is_proposed_by_induction(seed):
    g = seed.graph
    every = generate_conjectures(seed, 10_000, random.Random(0))
    target = parse(g, "(pi (a Nat) (Id Nat (add a zero) a))")
    (hit,) = [cj for cj in every if cj.proposition == target]
    assert hit.generator == "inductive-generalization"


def test_proven_facts_are_never_proposed(seed):
    proven = set(seed.proven)
    for cj in generate_conjectures(seed, 10_000, random.Random(3)):
        assert cj.proposition not in proven


def test_conjecture_count_is_checked(seed):
    with pytest.raises(ValueError):
        generate_conjectures(seed, 0, random.Random(0))
    with pytest.raises(EmptyCorpus):
        generate_conjectures(Corpus(), 3, random.Random(0))


def test_conjecture_order_follows_the_seed(seed):
    a = [cj.text for cj in generate_conjectures(seed, 20, random.Random(5))]
    b = [cj.text for cj in generate_conjectures(seed_corpus(), 20, random.Random(5))]
    assert a == b


# -- provers ---------------------------------------------------------------------

def test_forward_knows_a_proven_goal(seed):
    goal = parse(seed.graph, SUCC_RIGHT)
    res = prove_forward(seed, goal, 100)
    assert res and res.stats.nodes_expanded == 0


def test_forward_proves_one_plus_one(seed):
    goal = parse(seed.graph, "(Id Nat (add (succ zero) (succ zero)) (succ (succ zero)))")
    res = prove_forward(seed, goal, 100)
    assert res
    assert check_proof(seed.graph, res.proof, goal)


def test_forward_with_no_budget():
    c, a, b = two_atoms()
    goal = T.conj(c.graph, T.conj(c.graph, a, b), a)
    res = prove_forward(c, goal, 0)
    assert not res
    assert res.stats.outcome in ("exhausted", "timeout")


def test_backward_reflexivity(seed):
    goal = parse(seed.graph, "(pi (a Nat) (Id Nat a a))")
    res = prove_backward(seed, goal, 50)
    assert res and "refl" in res.tactics


def test_backward_proves_succ_left_by_induction(seed):
    goal = parse(seed.graph, SUCC_LEFT)
    res = prove_backward(seed, goal, 400)
    assert res and "induction" in res.tactics
    assert check_proof(seed.graph, res.proof, goal)


def test_backward_refutes_a_false_sum(seed):
    goal = parse(seed.graph, "(Id Nat (add (succ zero) (succ zero)) (succ (succ (succ zero))))")
    res = prove_backward(seed, goal, 400)
    assert not res
    assert res.counterexample == {"instance": [], "lhs": 2, "rhs": 3}


def test_refute_finds_the_smallest_instance(seed):
    goal = parse(seed.graph, "(pi (a Nat) (Id Nat (add a a) a))")
    assert refute(seed, goal) == {"instance": [1], "lhs": 2, "rhs": 1}


def test_bidirectional_is_deterministic():
    runs = []
    for _ in range(2):
        c = seed_corpus()
        res = prove_bidirectional(c, parse(c.graph, SUCC_LEFT), 400)
        runs.append((res.proof, res.stats.to_json(), res.tactics))
    assert runs[0] == runs[1] and runs[0][0] is not None


# -- linearized deductions ----------------------------------------------------------

def test_linearized_depth_zero():
    c, a, b = two_atoms()
    assert enumerate_linearized(c, None, [a, b], 0).counts == [1]


@pytest.mark.parametrize("size", [1, 2, 5])
def test_linearized_counts_and_ratio(size):
    c = Corpus()
    lib = [T.atom(c.graph, "ABCDE"[i]) for i in range(size)]
    res = enumerate_linearized(c, None, lib, 3)
    assert res.counts == [oracles.linearized_count(2, 1, size, d) for d in range(4)]
    assert res.bound == linear_ratio_bound(size) == 3 * size
    for prev, nxt in zip(res.counts, res.counts[1:]):
        assert nxt / prev <= res.bound


def test_forward_reaches_what_linear_chains_cannot():
    c, a, b = two_atoms()
    g = c.graph
    ab = T.conj(g, a, b)
    goal = T.conj(g, ab, ab)
    assert prove_forward(c, goal, 1_000)
    # each linear step pairs the running statement with a library fact,
    # so a conjunction of two compound halves never appears
    assert enumerate_linearized(c, goal, [a, b], 4).found == []
    chain = enumerate_linearized(c, T.conj(g, ab, a), [a, b], 2, seed=a).found
    assert chain == [(("and-left", b), ("and-left", a))]


def test_linearized_library_must_live_in_the_graph():
    c = Corpus()
    with pytest.raises(ValueError):
        enumerate_linearized(c, None, ["0123456789abcdef"], 1)
    with pytest.raises(ValueError):
        enumerate_linearized(c, None, [], 1)


# -- synthetic chains -------------------------------------------------------------

@pytest.mark.parametrize("depth", [4, 6])
def test_chain_expansions_match_closed_forms(depth):
    fam = ChainFamily(3, 0)
    f = forward_search(fam, depth)
    bi = bidirectional_search(fam, depth)
    assert f.stats.outcome == bi.stats.outcome == "found"
    assert f.stats.nodes_expanded == oracles.forward_chain_expansions(3, depth)
    assert bi.stats.nodes_expanded == oracles.bidirectional_chain_expansions(3, depth)
    assert len(f.path) == len(bi.path) == depth + 1


def test_chain_family_inverts():
    fam = ChainFamily(4, 2)
    x = 12345
    for i, y in enumerate(fam.forward(x)):
        assert fam.backward(y)[i] == x
    with pytest.raises(ValueError):
        ChainFamily(0)


def test_slope_fit_on_exact_powers():
    assert fit_slope([1, 2, 3], [3, 9, 27]) == pytest.approx(1.0986, abs=1e-4)


# -- novelty and interest -----------------------------------------------------------

def test_novelty_labels(seed):
    g = seed.graph
    assert novelty(seed, parse(g, SUCC_RIGHT)).label == "known"
    easy = novelty(seed, parse(g, "(pi (a Nat) (Id Nat a a))"))
    assert easy.label == "easy" and easy.m_estimate < 3
    hard = novelty(seed, parse(g, SUCC_LEFT))
    assert hard.label == "novel" and hard.m_estimate >= 3


def test_interest_prefers_succ_left(appendix_corpus):
    from hypermath.cli import appendix_corpus as build
    g = appendix_corpus.graph
    left = interestingness(appendix_corpus, parse(g, SUCC_LEFT))
    right = interestingness(appendix_corpus, parse(g, SUCC_RIGHT))
    assert right.score < left.score
    # the same facts in a reloaded corpus score the same
    back = Corpus.loads(build().dumps())
    again = interestingness(back, parse(back.graph, SUCC_LEFT))
    assert again.terms() == left.terms()


def test_interest_needs_a_proof(seed):
    from hypermath.metrics import Unproven
    with pytest.raises(Unproven):
        interestingness(seed, parse(seed.graph, SUCC_LEFT))


# -- the loop ------------------------------------------------------------------------

def test_loop_needs_a_step():
    with pytest.raises(ValueError):
        run_loop(seed_corpus(), 0)


def test_loop_is_deterministic():
    _, a = run_loop(seed_corpus(), 4, RunConfig(seed=11))
    _, b = run_loop(seed_corpus(), 4, RunConfig(seed=11))
    assert dumps_log(a) == dumps_log(b)


def test_loop_only_grows_the_proven_set():
    c = seed_corpus()
    seen = set(c.proven)
    for _ in range(3):
        c, _ = run_loop(c, 2, RunConfig(seed=3))
        assert seen <= set(c.proven)
        seen = set(c.proven)


def test_every_admission_was_judged_novel():
    _, events = run_loop(seed_corpus(), 6)
    label = {}
    for ev in events:
        if ev["action"] == "novelty":
            label[ev["t"], ev["nodeIds"][0]] = ev["detail"]["label"]
        if ev["action"] == "admit" and ev["t"] > 0:
            assert label[ev["t"], ev["nodeIds"][0]] == "novel"


def test_events_carry_the_required_fields():
    _, events = run_loop(seed_corpus(), 2)
    assert parse_log(dumps_log(events)) == events
    for ev in events:
        assert set(ev) == {"t", "phase", "action", "nodeIds", "stats", "seedState", "detail"}


# -- criteria ----------------------------------------------------------------------

def test_empty_log_meets_nothing():
    rep = criteria_report([])
    assert {v["status"] for v in rep["criteria"].values()} == {"unmet"}
    assert rep["replay"]["ok"]


def test_tampered_proof_fails_the_replay():
    _, events = run_loop(seed_corpus(), 5)
    assert criteria_report(events)["criteria"]["C2"]["status"] == "satisfied"
    bad = json.loads(json.dumps(events))
    first = next(ev for ev in bad if ev["action"] == "admit" and ev["t"] > 0)
    first["detail"]["proof"] = "(refl zero)"
    rep = criteria_report(bad)
    assert rep["criteria"]["C2"]["status"] == "unmet"
    assert not replay(bad).ok


def test_malformed_log_lines():
    with pytest.raises(MalformedLog):
        parse_log("{not json}\n")
    with pytest.raises(MalformedLog):
        parse_log('{"t": 0}\n')


@given(st.integers(0, 50))
@settings(max_examples=5, deadline=None)
def test_short_runs_replay_cleanly(s):
    _, events = run_loop(seed_corpus(), 2, RunConfig(seed=s))
    assert replay(parse_log(dumps_log(events))).ok
