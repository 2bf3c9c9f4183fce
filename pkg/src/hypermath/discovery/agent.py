"""The conjecture, prove, learn and compress loop."""
from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from ..abstraction import GREEDY, compress, corpus_cost, mine, rewrite
from ..config import RunConfig
from ..corpus import Corpus
from ..kernel import terms as T
from ..kernel.appendix import ADD, DOUBLE, SUCC_RIGHT, SUCC_RIGHT_PROOF, ensure_arithmetic
from ..kernel.syntax import parse, show
from ..metrics import UNIT, CostModel, Unproven, efficiency
from .conjecture import Conjecture, Equation, generate_conjectures
from .search import TACTICS, BackwardProver, SearchResult, prove_bidirectional

SEED_EQUATION = Equation(("call", "add", (("var", "a"), ("succ", ("var", "b")))),
                         ("succ", ("call", "add", (("var", "a"), ("var", "b")))))


def seed_corpus() -> Corpus:
    """Addition, doubling, and the definitional fact a + S b = S(a + b)."""
    c = Corpus()
    g = c.graph
    ensure_arithmetic(g)
    c.info["def:add"] = {"arity": 2, "text": ADD}
    c.info["def:double"] = {"arity": 1, "text": DOUBLE}
    prop = parse(g, SUCC_RIGHT)
    res = c.admit(prop, parse(g, SUCC_RIGHT_PROOF))
    assert res, res.message
    c.info[prop] = {"text": SUCC_RIGHT, "equation": SEED_EQUATION.to_json(),
                    "generator": "seed", "parents": []}
    return c


# -- novelty and interestingness ---------------------------------------------------

@dataclass
class Novelty:
    label: str  # known | easy | novel
    m_estimate: Optional[int]
    search: Optional[SearchResult] = None


def novelty(c: Corpus, prop: str, threshold: int = 3, budget: int = 400,
            order=TACTICS) -> Novelty:
    """Classify ``prop`` by how many deduction steps the corpus needs to reach it."""
    if c.is_proven(prop):
        return Novelty("known", 0)
    res = BackwardProver(c, budget, order).prove(prop)
    if res and res.steps < threshold:
        return Novelty("easy", res.steps, res)
    return Novelty("novel", res.steps if res else None, res)


@dataclass
class Interest:
    score: float
    efficiency: float
    utility: float
    cost: float

    def terms(self) -> dict:
        return {"efficiency": _round(self.efficiency), "utility": _round(self.utility),
                "corpusCost": _round(self.cost), "score": _round(self.score)}


def _round(x: float) -> float:
    return round(float(x), 9)


def interestingness(c: Corpus, prop: str, budget: int = 20_000, proof: Optional[str] = None,
                    model: CostModel = UNIT, mine_size: int = 6, mine_arity: int = 1) -> Interest:
    """Efficiency plus the best compression the proof offers, relative to corpus cost."""
    if proof is None:
        proof = c.proof_of(prop)
    if proof is None:
        raise Unproven(prop)
    eff = efficiency(c.graph, prop, budget).value
    temporary = proof not in c.proven.get(prop, [])
    if temporary:
        c.proven.setdefault(prop, []).append(proof)
    try:
        cost = corpus_cost(c, model)
        best = mine(c, mine_size, mine_arity, 1, model, roots=[proof], evaluate_limit=6)
    finally:
        if temporary:
            c.proven[prop].remove(proof)
            if not c.proven[prop]:
                del c.proven[prop]
    u = max([0.0] + [a.utility for a in best])
    return Interest(eff + (u / cost if cost else 0.0), eff, u, cost)


# -- the loop -------------------------------------------------------------------

def rng_state(rng: random.Random) -> str:
    return hashlib.blake2b(repr(rng.getstate()).encode(), digest_size=8).hexdigest()


class _Log:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.events: list[dict] = []

    def emit(self, t: int, phase: str, action: str, node_ids=(), stats=None, **detail):
        self.events.append({"t": t, "phase": phase, "action": action, "nodeIds": list(node_ids),
                            "stats": stats or {}, "seedState": rng_state(self.rng), "detail": detail})


def dumps_log(events: list[dict]) -> str:
    return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in events)


def _seed_events(c: Corpus, log: _Log):
    g = c.graph
    for name, body in g.definitions.items():
        log.emit(0, "seed", "define", [T.defref(g, name), body], name=name, text=show(g, body))
    for prop, proofs in c.proven.items():
        for p in proofs:
            log.emit(0, "seed", "admit", [prop, p], proposition=show(g, prop), proof=show(g, p),
                     generator=c.info.get(prop, {}).get("generator", "seed"))


def _rewritten(g, out) -> list[dict]:
    entries = []
    for label, (_, new) in sorted(out.rewritten.items(), key=lambda kv: repr(kv[0])):
        if label[0] == "def":
            entries.append({"kind": "def", "name": label[1], "text": show(g, new), "node": new})
        elif label[0] == "proof":
            entries.append({"kind": "proof", "proposition": show(g, label[1]), "propNode": label[1],
                            "text": show(g, new), "node": new})
    return entries


def _compress_events(c: Corpus, t: int, cfg: RunConfig, adopted: list, log: _Log):
    g = c.graph
    # terms admitted since the last round may contain earlier abstractions' patterns
    for ab in adopted:
        out = rewrite(c, ab, GREEDY)
        if out.rewritten:
            log.emit(t, "compression", "reuse", [T.defref(g, ab.name)],
                     {"costBefore": out.cost_before, "costAfter": out.cost_after, "occurrences": out.occurrences},
                     name=ab.name, rewritten=_rewritten(g, out))
    res = compress(c, rounds=2, max_size=cfg.mine_size, max_arity=cfg.mine_arity)
    for ab, out in zip(res.adopted, res.outcomes):
        adopted.append(ab)
        log.emit(t, "compression", "adopt", [T.defref(g, ab.name), ab.body],
                 {"costBefore": out.cost_before, "costAfter": out.cost_after, "occurrences": out.occurrences},
                 name=ab.name, text=show(g, ab.body), pattern=ab.text, utility=out.utility,
                 rewritten=_rewritten(g, out))
    if not res.adopted:
        log.emit(t, "compression", "no-abstraction", [], {"cost": res.costs[-1]})


def run_loop(c: Corpus, steps: int, config: Optional[RunConfig] = None,
             seed: Optional[int] = None) -> tuple[Corpus, list[dict]]:
    """Run ``steps`` rounds of the loop on ``c`` (mutated in place)."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    cfg = config or RunConfig()
    rng = random.Random(cfg.seed if seed is None else seed)
    log = _Log(rng)
    _seed_events(c, log)
    settled: set[str] = set()
    wins: Counter = Counter()
    order = list(TACTICS)
    scratch: dict = {}
    adopted: list = []
    for t in range(1, steps + 1):
        conjs = generate_conjectures(c, cfg.conjectures_per_step, rng, scratch, settled)
        log.emit(t, "goal-generation", "propose", [cj.proposition for cj in conjs],
                 conjectures=[{"text": cj.text, "generator": cj.generator, "parents": list(cj.parents)}
                              for cj in conjs])
        for cj in conjs:
            _attempt(c, cj, t, cfg, order, wins, log)
            settled.add(cj.proposition)
        new_order = sorted(TACTICS, key=lambda k: (-wins[k], TACTICS.index(k)))
        if new_order != order:
            order = new_order
            log.emit(t, "learning", "reorder", [], {"successes": dict(sorted(wins.items()))}, order=order)
        if t % cfg.compress_every == 0:
            _compress_events(c, t, cfg, adopted, log)
    c.log.extend(log.events)
    return c, log.events


def _attempt(c: Corpus, cj: Conjecture, t: int, cfg: RunConfig, order, wins: Counter, log: _Log):
    g = c.graph
    prop = cj.proposition
    # novelty is judged against the corpus as it stood before this attempt
    nov = novelty(c, prop, cfg.novelty_m, cfg.proof_nodes, order)
    log.emit(t, "attempt", "novelty", [prop], nov.search.stats.to_json() if nov.search else {},
             label=nov.label, mEstimate=nov.m_estimate, threshold=cfg.novelty_m)
    res = prove_bidirectional(c, prop, cfg.proof_nodes, order, fuel=cfg.normalize_fuel)
    if not res:
        if res.counterexample is not None:
            cj.mark("refuted")
            log.emit(t, "attempt", "refute", [prop], res.stats.to_json(),
                     proposition=cj.text, counterexample=res.counterexample)
        else:
            cj.mark("abandoned")
            log.emit(t, "attempt", "abandon", [prop] + [p for p, _ in res.partial], res.stats.to_json(),
                     proposition=cj.text, partial=len(res.partial))
        return
    cj.mark("proven")
    for k in res.tactics:
        wins[k] += 1
    log.emit(t, "attempt", "prove", [prop, res.proof], res.stats.to_json(),
             proposition=cj.text, steps=res.steps, tactics=res.tactics)
    interest = interestingness(c, prop, proof=res.proof)
    log.emit(t, "curation", "score", [prop], {}, **interest.terms())
    if nov.label != "novel":
        log.emit(t, "curation", "reject", [prop], {}, reason=nov.label, score=_round(interest.score))
        return
    if interest.score < cfg.interest_floor:
        log.emit(t, "curation", "reject", [prop], {}, reason="below-floor", score=_round(interest.score))
        return
    ok = c.admit(prop, res.proof, cfg.normalize_fuel)
    if not ok:
        log.emit(t, "curation", "reject", [prop], {}, reason="kernel", message=ok.message)
        return
    c.info[prop] = {"text": cj.text, "equation": cj.equation.to_json() if cj.equation else None,
                    "generator": cj.generator, "parents": list(cj.parents)}
    log.emit(t, "curation", "admit", [prop, res.proof], {}, proposition=show(g, prop),
             proof=show(g, res.proof), generator=cj.generator, score=interest.terms())
