"""Conjecturing, proof search, curation and the discovery loop."""
from .agent import Interest, Novelty, dumps_log, interestingness, novelty, run_loop, seed_corpus
from .conjecture import Conjecture, Equation, generate_conjectures
from .criteria import MalformedLog, criteria_report, render_report, replay
from .search import (
    SearchResult, SearchStats, enumerate_linearized, prove_backward, prove_bidirectional,
    prove_forward, refute,
)
from .synthetic import ChainFamily, bidirectional_search, forward_search

__all__ = [
    "Interest", "Novelty", "dumps_log", "interestingness", "novelty", "run_loop", "seed_corpus",
    "Conjecture", "Equation", "generate_conjectures",
    "MalformedLog", "criteria_report", "render_report", "replay",
    "SearchResult", "SearchStats", "enumerate_linearized", "prove_backward", "prove_bidirectional",
    "prove_forward", "refute",
    "ChainFamily", "bidirectional_search", "forward_search",
]
