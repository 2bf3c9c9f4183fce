import sys
from pathlib import Path

import pytest

from hypermath.hypergraph import Hypergraph
from hypermath.kernel import appendix

sys.path.insert(0, str(Path(__file__).resolve().parent))

# acceptance verdicts, filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def graph():
    return Hypergraph()


@pytest.fixture
def arith():
    g = Hypergraph()
    appendix.ensure_arithmetic(g)
    return g


@pytest.fixture(scope="module")
def examples():
    g = Hypergraph()
    return g, appendix.build_appendix_examples(g)


@pytest.fixture
def appendix_corpus():
    from hypermath.cli import appendix_corpus as build
    return build()


@pytest.fixture
def seed():
    from hypermath.discovery import seed_corpus
    return seed_corpus()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0][1:])):
        terminalreporter.write_line(f"{ACCEPTANCE[key]:<4} {key}")
