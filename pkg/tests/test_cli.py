import csv
import io
import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from hypermath.cli import EXIT_BUDGET, EXIT_OK, EXIT_USAGE, main
from hypermath.config import RunConfig
from hypermath.corpus import Corpus
from hypermath.hypergraph import Hypergraph, export
from hypermath.kernel import terms as T

import goldens

FORMATS = Path(__file__).resolve().parent.parent / "docs" / "formats"


def validator(name):
    schemas = {p.name: json.loads(p.read_text()) for p in FORMATS.glob("*.schema.json")}
    registry = Registry().with_resources(
        (k, Resource.from_contents(v)) for k, v in schemas.items())
    return Draft202012Validator(schemas[name], registry=registry)


def valid(name, doc):
    errors = sorted(validator(name).iter_errors(doc), key=str)
    assert not errors, errors[0]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_rows(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text())))


@pytest.fixture
def short_conf(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(RunConfig(seed=5, compress_every=2).dumps())
    return path


# -- eval and typecheck ----------------------------------------------------------

def test_eval_zero(capsys):
    code, out, _ = run(capsys, "eval", "zero")
    assert code == EXIT_OK
    assert out == "zero\nsteps 0\n"


def test_eval_double_five(capsys):
    code, out, _ = run(capsys, "eval", "(double (succ (succ (succ (succ (succ zero))))))")
    assert code == EXIT_OK
    nf = out.splitlines()[0]
    assert nf.count("succ") == 10 and nf.endswith("zero" + ")" * 10)


def test_eval_parse_error(capsys):
    code, _, err = run(capsys, "eval", "(succ zero")
    assert code == EXIT_USAGE and "error" in err


def test_eval_out_of_fuel(capsys):
    code, _, err = run(capsys, "eval", "(double (succ (succ zero)))", "--fuel", "2")
    assert code == EXIT_BUDGET and "budget" in err


def test_typecheck(capsys):
    code, out, _ = run(capsys, "typecheck", "(succ zero)")
    assert (code, out) == (EXIT_OK, "Nat\n")
    code, out, _ = run(capsys, "typecheck", "(refl zero)", "--against", "(Id Nat zero zero)")
    assert code == EXIT_OK and out.startswith("valid")
    code, out, _ = run(capsys, "typecheck", "(refl zero)", "--against", "(Id Nat zero (succ zero))")
    assert code == EXIT_USAGE and out.startswith("invalid")


def test_usage_errors(capsys):
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    assert run(capsys, "--help")[0] == EXIT_OK


# -- metrics and growth ------------------------------------------------------------

def test_metrics_of_an_empty_corpus(capsys, tmp_path):
    corpus = tmp_path / "empty.json"
    corpus.write_bytes(Corpus().dumps())
    code, _, _ = run(capsys, "metrics", "--corpus", str(corpus), "--out-dir", str(tmp_path / "m"))
    assert code == EXIT_OK
    text = (tmp_path / "m" / "nodes.csv").read_text()
    assert text.count("\n") == 1 and text.startswith("id,kind,depth,m,")


def test_metrics_has_one_row_per_node(capsys, tmp_path):
    c = Corpus()
    T.numeral(c.graph, 3)
    T.atom(c.graph, "A")
    corpus = tmp_path / "c.json"
    corpus.write_bytes(c.dumps())
    assert run(capsys, "metrics", "--corpus", str(corpus), "--out-dir", str(tmp_path))[0] == EXIT_OK
    rows = read_rows(tmp_path / "nodes.csv")
    assert len(rows) == len(c.graph.nodes) == 5
    for row in rows:
        valid("nodes-row.schema.json", row)
    by_kind = {r["kind"]: r for r in rows}
    assert by_kind["NatZero"]["depth"] == "0" and by_kind["Atom"]["m"] == "0"


def test_metrics_of_missing_corpus(capsys, tmp_path):
    code, _, err = run(capsys, "metrics", "--corpus", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path))
    assert code == EXIT_USAGE and "not found" in err


def test_growth(capsys, tmp_path):
    code, out, _ = run(capsys, "growth", "2", "3", "--out-dir", str(tmp_path))
    assert (code, out) == (EXIT_OK, "2,4,16,256\n")
    rows = read_rows(tmp_path / "growth.csv")
    assert [(r["layer"], r["count"]) for r in rows] == [("0", "2"), ("1", "4"), ("2", "16"), ("3", "256")]
    for row in rows:
        valid("growth-row.schema.json", row)


def test_growth_guard(capsys):
    assert run(capsys, "growth", "2", "5")[0] == EXIT_BUDGET
    assert run(capsys, "growth", "1", "5", "--allow-large")[1] == "1,1,1,1,1,1\n"


def test_growth_is_idempotent(capsys, tmp_path):
    run(capsys, "growth", "3", "2", "--out-dir", str(tmp_path))
    first = (tmp_path / "growth.csv").read_bytes()
    run(capsys, "growth", "3", "2", "--out-dir", str(tmp_path))
    assert (tmp_path / "growth.csv").read_bytes() == first


# -- mine, compress, export ----------------------------------------------------------

def test_mine_writes_valid_abstractions(capsys, tmp_path):
    assert run(capsys, "mine", "--out-dir", str(tmp_path), "--top-k", "3")[0] == EXIT_OK
    doc = json.loads((tmp_path / "abstractions.json").read_text())
    valid("abstractions.schema.json", doc)
    assert 1 <= len(doc["abstractions"]) <= 3


def test_compress_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "compress", "--out-dir", str(tmp_path), "--rounds", "2")
    assert code == EXIT_OK and out.startswith("cost ")
    adopted = json.loads((tmp_path / "adopted.json").read_text())
    valid("adopted.schema.json", adopted)
    assert adopted["costs"] == sorted(adopted["costs"], reverse=True)
    valid("corpus.schema.json", json.loads((tmp_path / "corpus.json").read_text()))


def test_export_then_import_is_identity(capsys, tmp_path):
    first = tmp_path / "a.json"
    assert run(capsys, "export", "--output", str(first))[0] == EXIT_OK
    valid("corpus.schema.json", json.loads(first.read_text()))
    second = tmp_path / "b.json"
    assert run(capsys, "export", "--corpus", str(first), "--output", str(second))[0] == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_export_dot(capsys):
    code, out, _ = run(capsys, "export", "--format", "dot")
    assert code == EXIT_OK and out.startswith("digraph")


def test_corrupt_corpus_is_a_usage_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"graph\": 3}")
    assert run(capsys, "export", "--corpus", str(bad))[0] == EXIT_USAGE


# -- discover and report ---------------------------------------------------------------

def test_discover_needs_a_config(capsys, monkeypatch):
    monkeypatch.delenv("HYPERMATH_CONFIG", raising=False)
    code, _, err = run(capsys, "discover", "--steps", "1")
    assert code == EXIT_USAGE and "HYPERMATH_CONFIG" in err


def test_discover_artifacts_match_their_schemas(capsys, tmp_path, short_conf):
    out = tmp_path / "run"
    code, _, _ = run(capsys, "discover", "--config", str(short_conf), "--steps", "4", "--out-dir", str(out))
    assert code == EXIT_OK
    events = [json.loads(ln) for ln in (out / "run.jsonl").read_text().splitlines()]
    for ev in events:
        valid("run-event.schema.json", ev)
    valid("corpus.schema.json", json.loads((out / "corpus.json").read_text()))
    valid("abstractions.schema.json", json.loads((out / "abstractions.json").read_text()))
    valid("report.schema.json", json.loads((out / "report.json").read_text()))


def test_discover_reads_the_environment(capsys, tmp_path, short_conf, monkeypatch):
    monkeypatch.setenv("HYPERMATH_CONFIG", str(short_conf))
    logs = []
    for sub in ("a", "b"):
        assert run(capsys, "discover", "--steps", "2", "--out-dir", str(tmp_path / sub))[0] == EXIT_OK
        logs.append((tmp_path / sub / "run.jsonl").read_bytes())
    assert logs[0] == logs[1]


def test_report_on_a_log(capsys, tmp_path, short_conf):
    run(capsys, "discover", "--config", str(short_conf), "--steps", "3", "--out-dir", str(tmp_path))
    code, out, _ = run(capsys, "report", "--log", str(tmp_path / "run.jsonl"), "--out-dir", str(tmp_path / "r"))
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("C1 ") and "replay: ok" in out
    assert (tmp_path / "r" / "report.txt").read_text() == out


def test_report_on_bad_logs(capsys, tmp_path):
    assert run(capsys, "report", "--log", str(tmp_path / "missing.jsonl"))[0] == EXIT_USAGE
    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n")
    assert run(capsys, "report", "--log", str(bad))[0] == EXIT_USAGE


# -- goldens ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(goldens.BUILDERS))
def test_golden_serializations(name):
    for fname, data in goldens.render(name).items():
        assert (goldens.GOLDEN_DIR / fname).read_bytes() == data, fname


@pytest.mark.parametrize("name", sorted(goldens.BUILDERS))
def test_goldens_match_the_graph_schema(name):
    doc = json.loads((goldens.GOLDEN_DIR / f"{name}.json").read_text())
    valid("graph.schema.json", doc)


def test_empty_graph_matches_the_schema():
    valid("graph.schema.json", json.loads(export(Hypergraph(), "json")))
