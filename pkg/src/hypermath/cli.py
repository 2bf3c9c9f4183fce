"""Command-line entry point.

Exit codes: 0 success, 2 usage or precondition failure, 3 budget or fuel
exhausted, 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

from . import metrics
from .abstraction import compress, corpus_cost, mine
from .config import ENV_VAR, ConfigError, RunConfig, resolve_path
from .corpus import Corpus, EmptyCorpus
from .hypergraph import HypergraphError, to_dot
from .kernel import appendix
from .kernel.reduce import FuelExhausted, normalize
from .kernel.syntax import ParseError, parse, show
from .kernel.typing import KernelError, check_proof, infer, nf

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


class LoadError(UsageError):
    pass


def write_atomic(path: str | os.PathLike, data: str | bytes):
    """Write to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def appendix_corpus() -> Corpus:
    """Addition, doubling and the reference proofs and terms."""
    c = Corpus()
    g = c.graph
    ex = appendix.build_appendix_examples(g)
    for prop, proof in ((ex["succ_left"], ex["succ_left_proof"]), (ex["succ_right"], ex["succ_right_proof"])):
        c.admit(prop, proof)
    c.terms.extend([ex["dist_term"]])
    return c


def load_corpus(path: Optional[str]) -> Corpus:
    if not path:
        return appendix_corpus()
    try:
        return Corpus.loads(Path(path).read_bytes())
    except FileNotFoundError:
        raise LoadError(f"corpus file not found: {path}") from None
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError, ValueError, HypergraphError) as exc:
        raise LoadError(f"cannot load corpus {path}: {exc}") from None


def _graph_for_terms(path: Optional[str]):
    c = load_corpus(path) if path else Corpus()
    appendix.ensure_arithmetic(c.graph)
    return c.graph


# -- subcommands -------------------------------------------------------------------

def cmd_eval(args) -> int:
    g = _graph_for_terms(args.corpus)
    t = parse(g, args.term)
    res = normalize(g, t, args.fuel)
    print(show(g, res.node))
    print(f"steps {res.steps}")
    return EXIT_OK


def cmd_typecheck(args) -> int:
    g = _graph_for_terms(args.corpus)
    t = parse(g, args.term)
    if args.against:
        prop = parse(g, args.against)
        res = check_proof(g, t, prop, args.fuel)
        print(res.status + (f": {res.message}" if res.message else ""))
        return {"valid": EXIT_OK, "unknown": EXIT_BUDGET}.get(res.status, EXIT_USAGE)
    print(show(g, nf(g, infer(g, t, (), args.fuel), args.fuel)))
    return EXIT_OK


def cmd_metrics(args) -> int:
    c = load_corpus(args.corpus)
    rows = metrics.node_rows(c.graph, args.budget, args.samples, args.seed)
    write_atomic(Path(args.out_dir) / "nodes.csv", metrics.write_csv(rows, metrics.NODE_COLUMNS))
    print(f"{len(rows)} rows -> {Path(args.out_dir) / 'nodes.csv'}")
    return EXIT_OK


def cmd_growth(args) -> int:
    sizes = metrics.growth_experiment(args.k, args.layers, args.allow_large)
    if args.out_dir:
        write_atomic(Path(args.out_dir) / "growth.csv", metrics.growth_csv(sizes))
    print(",".join(map(str, sizes)))
    return EXIT_OK


def _abstraction_doc(ab) -> dict:
    return {"name": ab.name, "pattern": ab.text, "arity": ab.arity, "utility": ab.utility,
            "occurrences": ab.occurrences, "cost": ab.cost}


def cmd_mine(args) -> int:
    c = load_corpus(args.corpus)
    found = mine(c, args.max_size, args.max_arity, args.top_k)
    doc = {"corpusCost": corpus_cost(c), "abstractions": [_abstraction_doc(a) for a in found]}
    write_atomic(Path(args.out_dir) / "abstractions.json", dumps(doc))
    for a in found:
        print(f"U={a.utility:g} n={a.occurrences} {a.text}")
    return EXIT_OK


def cmd_compress(args) -> int:
    c = load_corpus(args.corpus)
    res = compress(c, args.rounds, args.max_size, args.max_arity)
    doc = {"costs": res.costs, "adopted": [
        dict(_abstraction_doc(a), body=show(c.graph, a.body)) for a in res.adopted]}
    out = Path(args.out_dir)
    write_atomic(out / "adopted.json", dumps(doc))
    write_atomic(out / "corpus.json", c.dumps())
    print("cost " + " -> ".join(f"{x:g}" for x in res.costs))
    return EXIT_OK


def cmd_discover(args) -> int:
    from .discovery import criteria_report, dumps_log, render_report, run_loop, seed_corpus

    path = resolve_path(args.config)
    if not path:
        raise UsageError(f"discover needs a run configuration: pass --config or set {ENV_VAR}")
    try:
        cfg = RunConfig.load(path)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    if args.seed is not None:
        cfg.seed = args.seed
    out = Path(args.out_dir or cfg.out_dir)
    c = load_corpus(cfg.corpus_file) if cfg.corpus_file else seed_corpus()
    c, events = run_loop(c, args.steps, cfg)
    write_atomic(out / cfg.log_file, dumps_log(events))
    write_atomic(out / "corpus.json", c.dumps())
    write_atomic(out / "abstractions.json", dumps({"adopted": c.abstractions}))
    report = criteria_report(events)
    write_atomic(out / "report.json", dumps(report))
    write_atomic(out / "report.txt", render_report(report))
    proven = sum(1 for e in events if e["action"] == "admit" and e["t"] > 0)
    print(f"{args.steps} steps, {proven} admitted, {len(c.abstractions)} abstractions -> {out / cfg.log_file}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .discovery import MalformedLog, criteria_report, render_report

    try:
        data = Path(args.log).read_text()
    except FileNotFoundError:
        raise LoadError(f"log file not found: {args.log}") from None
    try:
        report = criteria_report(data)
    except MalformedLog as exc:
        raise UsageError(f"malformed log: {exc}") from None
    text = render_report(report)
    if args.out_dir:
        write_atomic(Path(args.out_dir) / "report.json", dumps(report))
        write_atomic(Path(args.out_dir) / "report.txt", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_export(args) -> int:
    c = load_corpus(args.corpus)
    data = c.dumps() if args.format == "json" else to_dot(c.graph).encode()
    if args.output:
        write_atomic(args.output, data)
    else:
        sys.stdout.write(data.decode())
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypermath", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, allow_abbrev=False)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("eval", cmd_eval, "normalize a term and print its normal form")
    sp.add_argument("term")
    sp.add_argument("--fuel", type=int, default=10_000)
    sp.add_argument("--corpus")

    sp = add("typecheck", cmd_typecheck, "infer a term's type or check it against a proposition")
    sp.add_argument("term")
    sp.add_argument("--against")
    sp.add_argument("--fuel", type=int, default=5_000)
    sp.add_argument("--corpus")

    sp = add("metrics", cmd_metrics, "write per-node depth, complexity, length and efficiency")
    sp.add_argument("--corpus", help="corpus JSON; defaults to the reference constructions")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--budget", type=int, default=2_000)
    sp.add_argument("--samples", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("growth", cmd_growth, "layer sizes of conjunction-only extension")
    sp.add_argument("k", type=int)
    sp.add_argument("layers", type=int)
    sp.add_argument("--out-dir")
    sp.add_argument("--allow-large", action="store_true")

    sp = add("mine", cmd_mine, "rank candidate abstractions")
    sp.add_argument("--corpus")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--max-size", type=int, default=8)
    sp.add_argument("--max-arity", type=int, default=2)
    sp.add_argument("--top-k", type=int, default=5)

    sp = add("compress", cmd_compress, "adopt abstractions while they pay for themselves")
    sp.add_argument("--corpus")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--rounds", type=int, default=3)
    sp.add_argument("--max-size", type=int, default=8)
    sp.add_argument("--max-arity", type=int, default=2)

    sp = add("discover", cmd_discover, "run the discovery loop")
    sp.add_argument("--config", help=f"key=value run configuration (or set {ENV_VAR})")
    sp.add_argument("--steps", type=int, default=50)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-dir")

    sp = add("report", cmd_report, "evaluate a run log against the discovery criteria")
    sp.add_argument("--log", required=True)
    sp.add_argument("--out-dir")

    sp = add("export", cmd_export, "serialize a corpus")
    sp.add_argument("--corpus")
    sp.add_argument("--format", choices=("json", "dot"), default="json")
    sp.add_argument("--output")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ConfigError, EmptyCorpus, KernelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FuelExhausted, metrics.GuardExceeded) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except Exception as exc:  # anything else is a broken invariant
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
