"""Self-assessment of a run log against the ten discovery-agent criteria.

Every verdict carries evidence pointers: 1-based line numbers into the log.
``satisfied`` is only ever given when those lines replay through the kernel
or point at recorded, recomputable numbers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from ..hypergraph import Hypergraph
from ..kernel import terms as T
from ..kernel.syntax import ParseError, parse
from ..kernel.typing import KernelError, check_proof, define, rebind

REQUIRED = ("t", "phase", "action", "nodeIds", "stats", "seedState")
SATISFIED, PARTIAL, UNMET = "satisfied", "partial", "unmet"

CRITERIA = {
    "C1": "open-ended language for statements and definitions",
    "C2": "proofs are machine-verifiable",
    "C3": "judges novelty against its current corpus",
    "C4": "proposes conjectures and proves them",
    "C5": "introduces new definitions",
    "C6": "selects which results to keep",
    "C7": "records reasons for its selections",
    "C8": "pursues a research program",
    "C9": "results validated independently",
    "C10": "closed loop: new knowledge feeds later discovery",
}


class MalformedLog(ValueError):
    pass


def parse_log(data: str | bytes | Iterable[dict]) -> list[dict]:
    if isinstance(data, (str, bytes)):
        text = data.decode() if isinstance(data, bytes) else data
        events = []
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedLog(f"line {n}: {exc.msg}") from None
    else:
        events = list(data)
    for n, ev in enumerate(events, 1):
        if not isinstance(ev, dict) or any(k not in ev for k in REQUIRED):
            raise MalformedLog(f"line {n}: event lacks one of {', '.join(REQUIRED)}")
        if not isinstance(ev["nodeIds"], list) or not isinstance(ev["stats"], dict):
            raise MalformedLog(f"line {n}: nodeIds must be a list and stats an object")
    return events


@dataclass
class Replay:
    checked: list[int] = field(default_factory=list)
    defined: list[int] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    graph: Hypergraph = field(default_factory=Hypergraph)

    @property
    def ok(self) -> bool:
        return not self.failures


def replay(events: list[dict]) -> Replay:
    """Rebuild definitions and re-check every recorded proof in a fresh graph."""
    r = Replay()
    g = r.graph

    def fail(line, msg):
        r.failures.append({"line": line, "message": msg})

    def check(line, prop_text, proof_text, ids):
        try:
            prop, proof = parse(g, prop_text), parse(g, proof_text)
        except ParseError as exc:
            return fail(line, f"unparsable: {exc}")
        if ids is not None and list(ids) != [prop, proof]:
            return fail(line, "recorded node ids differ from the replayed terms")
        res = check_proof(g, proof, prop)
        if not res:
            return fail(line, f"kernel rejects proof: {res.message}")
        r.checked.append(line)

    def bind(line, name, text, ids=None, new=True):
        try:
            body = parse(g, text)
            if ids is not None and list(ids) != [T.defref(g, name), body]:
                return fail(line, "recorded node ids differ from the replayed definition")
            (define if new else rebind)(g, name, body)
        except (ParseError, KernelError) as exc:
            return fail(line, f"definition {name!r} does not replay: {exc}")
        r.defined.append(line)

    for line, ev in enumerate(events, 1):
        d = ev.get("detail", {})
        act = ev["action"]
        if act == "define":
            bind(line, d.get("name", ""), d.get("text", ""), ev["nodeIds"])
        elif act == "admit":
            check(line, d.get("proposition", ""), d.get("proof", ""), ev["nodeIds"])
        elif act in ("adopt", "reuse"):
            if act == "adopt":
                bind(line, d.get("name", ""), d.get("text", ""), ev["nodeIds"])
            for item in d.get("rewritten", []):
                if item.get("kind") == "def":
                    bind(line, item["name"], item["text"], new=False)
                elif item.get("kind") == "proof":
                    check(line, item["proposition"], item["text"], [item["propNode"], item["node"]])
    return r


def _lines(events, *actions) -> list[int]:
    return [i for i, ev in enumerate(events, 1) if ev["action"] in actions]


def criteria_report(data) -> dict:
    events = parse_log(data)
    rep = replay(events)
    failed = {f["line"] for f in rep.failures}
    good = set(rep.checked) | set(rep.defined)
    out: dict[str, dict] = {}

    def verdict(key, status, evidence, note):
        if status == SATISFIED and not evidence:
            status = PARTIAL if evidence is not None else UNMET
        out[key] = {"status": status, "evidence": sorted(set(evidence or [])), "note": note,
                    "criterion": CRITERIA[key]}

    admits = [i for i in _lines(events, "admit") if events[i - 1]["t"] > 0]
    good_admits = [i for i in admits if i in good and i not in failed]
    adopts = [i for i in _lines(events, "adopt")
              if i in good and i not in failed and events[i - 1]["detail"].get("utility", 0) > 0]
    novelty = _lines(events, "novelty")
    labels = {events[i - 1]["detail"].get("label") for i in novelty}
    rejects = _lines(events, "reject")
    scores = _lines(events, "score")
    proposals = _lines(events, "propose")

    # C1: statements and definitions are written in the kernel's term language,
    # which grows only by definitions; new type formers are out of reach
    lang = admits + adopts
    verdict("C1", PARTIAL if lang else UNMET, lang,
            "statements use a fixed dependent type fragment extended by definitions")

    if rep.failures:
        verdict("C2", UNMET, sorted(failed), "replay failed: " + "; ".join(
            f"line {f['line']}: {f['message']}" for f in rep.failures[:5]))
    elif good_admits:
        verdict("C2", SATISFIED, sorted(rep.checked), "every recorded proof re-checks in a fresh kernel")
    else:
        verdict("C2", UNMET, [], "no proofs were recorded")

    if "novel" in labels and labels & {"easy", "known"} and good_admits:
        verdict("C3", SATISFIED, novelty, "novelty estimates both admitted and filtered results")
    else:
        verdict("C3", PARTIAL if novelty else UNMET, novelty, "novelty estimated by bounded search")

    conj_admits = [i for i in good_admits if events[i - 1]["detail"].get("generator") not in (None, "seed")]
    verdict("C4", SATISFIED if conj_admits else UNMET, conj_admits + (proposals if conj_admits else []),
            "generated conjectures proven and re-checked")

    verdict("C5", SATISFIED if adopts else UNMET, adopts, "abstractions adopted with positive utility")

    if good_admits and rejects and scores:
        verdict("C6", SATISFIED, good_admits + rejects, "curation admitted some proven results and rejected others")
    else:
        verdict("C6", PARTIAL if (good_admits or rejects) else UNMET, good_admits + rejects, "curation decisions")

    reasoned = [i for i in good_admits if isinstance(events[i - 1]["detail"].get("score"), dict)]
    if good_admits and len(reasoned) == len(good_admits):
        verdict("C7", SATISFIED, reasoned + scores, "each admission records its score and contributing terms")
    else:
        verdict("C7", PARTIAL if scores else UNMET, scores, "scores recorded")

    agenda = _lines(events, "abandon", "refute")
    verdict("C8", PARTIAL if agenda and good_admits else UNMET, agenda,
            "open and settled conjectures are tracked; choosing a research direction needs human judgment")

    verdict("C9", UNMET, rep.checked, "kernel re-checking is not independent validation of significance")

    first_adopt = min(adopts) if adopts else None
    later = [i for i in good_admits if first_adopt is not None and i > first_adopt]
    reuse = _lines(events, "reuse")
    verdict("C10", PARTIAL if later else UNMET, later + reuse + ([first_adopt] if first_adopt else []),
            "results admitted after compression; the loop is closed but its scope is fixed")

    return {"criteria": out, "replay": {"ok": rep.ok, "checked": len(rep.checked),
                                        "definitions": len(rep.defined), "failures": rep.failures},
            "events": len(events)}


def render_report(report: dict) -> str:
    lines = []
    for key in sorted(report["criteria"], key=lambda k: int(k[1:])):
        v = report["criteria"][key]
        ev = ",".join(map(str, v["evidence"][:8])) + ("..." if len(v["evidence"]) > 8 else "")
        lines.append(f"{key:<4} {v['status']:<9} {v['criterion']}; {v['note']} [lines {ev or '-'}]")
    rp = report["replay"]
    lines.append(f"replay: {'ok' if rp['ok'] else 'FAILED'}, {rp['checked']} proofs, {rp['definitions']} definitions")
    return "\n".join(lines) + "\n"
