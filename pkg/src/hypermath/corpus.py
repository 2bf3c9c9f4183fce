"""The agent's knowledge state: a graph plus definitions, proofs and a log."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .hypergraph import Hypergraph, dumps_json, from_json, to_json
from .kernel.typing import CheckResult, check_proof


class EmptyCorpus(ValueError):
    pass


@dataclass
class Corpus:
    graph: Hypergraph = field(default_factory=Hypergraph)
    # proposition -> proofs, oldest first; several proofs of one proposition are kept apart
    proven: dict[str, list[str]] = field(default_factory=dict)
    terms: list[str] = field(default_factory=list)
    abstractions: list[dict] = field(default_factory=list)
    info: dict[str, dict] = field(default_factory=dict)
    log: list[dict] = field(default_factory=list)

    @property
    def definitions(self) -> dict[str, str]:
        return self.graph.definitions

    def programs(self) -> list[tuple[tuple, str]]:
        """Every term the corpus stores, labelled by where it lives."""
        out: list[tuple[tuple, str]] = []
        for name, body in sorted(self.graph.definitions.items()):
            out.append((("def", name), body))
        for prop, proofs in self.proven.items():
            for i, p in enumerate(proofs):
                out.append((("proof", prop, i), p))
        for i, t in enumerate(self.terms):
            out.append((("term", i), t))
        return out

    def is_proven(self, prop: str) -> bool:
        return bool(self.proven.get(prop))

    def proof_of(self, prop: str) -> Optional[str]:
        ps = self.proven.get(prop)
        return ps[-1] if ps else None

    def admit(self, prop: str, proof: str, fuel: int = 5_000) -> CheckResult:
        """Record ``proof`` for ``prop`` only if the kernel accepts it."""
        res = check_proof(self.graph, proof, prop, fuel)
        if res:
            ps = self.proven.setdefault(prop, [])
            if proof not in ps:
                ps.append(proof)
        return res

    def replace(self, label: tuple, new: str):
        if label[0] == "def":
            self.graph.definitions[label[1]] = new
        elif label[0] == "proof":
            self.proven[label[1]][label[2]] = new
        else:
            self.terms[label[1]] = new

    def live_nodes(self) -> set[str]:
        roots = [t for _, t in self.programs()] + list(self.proven)
        return self.graph.ancestors(roots)

    def copy(self) -> "Corpus":
        return Corpus(self.graph.copy(), {k: list(v) for k, v in self.proven.items()},
                      list(self.terms), [dict(a) for a in self.abstractions],
                      {k: dict(v) for k, v in self.info.items()}, list(self.log))

    def to_json(self) -> dict:
        return {
            "graph": to_json(self.graph),
            # a list keeps insertion order through sort_keys serialization
            "proven": [[k, list(v)] for k, v in self.proven.items()],
            "terms": list(self.terms),
            "abstractions": self.abstractions,
            "info": self.info,
        }

    def dumps(self) -> bytes:
        return json.dumps(self.to_json(), indent=1, sort_keys=True).encode()

    @classmethod
    def from_json(cls, doc: dict) -> "Corpus":
        if "graph" not in doc:
            # a bare graph document
            return cls(from_json(doc))
        return cls(from_json(doc["graph"]), {k: list(v) for k, v in doc.get("proven", [])},
                   list(doc.get("terms", [])), list(doc.get("abstractions", [])),
                   dict(doc.get("info", {})))

    @classmethod
    def loads(cls, data: bytes | str) -> "Corpus":
        return cls.from_json(json.loads(data))


def graph_bytes(c: Corpus) -> bytes:
    return dumps_json(c.graph)
