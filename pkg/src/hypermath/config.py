"""Run configuration stored as a flat ``key = value`` file."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

ENV_VAR = "HYPERMATH_CONFIG"

# file key -> attribute
KEYS = {
    "seed": "seed",
    "budgets.proofNodes": "proof_nodes",
    "budgets.mineSize": "mine_size",
    "budgets.mineArity": "mine_arity",
    "budgets.normalizeFuel": "normalize_fuel",
    "thresholds.noveltyM": "novelty_m",
    "thresholds.interestFloor": "interest_floor",
    "compressEvery": "compress_every",
    "conjecturesPerStep": "conjectures_per_step",
    "paths.corpusFile": "corpus_file",
    "paths.logFile": "log_file",
    "paths.outDir": "out_dir",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 7
    proof_nodes: int = 400
    mine_size: int = 7
    mine_arity: int = 2
    normalize_fuel: int = 5_000
    novelty_m: int = 3
    interest_floor: float = 1.0
    compress_every: int = 10
    conjectures_per_step: int = 2
    corpus_file: str = ""
    log_file: str = "run.jsonl"
    out_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("proof_nodes", "mine_size", "mine_arity", "normalize_fuel",
                     "novelty_m", "compress_every", "conjectures_per_step"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")

    def dumps(self) -> str:
        lines = [f"{key} = {getattr(self, attr)!r}" if isinstance(getattr(self, attr), float)
                 else f"{key} = {getattr(self, attr)}" for key, attr in KEYS.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if not sep or key not in KEYS:
                raise ConfigError(f"line {n}: unknown or malformed entry {raw.strip()!r}")
            attr = KEYS[key]
            kind = types[attr]
            try:
                values[attr] = int(val) if kind == "int" else float(val) if kind == "float" else val
            except ValueError:
                raise ConfigError(f"line {n}: {key} expects {kind}, got {val!r}") from None
        return cls(**values)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        return cls.loads(Path(path).read_text())


def resolve_path(explicit: str | None) -> str | None:
    """An explicit path wins over the environment variable."""
    return explicit or os.environ.get(ENV_VAR) or None
