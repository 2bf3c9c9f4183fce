import pytest
from hypothesis import given, strategies as st

from hypermath.config import ENV_VAR, ConfigError, RunConfig, resolve_path


def test_defaults():
    cfg = RunConfig()
    assert cfg.seed == 7
    assert cfg.compress_every == 10
    assert cfg.log_file == "run.jsonl"


def test_round_trip_of_defaults():
    assert RunConfig.loads(RunConfig().dumps()) == RunConfig()


def test_comments_and_blank_lines():
    cfg = RunConfig.loads("# a run\n\nseed = 3  # trailing\nthresholds.interestFloor = 0.5\n")
    assert cfg.seed == 3 and cfg.interest_floor == 0.5
    assert cfg.proof_nodes == RunConfig().proof_nodes


@pytest.mark.parametrize("text", [
    "colour = blue\n",
    "seed 3\n",
    "seed = three\n",
    "budgets.proofNodes = 0\n",
    "compressEvery = -2\n",
])
def test_bad_entries(text):
    with pytest.raises(ConfigError):
        RunConfig.loads(text)


def test_load_from_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("seed = 19\npaths.outDir = results\n")
    cfg = RunConfig.load(path)
    assert (cfg.seed, cfg.out_dir) == (19, "results")


def test_explicit_path_beats_the_environment(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "/from/env.conf")
    assert resolve_path("given.conf") == "given.conf"
    assert resolve_path(None) == "/from/env.conf"
    monkeypatch.delenv(ENV_VAR)
    assert resolve_path(None) is None


@given(st.integers(0, 2 ** 31), st.integers(1, 10_000), st.integers(1, 50),
       st.floats(0, 10, allow_nan=False), st.sampled_from(["out", "runs/a", "x y"]))
def test_round_trip(seed, nodes, every, floor, out_dir):
    cfg = RunConfig(seed=seed, proof_nodes=nodes, compress_every=every, interest_floor=floor, out_dir=out_dir)
    assert RunConfig.loads(cfg.dumps()) == cfg
