import pytest

from core.config import RunConfig, load_config
from core.errors import ConfigError


def test_defaults():
    cfg = load_config()
    assert cfg.simplify.depth_threshold == 2
    assert cfg.simplify.max_steps == 30
    assert cfg.splits() == {"train": 50000, "dev": 1000, "test": 2000}
    assert cfg.generation.alphabet == tuple("abcdefgh")


def test_yaml_then_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "generation:\n  alphabet: [p, q, r]\n  depth_max: 4\ndataset:\n  seed: 9\nendpoint:\n  model: local\n",
        encoding="utf-8",
    )
    cfg = load_config(path, {"dataset": {"seed": 10}})
    assert cfg.generation.alphabet == ("p", "q", "r")
    assert cfg.generation.depth_max == 4
    assert cfg.dataset.seed == 10
    assert cfg.endpoint.model == "local"


@pytest.mark.parametrize(
    "overrides",
    [
        {"nope": 1},
        {"dataset": {"sed": 1}},
        {"dataset": 3},
        {"generation": {"depth_min": 7, "depth_max": 3}},
        {"simplify": {"depth_threshold": 0}},
    ],
)
def test_bad_config(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_top_level_must_be_a_mapping(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_digest_is_stable_and_sensitive():
    assert RunConfig().digest() == load_config().digest()
    assert len(RunConfig().digest()) == 64
    assert load_config(overrides={"dataset": {"seed": 1}}).digest() != RunConfig().digest()
