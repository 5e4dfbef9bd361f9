from pathlib import Path

import pytest

from syntaxdist.core import data_manager
from syntaxdist.core.config import RunConfig, load_config
from syntaxdist.core.distance import Metric
from syntaxdist.core.entropy import Estimator
from syntaxdist.core.errors import ConfigError


def test_defaults():
    config = RunConfig()
    assert config.block_size == 3
    assert config.metric is Metric.JENSEN_SHANNON
    assert config.estimator is Estimator.NSB
    assert config.languages == ("de", "is", "pt", "cs")
    assert config.ingest.min_tokens == 10000
    assert config.ingest.strip_final_punct is False
    assert config.memory.K == 1000
    assert config.identify.length_range == (5, 20)
    assert config.identify.orders == (0, 1, 2, 3)
    assert config.cluster.k_range == (2, 45)
    assert config.geo.exclude == ("af",)
    assert config.samples.target_tokens == 10000


def test_yaml_round_trip(tmp_path):
    config = RunConfig(data_dir="ud", block_size=2, metric="hellinger").with_overrides(
        **{"geo.permutations": 99, "identify.orders": [1, 2]}
    )
    config.save(tmp_path / "run.yaml")
    loaded = RunConfig.load(tmp_path / "run.yaml")
    assert loaded == config
    assert loaded.data_dir == Path("ud")
    assert loaded.geo.permutations == 99
    assert loaded.identify.orders == (1, 2)


def test_partial_file():
    config = RunConfig.from_yaml("block_size: 4\nmemory:\n  m: 1\n")
    assert config.block_size == 4
    assert config.memory.m == 1
    assert config.memory.K == 1000


def test_empty_file():
    assert RunConfig.from_yaml("") == RunConfig()


@pytest.mark.parametrize(
    "text",
    [
        "colour: red\n",
        "block_size: three\n",
        "block_size: 0\n",
        "block_size: 16\n",
        "metric: euclidean\n",
        "memory:\n  window: 3\n",
        "cluster:\n  k_range: [5, 2]\n",
        "cluster:\n  k_range: [1, 4]\n",
        "identify:\n  orders: []\n",
        "identify:\n  length_range: [1, 20]\n",
        "identify:\n  orders: [0, 6]\n",
        "seed: -1\n",
        "- a list\n",
        "block_size: [unclosed\n",
    ],
)
def test_invalid_config(text):
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "absent.yaml")


def test_overrides_skip_none():
    config = RunConfig().with_overrides(block_size=None, seed=7, **{"ingest.min_tokens": None})
    assert config.seed == 7
    assert config.block_size == 3
    assert config.ingest.min_tokens == 10000


def test_overrides_are_validated():
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(block_size=99)


def test_digest_ignores_locations():
    config = RunConfig()
    moved = config.with_overrides(data_dir="elsewhere", output_dir="out")
    assert moved.digest() == config.digest()
    assert config.with_overrides(seed=1).digest() != config.digest()


def test_load_config(tmp_path, monkeypatch):
    monkeypatch.setattr(data_manager, "user_config_file", tmp_path / "config.yaml")
    assert load_config() == RunConfig()
    (tmp_path / "config.yaml").write_text("seed: 5\n", encoding="utf-8")
    assert load_config().seed == 5
    explicit = tmp_path / "explicit.yaml"
    explicit.write_text("seed: 6\n", encoding="utf-8")
    assert load_config(explicit).seed == 6


def test_length_range_must_cover_highest_order():
    config = RunConfig.from_yaml("identify:\n  length_range: [3, 20]\n  orders: [0, 2]\n")
    assert config.identify.length_range == (3, 20)
    with pytest.raises(ConfigError, match="at least 4 tags"):
        config.with_overrides(**{"identify.orders": [0, 3]})
