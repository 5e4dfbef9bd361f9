import math

import numpy as np
import pytest

from syntaxdist.core.conllu import Corpus
from syntaxdist.core.entropy import (
    Estimator,
    block_entropies,
    entropy_nsb,
    entropy_plugin,
    estimate_entropy,
    r_max,
)
from syntaxdist.core.errors import InsufficientData
from syntaxdist.core.ngrams import BlockCounts, BlockDistribution, count_blocks, estimate_distribution
from syntaxdist.core.tags import L, PosTag


def _counts_from_draws(draws, r):
    indices, counts = np.unique(draws, return_counts=True)
    return BlockCounts(r, indices, counts)


def test_plugin_uniform():
    dist = BlockDistribution(2, [0, 1, 2, 3], [0.25] * 4)
    estimate = entropy_plugin(dist)
    assert estimate.value == pytest.approx(2.0, abs=1e-12)
    assert estimate.estimator is Estimator.PLUGIN
    assert estimate.posterior_std is None


def test_plugin_point_mass():
    assert entropy_plugin(BlockDistribution(1, [3], [1.0])).value == 0.0


def test_nsb_agrees_with_plugin_when_well_sampled():
    rng = np.random.default_rng(11)
    probs = rng.dirichlet(np.ones(L))
    counts = _counts_from_draws(rng.choice(L, size=100_000, p=probs), 1)
    nsb = entropy_nsb(counts)
    plugin = entropy_plugin(estimate_distribution(counts))
    assert nsb.value == pytest.approx(plugin.value, abs=0.01)
    assert 0 < nsb.posterior_std < 0.05


def _undersampled_trial(seed):
    rng = np.random.default_rng(seed)
    truth = math.log2(L ** 3)
    counts = _counts_from_draws(rng.integers(0, L ** 3, size=200), 3)
    nsb = entropy_nsb(counts)
    plugin = entropy_plugin(estimate_distribution(counts))
    assert nsb.value <= truth + 1e-9
    return abs(nsb.value - truth) < abs(plugin.value - truth)


def test_nsb_beats_plugin_when_undersampled():
    assert _undersampled_trial(5)


@pytest.mark.slow
def test_nsb_beats_plugin_in_most_undersampled_trials():
    wins = sum(_undersampled_trial(seed) for seed in range(100))
    assert wins >= 95


def test_nsb_without_coincidences(caplog):
    counts = BlockCounts(2, [0, 5, 17, 40], [1, 1, 1, 1])
    estimate = entropy_nsb(counts)
    assert estimate.no_coincidences
    assert 0 <= estimate.value <= math.log2(L ** 2)
    assert "No coincidences" in caplog.text


def test_nsb_needs_two_observations():
    with pytest.raises(InsufficientData):
        entropy_nsb(BlockCounts(1, [4], [1]))


def test_nsb_point_mass():
    estimate = entropy_nsb(BlockCounts(1, [int(PosTag.NOUN)], [1000]))
    assert estimate.value == pytest.approx(0.0, abs=0.01)


def test_nsb_single_outcome_alphabet():
    estimate = entropy_nsb(BlockCounts(1, [0], [7]), alphabet_size=1)
    assert estimate.value == 0.0


def test_nsb_alphabet_too_small():
    with pytest.raises(ValueError):
        entropy_nsb(BlockCounts(1, [0, 1, 2], [1, 2, 3]), alphabet_size=2)


def test_estimate_entropy_dispatch(toy_corpus):
    counts = count_blocks(toy_corpus, 1)
    assert estimate_entropy(counts, "plugin").estimator is Estimator.PLUGIN
    assert estimate_entropy(counts, Estimator.NSB).estimator is Estimator.NSB


def test_block_entropies(chain_corpus):
    corpus = chain_corpus(1, 20000)
    entropies = block_entropies(corpus, 3, Estimator.PLUGIN)
    assert sorted(entropies) == [0, 1, 2, 3]
    assert entropies[0].value == 0.0
    values = [entropies[r].value for r in range(4)]
    assert values == sorted(values)


@pytest.mark.parametrize(
    "tokens, expected",
    [(L, 2), (L ** 2 - 1, 2), (L ** 3 - 1, 2), (L ** 3, 3), (L ** 4 + 5, 4)],
)
def test_r_max(tokens, expected):
    corpus = Corpus("xx", np.arange(tokens) % L, [tokens])
    assert r_max(count_blocks(corpus, 1)) == expected


def test_r_max_errors(toy_corpus):
    with pytest.raises(InsufficientData):
        r_max(count_blocks(toy_corpus, 1), alphabet_size=100)
    with pytest.raises(ValueError):
        r_max(count_blocks(toy_corpus, 2))
