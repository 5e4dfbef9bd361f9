import itertools

import numpy as np
import pytest

from syntaxdist.core.conllu import Corpus
from syntaxdist.core.entropy import Estimator
from syntaxdist.core.errors import InconsistentMarginals, InsufficientData, MissingContext
from syntaxdist.core.memory import (
    SurrogateModel,
    chain_block_distributions,
    estimate_memory,
    gain_curve,
    gains_from_entropies,
    generate_surrogates,
    memory_test,
    predictability_gain_exact,
    predictability_gain_kl,
    stationary_blocks,
)
from syntaxdist.core.ngrams import BlockDistribution, TransitionTable, count_blocks, encode_block
from syntaxdist.core.tags import L
from syntaxdist.pytest import make_chain, make_chain_corpus


def _small_chain(order, symbols, seed):
    """An order-m chain over the first ``symbols`` tags only."""
    rng = np.random.default_rng(seed)
    rows = make_chain(order, rng, alphabet=symbols, concentration=1.0)
    indices, probs = [], []
    for context, digits in enumerate(itertools.product(range(symbols), repeat=order)):
        code = 0
        for digit in digits:
            code = code * L + digit
        for tag in range(symbols):
            indices.append(code * L + tag)
            probs.append(rows[context, tag])
    return TransitionTable(order, indices, probs)


def _exact_dists(order, symbols, seed, r):
    if order == 0:
        rng = np.random.default_rng(seed)
        initial = BlockDistribution(1, np.arange(symbols), rng.dirichlet(np.ones(symbols)))
        return chain_block_distributions(initial, None, r)
    transitions = _small_chain(order, symbols, seed)
    return chain_block_distributions(stationary_blocks(transitions), transitions, r)


@pytest.mark.parametrize("symbols", [2, 3, 4])
@pytest.mark.parametrize("order", [0, 1, 2, 3])
def test_entropy_and_kl_gains_agree(order, symbols):
    if order == 3 and symbols > 2:
        pytest.skip("order-3 contexts over 3+ symbols are slow to iterate")
    dists = _exact_dists(order, symbols, 17 + order * 5 + symbols, 4)
    for u in range(3):
        assert predictability_gain_exact(dists, u) == pytest.approx(
            predictability_gain_kl(dists, u), abs=1e-12
        )


@pytest.mark.parametrize("order", [0, 1, 2])
def test_gain_vanishes_beyond_memory(order):
    dists = _exact_dists(order, 3, 3, 5)
    for u in range(3):
        gain = predictability_gain_exact(dists, u)
        if u >= order:
            assert gain == pytest.approx(0.0, abs=1e-10)
        else:
            assert gain >= -1e-12
    if order:
        assert predictability_gain_exact(dists, order - 1) > 1e-6


def test_chain_distributions_are_consistent():
    dists = _exact_dists(2, 3, 9, 4)
    for r in range(2, 5):
        assert dists[r].probs.sum() == pytest.approx(1.0)
        prefix = dists[r].marginalize_last().to_dict()
        for key, value in dists[r - 1].to_dict().items():
            assert prefix.get(key, 0.0) == pytest.approx(value, abs=1e-12)


def test_iid_chain_is_a_product():
    initial = BlockDistribution(1, [0, 1], [0.25, 0.75])
    pairs = chain_block_distributions(initial, None, 2)[2]
    assert pairs.to_dict() == pytest.approx({0: 1 / 16, 1: 3 / 16, L: 3 / 16, L + 1: 9 / 16})


def test_inconsistent_marginals():
    dists = {
        1: BlockDistribution(1, [0, 1], [0.5, 0.5]),
        2: BlockDistribution(2, [0, 1], [0.5, 0.5]),
    }
    with pytest.raises(InconsistentMarginals):
        predictability_gain_exact(dists, 0)
    with pytest.raises(InconsistentMarginals):
        predictability_gain_kl(dists, 0)


def test_gain_needs_all_sizes():
    with pytest.raises(ValueError):
        predictability_gain_exact({1: BlockDistribution(1, [0], [1.0])}, 0)


def test_gains_from_entropies():
    assert gains_from_entropies([0.0, 1.0, 1.5, 1.75]) == pytest.approx([0.5, 0.25])


def test_gain_curve_of_first_order_chain():
    corpus = make_chain_corpus(1, 200_000, seed=4)
    curve = gain_curve(corpus, Estimator.NSB, max_size=3)
    assert curve.r_max == 3
    assert len(curve.entropies) == 4
    assert curve[0] > 0.2
    assert abs(curve[1]) < 0.02
    assert curve.csv_rows()[0] == [0, curve[0], "nsb"]


def test_gain_curve_needs_data():
    corpus = Corpus.from_sentences("xx", [[1, 2, 3]])
    with pytest.raises(InsufficientData):
        gain_curve(corpus)


def test_surrogates_keep_lengths_and_transitions():
    corpus = make_chain_corpus(2, 30_000, seed=2, sentence_length=30)
    corpus = Corpus.concat("xx", [corpus, Corpus.from_sentences("xx", [[3], [4, 5], [6, 7, 8]])])
    model = SurrogateModel.from_corpus(corpus, 2)
    surrogate = model.generate(corpus.lengths, np.random.default_rng(0), "xx")
    np.testing.assert_array_equal(surrogate.lengths, corpus.lengths)
    observed = set(count_blocks(corpus, 3).indices.tolist())
    assert set(count_blocks(surrogate, 3).indices.tolist()) <= observed
    for sentence in surrogate.sentences:
        if len(sentence) <= 2:
            seen = count_blocks(corpus, len(sentence)).indices.tolist()
            assert encode_block(sentence) in seen


def test_order_zero_surrogate_draws_observed_tags(toy_corpus):
    model = SurrogateModel.from_corpus(toy_corpus, 0)
    surrogate = model.generate([10, 10], np.random.default_rng(1))
    assert set(surrogate.tags.tolist()) <= set(toy_corpus.tags.tolist())


def test_missing_context():
    corpus = Corpus.from_sentences("xx", [[0, 1, 2]])
    model = SurrogateModel.from_corpus(corpus, 1)
    with pytest.raises(MissingContext) as excinfo:
        model.generate([5], np.random.default_rng(0))
    assert excinfo.value.context == 2


def test_generate_surrogates_is_thread_independent():
    corpus = make_chain_corpus(1, 5000, seed=8)
    model = SurrogateModel.from_corpus(corpus, 1)
    one = generate_surrogates(model, corpus.lengths, 4, seed=3, threads=1)
    many = generate_surrogates(model, corpus.lengths, 4, seed=3, threads=4)
    assert one == many
    assert one[0] != one[1]


def test_memory_test_rejects_too_short_memory():
    corpus = make_chain_corpus(1, 20_000, seed=6)
    result = memory_test(corpus, m=0, K=5, seed=1, estimator=Estimator.PLUGIN, threads=1)
    assert result.p_value == 0.0
    assert result.statistic > result.surrogate_mean + 3 * result.surrogate_std
    assert len(result.gains) == len(result.surrogate_means) == 2
    assert result.to_json()["curve"][0]["u"] == 0


def test_memory_test_is_reproducible():
    corpus = make_chain_corpus(1, 20_000, seed=6)
    first = memory_test(corpus, m=1, K=3, seed=9, estimator="plugin", threads=1)
    second = memory_test(corpus, m=1, K=3, seed=9, estimator="plugin", threads=3)
    assert first == second
    assert 0.0 <= first.p_value <= 1.0


def test_memory_test_needs_long_enough_corpus():
    corpus = make_chain_corpus(1, 3000, seed=6)
    with pytest.raises(InsufficientData):
        memory_test(corpus, m=1, K=2)


def test_estimate_memory():
    stds = [0.01] * 4
    assert estimate_memory([0.5, 0.2, 0.01, -0.005], stds) == 2
    assert estimate_memory([0.5, 0.2, 0.1, 0.1], stds) == 4
    assert estimate_memory([0.0, 0.0, 0.0, 0.0], stds) == 0
    with pytest.raises(ValueError):
        estimate_memory([0.1], stds)


@pytest.mark.slow
@pytest.mark.parametrize("order", [0, 1, 2])
def test_memory_test_accepts_true_order(order):
    accepted = 0
    flat = 0
    trials = 50
    for trial in range(trials):
        corpus = make_chain_corpus(order, 200_000, seed=trial, concentration=0.3)
        result = memory_test(corpus, m=order, K=50, seed=trial, estimator=Estimator.NSB)
        assert len(result.gains) > order
        accepted += result.p_value > 0.05
        # Every gain from u = m on lies within 3 surrogate standard deviations of 0.
        flat += estimate_memory(result.gains, result.surrogate_stds, sigmas=3.0) <= order
    assert accepted >= 0.9 * trials
    assert flat >= 0.9 * trials
