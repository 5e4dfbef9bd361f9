import io

import numpy as np
import pytest

from syntaxdist.core.conllu import Corpus, parse_conllu
from syntaxdist.core.errors import DigitOutOfRange, EmptyCounts, InsufficientData
from syntaxdist.core.ngrams import (
    MAX_BLOCK_SIZE,
    BlockCounts,
    BlockDistribution,
    block_name,
    count_block_sizes,
    count_blocks,
    decode_block,
    encode_block,
    estimate_distribution,
    estimate_transitions,
    sample_corpus,
)
from syntaxdist.core.tags import L, PosTag


def test_encode_block():
    assert encode_block([PosTag.ADP, PosTag.DET, PosTag.NOUN]) == 307
    assert encode_block([14, 14]) == L * L - 1
    assert decode_block(307, 3) == (1, 5, 7)
    assert decode_block(7, 3) == (0, 0, 7)


def test_block_name():
    assert block_name(307, 3) == "ADP DET NOUN"


@pytest.mark.parametrize("digits", [[15], [0, -1], [3, 20, 1]])
def test_digit_out_of_range(digits):
    with pytest.raises(DigitOutOfRange):
        encode_block(digits)


def test_decode_out_of_range():
    with pytest.raises(DigitOutOfRange):
        decode_block(L ** 2, 2)


def test_count_blocks_stay_inside_sentences(toy_corpus):
    counts = count_blocks(toy_corpus, 2)
    assert counts.total == 9
    assert counts[encode_block([PosTag.DET, PosTag.NOUN])] == 2
    assert counts[encode_block([PosTag.NOUN, PosTag.VERB])] == 2
    # PUNCT of sentence 1 followed by PRON of sentence 2 is not a block.
    assert counts[encode_block([PosTag.PUNCT, PosTag.PRON])] == 0
    assert count_blocks(toy_corpus, 5).total == 2
    assert count_blocks(toy_corpus, 1).total == toy_corpus.token_count


def test_count_is_empty_for_long_blocks(toy_corpus):
    counts = count_blocks(toy_corpus, 7)
    assert counts.total == 0
    with pytest.raises(EmptyCounts):
        estimate_distribution(counts)


def test_count_block_sizes(toy_corpus):
    counts = count_block_sizes(toy_corpus, [1, 2, 3])
    assert sorted(counts) == [1, 2, 3]
    assert counts[3].total == 2 + 4


def test_distribution_sums_to_one(chain_corpus):
    dist = estimate_distribution(count_blocks(chain_corpus(1, 5000), 3))
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(dist.indices) > 0)


def test_marginals_of_one_sentence():
    corpus = Corpus.from_sentences("xx", [[0, 1, 0, 1, 0, 1, 0]])
    pairs = estimate_distribution(count_blocks(corpus, 2))
    assert pairs.to_dict() == {1: 0.5, L: 0.5}
    assert pairs.marginalize_last().to_dict() == {0: 0.5, 1: 0.5}
    assert pairs.marginalize_first().to_dict() == {0: 0.5, 1: 0.5}


def test_most_probable():
    dist = BlockDistribution.from_mapping(3, {307: 0.5, 0: 0.25, 1: 0.25})
    assert dist.most_probable(2) == [("ADP DET NOUN", 0.5), ("ADJ ADJ ADJ", 0.25)]


def test_distribution_validation():
    with pytest.raises(ValueError):
        BlockDistribution(1, [0, 1], [0.5, 0.6])
    with pytest.raises(ValueError):
        BlockCounts(1, [0, 0], [1, 1])
    with pytest.raises(DigitOutOfRange):
        BlockCounts(1, [L], [1])


def test_transitions(toy_corpus):
    table = estimate_transitions(count_blocks(toy_corpus, 2))
    assert table.order == 1
    assert table.row(PosTag.NOUN) == pytest.approx({PosTag.VERB: 2 / 3, PosTag.PUNCT: 1 / 3})
    assert table.row(PosTag.DET) == {PosTag.NOUN: 1.0}
    assert table.row(PosTag.ADJ) == {}
    matrix, observed = table.dense()
    np.testing.assert_allclose(matrix[observed].sum(axis=1), 1.0)
    assert not observed[PosTag.ADJ]


def test_counts_json_round_trip(toy_corpus):
    counts = count_blocks(toy_corpus, 3)
    assert BlockCounts.from_json(counts.to_json()) == counts


def _uniform_corpus(sentences=100, length=10):
    rng = np.random.default_rng(0)
    return Corpus("xx", rng.integers(0, L, sentences * length), np.full(sentences, length))


def test_sample_corpus_first_crossing():
    corpus = _uniform_corpus()
    samples = sample_corpus(corpus, 250, seed=3)
    assert [s.language_id for s in samples] == ["xx#0", "xx#1", "xx#2", "xx#3"]
    assert all(s.token_count == 250 for s in samples)
    assert sample_corpus(corpus, 250, seed=3) == samples
    assert len(sample_corpus(corpus, 250, seed=3, max_samples=2)) == 2


def test_sample_corpus_is_without_replacement():
    corpus = Corpus.from_sentences("xx", [[i % L] * (1 + i % 4) for i in range(60)])
    samples = sample_corpus(corpus, 20, seed=1)
    # Every sentence of this corpus is distinct.
    seen = [s for sample in samples for s in sample.sentences]
    assert len(set(seen)) == len(seen)
    assert set(seen) <= set(corpus.sentences)
    assert all(sample.token_count >= 20 for sample in samples)


def test_sample_corpus_too_small():
    with pytest.raises(InsufficientData):
        sample_corpus(_uniform_corpus(), 2000)


def test_largest_index_fits_int64():
    # Blocks one tag longer than the largest size still have exact int64 indices.
    longest = encode_block([L - 1] * (MAX_BLOCK_SIZE + 1))
    assert longest == L ** (MAX_BLOCK_SIZE + 1) - 1
    assert int(np.int64(longest)) == longest


LAUNCH = [
    ("Launching", "VERB"),
    ("this", "DET"),
    ("way", "NOUN"),
    ("will", "AUX"),
    ("hopefully", "ADV"),
    ("avoid", "VERB"),
    ("future", "ADJ"),
    ("disasters", "NOUN"),
    (",", "PUNCT"),
    ("giving", "VERB"),
    ("more", "ADJ"),
    ("support", "NOUN"),
    ("towards", "SCONJ"),
    ("NASA", "PROPN"),
    ("revisiting", "VERB"),
    ("the", "DET"),
    ("stars", "NOUN"),
    (".", "PUNCT"),
]


def _launch_conllu():
    lines = ["# text = " + " ".join(word for word, _ in LAUNCH)]
    for i, (word, upos) in enumerate(LAUNCH, 1):
        lines.append("\t".join([str(i), word, word.lower(), upos, "_", "_", "0", "dep", "_", "_"]))
    return io.StringIO("\n".join(lines) + "\n\n")


def test_worked_sentence_counts():
    (tags,) = parse_conllu(_launch_conllu()).sentences
    assert [PosTag(t).name for t in tags] == [upos for _, upos in LAUNCH]

    corpus = parse_conllu(_launch_conllu(), strip_final_punct=True)
    assert corpus.token_count == 17
    unigrams = count_blocks(corpus, 1)
    assert unigrams[PosTag.ADJ] == 2
    assert unigrams[PosTag.VERB] == 4
    assert unigrams[PosTag.PUNCT] == 1
    bigrams = count_blocks(corpus, 2)
    assert bigrams.total == 16
    assert bigrams[encode_block([PosTag.DET, PosTag.NOUN])] == 2
