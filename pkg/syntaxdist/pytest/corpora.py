"""Synthetic corpora for tests that need no UD release."""
from typing import Optional

import numpy as np
import pytest

from syntaxdist.core.conllu import Corpus
from syntaxdist.core.tags import L

__all__ = [
    "make_chain",
    "make_chain_corpus",
    "chain_corpus",
    "toy_corpus",
    "toy_corpora",
]


def make_chain(order: int, rng: np.random.Generator, alphabet: int = L, concentration: float = 0.5):
    """A random order-m chain: one row of next-tag probabilities per context.

    Rows are drawn from a symmetric Dirichlet, so a small ``concentration``
    gives peaked, strongly predictive transitions.
    """
    contexts = alphabet ** order
    return rng.dirichlet(np.full(alphabet, concentration), size=contexts)


def make_chain_corpus(
    order: int,
    tokens: int,
    seed: int = 0,
    *,
    sentence_length: int = 50,
    alphabet: int = L,
    concentration: float = 0.5,
    language_id: str = "xx",
    chain: Optional[np.ndarray] = None,
) -> Corpus:
    """Sample ``tokens`` tags of an order-m chain, cut into sentences of equal length.

    The walk runs continuously across sentence boundaries after a burn-in,
    so every sentence starts from the stationary regime.
    """
    rng = np.random.default_rng(seed)
    if chain is None:
        chain = make_chain(order, rng, alphabet, concentration)
    burn_in = 200
    total = tokens + burn_in
    tags = np.empty(total, dtype=np.int64)
    cdf = np.cumsum(chain, axis=1)
    tags[:order] = rng.integers(0, alphabet, size=order)
    draws = rng.random(total)
    context = 0
    for k in range(order):
        context = context * alphabet + tags[k]
    modulus = alphabet ** order
    for j in range(order, total):
        tag = min(int(np.searchsorted(cdf[context], draws[j], side="right")), alphabet - 1)
        tags[j] = tag
        context = (context * alphabet + tag) % modulus if order else 0
    tags = tags[burn_in:]
    sentences = tokens // sentence_length
    tags = tags[: sentences * sentence_length]
    return Corpus(language_id, tags, np.full(sentences, sentence_length))


@pytest.fixture()
def chain_corpus():
    return make_chain_corpus


@pytest.fixture()
def toy_corpus():
    # DET NOUN VERB PUNCT / PRON VERB ADP DET NOUN PUNCT / NOUN VERB
    return Corpus.from_sentences(
        "en",
        [(5, 7, 14, 12), (10, 14, 1, 5, 7, 12), (7, 14)],
        sources=("toy.conllu",),
    )


@pytest.fixture()
def toy_corpora():
    """Three languages: two near copies of one chain and one of a different chain."""
    rng = np.random.default_rng(7)
    shared = make_chain(1, rng, concentration=0.3)
    other = make_chain(1, rng, concentration=0.3)
    return {
        "aa": make_chain_corpus(1, 20000, 1, chain=shared, language_id="aa"),
        "ab": make_chain_corpus(1, 20000, 2, chain=shared, language_id="ab"),
        "zz": make_chain_corpus(1, 20000, 3, chain=other, language_id="zz"),
    }
