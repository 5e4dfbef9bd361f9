"""Markov-chain language models over tag sequences and the identification experiment.

An order-u model scores a sentence by the probability of its first u-block
times the order-u transition probabilities of every following tag. A
sentence is attributed to the language whose model scores it highest.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import attr
import numpy as np

from .conllu import Corpus, TagSequence
from .errors import InsufficientData, SentenceTooShort
from .ngrams import (
    BlockCounts,
    BlockDistribution,
    TransitionTable,
    count_blocks,
    estimate_distribution,
    estimate_transitions,
)
from .tags import L
from .utils import derive_rng, thread_map

__all__ = [
    "LanguageModel",
    "AccuracyReport",
    "fit_model",
    "score_sentence",
    "score_corpus",
    "classify",
    "run_identification_experiment",
]

log = logging.getLogger("syntaxdist.markov")


def _lookup_counts(counts: BlockCounts, keys: np.ndarray) -> np.ndarray:
    if not counts.indices.size:
        return np.zeros(keys.shape, dtype=np.float64)
    pos = np.minimum(np.searchsorted(counts.indices, keys), counts.indices.size - 1)
    return np.where(counts.indices[pos] == keys, counts.counts[pos], 0).astype(np.float64)


@attr.s(frozen=True, slots=True)
class LanguageModel:
    """An order-u Markov model of one language's tag sequences.

    Attributes
    ----------
    language_id : str
    order : int
        The number u of preceding tags each transition conditions on.
    block_counts : BlockCounts
        Counts of blocks of size ``max(u, 1)``; they give the probability of
        the first block of a sentence.
    transition_counts : Optional[BlockCounts]
        Counts of blocks of size ``u + 1``; ``None`` when u = 0.
    alpha : float
        Additive smoothing constant; 0 leaves the maximum-likelihood
        estimates untouched.

    """

    language_id: str = attr.ib()
    order: int = attr.ib(converter=int)
    block_counts: BlockCounts = attr.ib()
    transition_counts: Optional[BlockCounts] = attr.ib(default=None)
    alpha: float = attr.ib(default=0.0, converter=float)
    _context_counts: Optional[BlockCounts] = attr.ib(init=False, repr=False)

    def __attrs_post_init__(self):
        if self.order < 0:
            raise ValueError("Model order must be non-negative")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.block_counts.r != max(self.order, 1):
            raise ValueError("Block counts do not match the model order")
        context_counts = None
        if self.order:
            if self.transition_counts is None or self.transition_counts.r != self.order + 1:
                raise ValueError(f"An order-{self.order} model needs counts of size {self.order + 1}")
            contexts, inverse = np.unique(self.transition_counts.indices // L, return_inverse=True)
            context_counts = BlockCounts(
                self.order, contexts, np.bincount(inverse, weights=self.transition_counts.counts)
            )
        object.__setattr__(self, "_context_counts", context_counts)

    @property
    def stationary(self) -> BlockDistribution:
        return estimate_distribution(self.block_counts)

    @property
    def transitions(self) -> Optional[TransitionTable]:
        if not self.order:
            return None
        return estimate_transitions(self.transition_counts)

    def block_log2_probs(self, blocks: np.ndarray) -> np.ndarray:
        """log2 probabilities of blocks of size ``max(u, 1)``."""
        counts = _lookup_counts(self.block_counts, blocks)
        space = L ** self.block_counts.r
        with np.errstate(divide="ignore"):
            return np.log2(
                (counts + self.alpha) / (self.block_counts.total + self.alpha * space)
            )

    def transition_log2_probs(self, blocks: np.ndarray) -> np.ndarray:
        """log2 p(z | context) for blocks ``context * L + z`` of size ``u + 1``."""
        joint = _lookup_counts(self.transition_counts, blocks)
        context = _lookup_counts(self._context_counts, blocks // L)
        with np.errstate(divide="ignore", invalid="ignore"):
            probs = (joint + self.alpha) / (context + self.alpha * L)
            return np.log2(np.nan_to_num(probs, nan=0.0))


def fit_model(corpus: Corpus, order: int, alpha: float = 0.0) -> LanguageModel:
    """Fit an order-u model to ``corpus`` by maximum likelihood."""
    if order < 0:
        raise ValueError("Model order must be non-negative")
    block_counts = count_blocks(corpus, max(order, 1))
    if block_counts.total == 0:
        raise InsufficientData(f"{corpus.language_id} has no blocks of size {max(order, 1)}")
    transition_counts = count_blocks(corpus, order + 1) if order else None
    return LanguageModel(corpus.language_id, order, block_counts, transition_counts, alpha)


def _block_codes_at(tags: np.ndarray, starts: np.ndarray, r: int) -> np.ndarray:
    codes = np.zeros(starts.shape, dtype=np.int64)
    for k in range(r):
        codes = codes * L + tags[starts + k]
    return codes


def score_corpus(model: LanguageModel, corpus: Corpus) -> np.ndarray:
    """Score every sentence of ``corpus``; see `score_sentence`.

    Returns
    -------
    numpy.ndarray
        One log2 probability per sentence, ``-inf`` where some factor is 0.

    Raises
    ------
    SentenceTooShort
        If a sentence is shorter than ``max(u + 1, 1)`` for u >= 1.

    """
    u = model.order
    lengths = corpus.lengths
    if u and lengths.size and lengths.min() < u + 1:
        raise SentenceTooShort(int(lengths.min()), u)
    tags = corpus.tags.astype(np.int64)
    sentence = np.repeat(np.arange(corpus.sentence_count), lengths)

    if u == 0:
        terms = model.block_log2_probs(tags)
        return _sum_by_sentence(terms, sentence, corpus.sentence_count)

    starts = corpus.offsets
    initial = model.block_log2_probs(_block_codes_at(tags, starts, u))

    width = tags.size - u
    positions = np.arange(max(width, 0))
    inside = sentence[:width] == sentence[u:]
    positions = positions[inside]
    terms = model.transition_log2_probs(_block_codes_at(tags, positions, u + 1))
    return initial + _sum_by_sentence(terms, sentence[positions], corpus.sentence_count)


def _sum_by_sentence(terms: np.ndarray, sentence: np.ndarray, count: int) -> np.ndarray:
    finite = np.isfinite(terms)
    totals = np.bincount(sentence[finite], weights=terms[finite], minlength=count)
    zeros = np.bincount(sentence[~finite], minlength=count) > 0
    totals[zeros] = -np.inf
    return totals


def score_sentence(model: LanguageModel, sentence: TagSequence) -> float:
    """Get the log2 probability of a sentence under ``model``.

    For u = 0 this is ``sum(log2 p(x_k))``. For u >= 1 it is the log2
    probability of the first u-block plus ``log2 p(x_k | x_{k-u} ... x_{k-1})``
    for every later tag.

    Returns
    -------
    float
        ``-inf`` when any factor is 0.

    Raises
    ------
    SentenceTooShort
        If the sentence has fewer than ``u + 1`` tags (or is empty).

    """
    if len(sentence) < model.order + 1:
        raise SentenceTooShort(len(sentence), model.order)
    corpus = Corpus(model.language_id, list(sentence), [len(sentence)])
    return float(score_corpus(model, corpus)[0])


def classify(sentence: TagSequence, models: Sequence[LanguageModel]) -> Optional[str]:
    """Attribute a sentence to the language whose model scores it highest.

    Returns
    -------
    Optional[str]
        The language id, or ``None`` when the highest score is shared
        (including when every model scores ``-inf``).

    """
    if len(models) < 2:
        raise ValueError("Classification needs at least two models")
    if len({model.order for model in models}) != 1:
        raise ValueError("All models must have the same order")
    scores = np.array([score_sentence(model, sentence) for model in models])
    best = scores.max()
    winners = np.flatnonzero(scores == best)
    if winners.size != 1:
        return None
    return models[int(winners[0])].language_id


@attr.s(frozen=True, slots=True, auto_attribs=True)
class AccuracyReport:
    """Identification accuracy of one language at one model order.

    Attributes
    ----------
    language_id : str
    order : int
    mean_accuracy : float
    std_accuracy : float
        Sample standard deviation over repetitions; 0 for one repetition.
    repetitions : int
    K : int
        Test sentences per repetition.
    accuracies : Tuple[float, ...]
        The accuracy of every repetition.

    """

    language_id: str
    order: int
    mean_accuracy: float
    std_accuracy: float
    repetitions: int
    K: int
    accuracies: Tuple[float, ...] = attr.ib(converter=tuple, default=())

    def csv_row(self) -> list:
        return [self.language_id, self.order, self.mean_accuracy, self.std_accuracy]


def _correct(scores: np.ndarray, truth: int) -> np.ndarray:
    """Whether the true language strictly beats every other one, per sentence."""
    others = np.delete(scores, truth, axis=0).max(axis=0)
    return scores[truth] > others


def run_identification_experiment(
    corpora: Sequence[Corpus],
    orders: Sequence[int] = (0, 1, 2, 3),
    K: int = 1000,
    repetitions: int = 10,
    length_range: Tuple[int, int] = (5, 20),
    seed: Optional[int] = None,
    *,
    alpha: float = 0.0,
    threads: Optional[int] = None,
) -> List[AccuracyReport]:
    """Measure how often held-out sentences are attributed to their own language.

    In every repetition K sentences with a length in ``length_range`` are
    drawn without replacement from each language and held out; the models of
    all languages are fitted on the remaining sentences. A sentence counts as
    correct only when its own language's score is strictly the highest.

    Parameters
    ----------
    corpora : Sequence[Corpus]
        At least two languages.
    orders : Sequence[int]
        Model orders u to evaluate.
    K : int
        Test sentences per language and repetition.
    repetitions : int
    length_range : Tuple[int, int]
        Inclusive bounds on test sentence length.
    seed : Optional[int]
    alpha : float
        Additive smoothing for the models; 0 reproduces plain counting.
    threads : Optional[int]
        Repetitions run in parallel on this many threads.

    Returns
    -------
    List[AccuracyReport]
        One report per language and order, languages in input order.

    Raises
    ------
    InsufficientData
        If a language has fewer than K sentences in the length range.

    """
    if len(corpora) < 2:
        raise ValueError("Identification needs at least two languages")
    if K < 1 or repetitions < 1:
        raise ValueError("K and repetitions must be positive")
    shortest, longest = length_range
    if shortest < max(orders) + 1:
        raise ValueError(f"Sentences shorter than {max(orders) + 1} cannot be scored at every order")

    eligible = []
    for corpus in corpora:
        candidates = np.flatnonzero((corpus.lengths >= shortest) & (corpus.lengths <= longest))
        if candidates.size < K:
            raise InsufficientData(
                f"{corpus.language_id} has {candidates.size} sentences of {shortest} to "
                f"{longest} tags; {K} are needed"
            )
        eligible.append(candidates)

    def _repetition(rep: int) -> Dict[int, List[float]]:
        tests, models = [], {u: [] for u in orders}
        for corpus, candidates in zip(corpora, eligible):
            rng = derive_rng(seed, f"identify:{corpus.language_id}", rep)
            held_out = rng.choice(candidates, size=K, replace=False)
            tests.append(corpus.select(held_out))
            training = corpus.without(held_out)
            for u in orders:
                models[u].append(fit_model(training, u, alpha))
        accuracy = {}
        for u in orders:
            accuracy[u] = []
            for truth, test in enumerate(tests):
                scores = np.vstack([score_corpus(model, test) for model in models[u]])
                accuracy[u].append(float(np.mean(_correct(scores, truth))))
        return accuracy

    runs = thread_map(_repetition, range(repetitions), threads, desc="Repetitions")

    reports = []
    for index, corpus in enumerate(corpora):
        for u in orders:
            values = np.array([run[u][index] for run in runs])
            std = float(values.std(ddof=1)) if repetitions > 1 else 0.0
            reports.append(
                AccuracyReport(
                    corpus.language_id, u, float(values.mean()), std, repetitions, K, values.tolist()
                )
            )
            log.info(
                "%s, u=%s: accuracy %.4f +- %.4f", corpus.language_id, u, values.mean(), std
            )
    return reports
