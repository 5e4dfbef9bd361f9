"""Predictability gain, Markov surrogates and the memory test.

The predictability gain of order u,

    G_u = -(H_{u+2} - 2 H_{u+1} + H_u),

measures how much better the next tag is predicted from u + 1 preceding
tags than from u. A process has memory m when G_u vanishes for all u >= m.
On finite data the test compares the gain of a corpus against the gains of
surrogate corpora generated by an order-m chain fitted to it.
"""
import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from .conllu import Corpus
from .entropy import Estimator, block_entropies, entropy_plugin, r_max
from .errors import InconsistentMarginals, InsufficientData, MissingContext
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
    "GainCurve",
    "MemoryTestResult",
    "SurrogateModel",
    "predictability_gain_exact",
    "predictability_gain_kl",
    "chain_block_distributions",
    "stationary_blocks",
    "gain_curve",
    "gains_from_entropies",
    "generate_surrogates",
    "memory_test",
    "estimate_memory",
]

log = logging.getLogger("syntaxdist.memory")

_MARGINAL_TOLERANCE = 1e-9
_MAX_REDRAWS = 100


@attr.s(frozen=True, slots=True, auto_attribs=True)
class GainCurve:
    """Estimated gains Ĝ_u for u = 0..r_max - 2.

    Attributes
    ----------
    language_id : str
    estimator : Estimator
    gains : Tuple[float, ...]
        ``gains[u]`` in bits.
    entropies : Tuple[float, ...]
        The block entropies ``H_0..H_{r_max}`` the gains were computed from.

    """

    language_id: str
    estimator: Estimator
    gains: Tuple[float, ...] = attr.ib(converter=tuple)
    entropies: Tuple[float, ...] = attr.ib(converter=tuple)

    @property
    def r_max(self) -> int:
        return len(self.gains) + 1

    def __getitem__(self, u: int) -> float:
        return self.gains[u]

    def csv_rows(self) -> List[list]:
        return [[u, g, self.estimator.value] for u, g in enumerate(self.gains)]


@attr.s(frozen=True, slots=True, auto_attribs=True)
class MemoryTestResult:
    """Outcome of testing the hypothesis "memory = m" against K surrogates.

    ``statistic``, ``surrogate_mean`` and ``surrogate_std`` are taken at
    u = m; the full real and surrogate curves are kept alongside.
    """

    language_id: str
    m: int
    K: int
    estimator: Estimator
    statistic: float
    surrogate_mean: float
    surrogate_std: float
    p_value: float
    gains: Tuple[float, ...] = attr.ib(converter=tuple)
    surrogate_means: Tuple[float, ...] = attr.ib(converter=tuple)
    surrogate_stds: Tuple[float, ...] = attr.ib(converter=tuple)

    def to_json(self) -> dict:
        return {
            "language_id": self.language_id,
            "m": self.m,
            "K": self.K,
            "estimator": self.estimator.value,
            "statistic": self.statistic,
            "surrogate_mean": self.surrogate_mean,
            "surrogate_std": self.surrogate_std,
            "p_value": self.p_value,
            "curve": [
                {"u": u, "gain": g, "surrogate_mean": mu, "surrogate_std": s}
                for u, (g, mu, s) in enumerate(
                    zip(self.gains, self.surrogate_means, self.surrogate_stds)
                )
            ],
        }


def _lookup(dist: BlockDistribution, keys: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(dist.indices, keys)
    pos = np.minimum(pos, dist.indices.size - 1)
    found = dist.indices[pos] == keys
    return np.where(found, dist.probs[pos], 0.0)


def _check_marginals(dists: Mapping[int, BlockDistribution], sizes: Sequence[int]) -> None:
    for r in sizes:
        if r < 2 or r - 1 not in dists:
            continue
        lower = dists[r - 1]
        for name, marginal in (
            ("prefix", dists[r].marginalize_last()),
            ("suffix", dists[r].marginalize_first()),
        ):
            keys = np.union1d(marginal.indices, lower.indices)
            gap = np.max(np.abs(_lookup(marginal, keys) - _lookup(lower, keys)))
            if gap > _MARGINAL_TOLERANCE:
                raise InconsistentMarginals(
                    f"The {name} marginal of the size-{r} distribution differs from the "
                    f"size-{r - 1} distribution by {gap:.3g}"
                )


def _required(dists: Mapping[int, BlockDistribution], u: int) -> List[int]:
    sizes = [s for s in (u, u + 1, u + 2) if s >= 1]
    missing = [s for s in sizes if s not in dists]
    if missing:
        raise ValueError(f"G_{u} needs block distributions of sizes {sizes}; missing {missing}")
    return sizes


def predictability_gain_exact(dists: Mapping[int, BlockDistribution], u: int) -> float:
    """Compute G_u from exact block distributions via block entropies.

    Parameters
    ----------
    dists : Mapping[int, BlockDistribution]
        Joint distributions keyed by block size, at least sizes u (when
        u > 0), u + 1 and u + 2, of a stationary process.
    u : int

    Returns
    -------
    float
        ``-(H_{u+2} - 2 H_{u+1} + H_u)`` in bits, with ``H_0 = 0``.

    Raises
    ------
    InconsistentMarginals
        If a distribution does not marginalise onto the next smaller one on
        both sides.

    """
    if u < 0:
        raise ValueError("u must be non-negative")
    sizes = _required(dists, u)
    _check_marginals(dists, sizes)

    def h(r):
        return 0.0 if r == 0 else entropy_plugin(dists[r]).value

    return -(h(u + 2) - 2.0 * h(u + 1) + h(u))


def predictability_gain_kl(dists: Mapping[int, BlockDistribution], u: int) -> float:
    """Compute G_u as a conditional relative entropy.

    This is the expected log-ratio, in bits, of the probability of the next
    tag given the u + 1 preceding tags to its probability given only the u
    nearest ones. For consistent distributions it equals
    `predictability_gain_exact`.
    """
    if u < 0:
        raise ValueError("u must be non-negative")
    sizes = _required(dists, u)
    _check_marginals(dists, sizes)

    joint = dists[u + 2]
    blocks, probs = joint.indices, joint.probs
    prefix = _lookup(dists[u + 1], blocks // L)
    suffix = _lookup(dists[u + 1], blocks % L ** (u + 1))
    middle = _lookup(dists[u], (blocks // L) % L ** u) if u > 0 else np.ones_like(probs)
    ratio = (probs * middle) / (prefix * suffix)
    return float(np.sum(probs * np.log2(ratio)))


def _extend(dist: BlockDistribution, matrix: np.ndarray, order: int) -> BlockDistribution:
    contexts = dist.indices % L ** order if order else np.zeros_like(dist.indices)
    probs = dist.probs[:, None] * matrix[contexts]
    indices = dist.indices[:, None] * L + np.arange(L)[None, :]
    keep = probs > 0
    return BlockDistribution(dist.r + 1, indices[keep], probs[keep], dist.language_id)


def chain_block_distributions(
    initial: BlockDistribution, transitions: Optional[TransitionTable], r: int
) -> Dict[int, BlockDistribution]:
    """Exact block distributions of a Markov chain, for sizes 1..r.

    Parameters
    ----------
    initial : BlockDistribution
        Stationary distribution of blocks of size ``max(order, 1)``.
    transitions : Optional[TransitionTable]
        Order-m transitions, or ``None`` for an IID process over the tags of
        ``initial``.
    r : int
        Largest block size.

    Returns
    -------
    Dict[int, BlockDistribution]

    """
    if transitions is None:
        if initial.r != 1:
            raise ValueError("An IID chain is given by a distribution over single tags")
        order = 0
        matrix = np.broadcast_to(_lookup(initial, np.arange(L)), (1, L))
    else:
        order = transitions.order
        if initial.r != order:
            raise ValueError(f"An order-{order} chain starts from blocks of size {order}")
        matrix, _ = transitions.dense()

    dists = {initial.r: initial}
    for size in range(initial.r - 1, 0, -1):
        dists[size] = dists[size + 1].marginalize_last()
    for size in range(initial.r + 1, r + 1):
        dists[size] = _extend(dists[size - 1], matrix, order)
    return {size: dists[size] for size in range(1, r + 1)}


def stationary_blocks(
    transitions: TransitionTable, *, tol: float = 1e-15, max_iter: int = 100000
) -> BlockDistribution:
    """Stationary distribution of the order-m blocks of a chain, by power iteration.

    The chain must be irreducible and aperiodic on its support for the
    iteration to converge.
    """
    m = transitions.order
    size = L ** m
    matrix, observed = transitions.dense()
    probs = np.where(observed, 1.0, 0.0)
    probs /= probs.sum()
    successors = (np.arange(size)[:, None] * L + np.arange(L)[None, :]) % size
    for _ in range(max_iter):
        updated = np.bincount(successors.ravel(), weights=(probs[:, None] * matrix).ravel(), minlength=size)
        updated /= updated.sum()
        if np.max(np.abs(updated - probs)) < tol:
            probs = updated
            break
        probs = updated
    else:
        log.warning("Stationary distribution did not converge after %s iterations", max_iter)
    keep = np.flatnonzero(probs > 0)
    return BlockDistribution(m, keep, probs[keep] / probs[keep].sum())


def gains_from_entropies(entropies: Sequence[float]) -> List[float]:
    """Get ``G_u`` for every u the entropies ``H_0..H_n`` support."""
    h = list(entropies)
    return [-(h[u + 2] - 2.0 * h[u + 1] + h[u]) for u in range(len(h) - 2)]


def _curve(
    corpus: Corpus, horizon: int, estimator: Estimator
) -> Tuple[List[float], List[float]]:
    entropies = block_entropies(corpus, horizon, estimator)
    values = [entropies[r].value for r in range(horizon + 1)]
    return gains_from_entropies(values), values


def gain_curve(
    corpus: Corpus,
    estimator: Union[Estimator, str] = Estimator.NSB,
    *,
    max_size: Optional[int] = None,
) -> GainCurve:
    """Estimate the predictability gains of a corpus for u = 0..r_max - 2.

    Parameters
    ----------
    corpus : Corpus
    estimator : Union[Estimator, str]
        Entropy estimator; NSB by default.
    max_size : Optional[int]
        Largest block size to use instead of r_max.

    Raises
    ------
    InsufficientData
        If the corpus has fewer tags than the alphabet.

    """
    estimator = Estimator(estimator)
    horizon = r_max(count_blocks(corpus, 1)) if max_size is None else int(max_size)
    if horizon < 2:
        raise InsufficientData("A gain curve needs blocks of size 2")
    gains, entropies = _curve(corpus, horizon, estimator)
    log.info(
        "%s: gains %s",
        corpus.language_id,
        ", ".join(f"G_{u}={g:.4f}" for u, g in enumerate(gains)),
    )
    return GainCurve(corpus.language_id, estimator, gains, entropies)


@attr.s(frozen=True, slots=True)
class SurrogateModel:
    """An order-m chain fitted to a corpus, for drawing surrogate sentences.

    Attributes
    ----------
    order : int
    initial : BlockDistribution
        For m >= 1, the empirical distribution of m-blocks that have a
        successor in their sentence. For m = 0, the tag distribution.
    transitions : Optional[TransitionTable]
        Order-m transitions; ``None`` for m = 0.
    short_blocks : Dict[int, BlockDistribution]
        For each sentence length n <= m, the empirical distribution of
        n-blocks, used to draw whole short sentences.

    """

    order: int = attr.ib()
    initial: BlockDistribution = attr.ib()
    transitions: Optional[TransitionTable] = attr.ib()
    short_blocks: Dict[int, BlockDistribution] = attr.ib(factory=dict)
    _cdf: np.ndarray = attr.ib(init=False, repr=False)
    _observed: np.ndarray = attr.ib(init=False, repr=False)

    def __attrs_post_init__(self):
        if self.transitions is None:
            cdf, observed = np.ones((1, L)), np.ones(1, dtype=bool)
        else:
            matrix, observed = self.transitions.dense()
            cdf = np.cumsum(matrix, axis=1)
            cdf[observed, -1] = 1.0
        object.__setattr__(self, "_cdf", cdf)
        object.__setattr__(self, "_observed", observed)

    @classmethod
    def from_corpus(cls, corpus: Corpus, m: int, lengths: Optional[Sequence[int]] = None):
        """Fit the model of order ``m`` to ``corpus``.

        ``lengths`` lists the sentence lengths that will be generated, so the
        short-sentence distributions are only built when needed.
        """
        if m < 0:
            raise ValueError("m must be non-negative")
        lengths = corpus.lengths if lengths is None else np.asarray(lengths)
        if m == 0:
            return cls(0, estimate_distribution(count_blocks(corpus, 1)), None)
        counts = count_blocks(corpus, m + 1)
        if counts.total == 0:
            raise InsufficientData(f"No sentence of {corpus.language_id} is longer than {m}")
        prefixes, inverse = np.unique(counts.indices // L, return_inverse=True)
        initial = estimate_distribution(
            BlockCounts(m, prefixes, np.bincount(inverse, weights=counts.counts), corpus.language_id)
        )
        short = {}
        for n in sorted(set(int(n) for n in lengths if n <= m)):
            short[n] = estimate_distribution(count_blocks(corpus, n))
        return cls(m, initial, estimate_transitions(counts), short)

    def generate(
        self, lengths: Sequence[int], rng: np.random.Generator, language_id: str = ""
    ) -> Corpus:
        """Draw one surrogate corpus with the given sentence lengths.

        Raises
        ------
        MissingContext
            If some sentence keeps running into a context without a
            transition row after repeated redraws.

        """
        lengths = np.asarray(lengths, dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(lengths)[:-1])).astype(np.int64)
        tags = np.empty(int(lengths.sum()), dtype=np.int8)
        m = self.order

        if m == 0:
            tags[:] = rng.choice(self.initial.indices, size=tags.size, p=self.initial.probs)
            return Corpus(language_id, tags, lengths)

        for n, dist in self.short_blocks.items():
            chosen = np.flatnonzero(lengths == n)
            if not chosen.size:
                continue
            blocks = rng.choice(dist.indices, size=chosen.size, p=dist.probs)
            for k in range(n):
                tags[offsets[chosen] + k] = (blocks // L ** (n - 1 - k)) % L
        if np.any((lengths <= m) & ~np.isin(lengths, list(self.short_blocks))):
            raise InsufficientData(f"No blocks to draw sentences of length <= {m} from")

        pending = np.flatnonzero(lengths > m)
        for _ in range(_MAX_REDRAWS):
            if not pending.size:
                break
            pending, missing = self._walk(pending, lengths, offsets, tags, rng)
        else:
            if pending.size:
                raise MissingContext(missing)
        return Corpus(language_id, tags, lengths)

    def _walk(self, chosen, lengths, offsets, tags, rng) -> Tuple[np.ndarray, int]:
        m = self.order
        modulus = L ** m
        order = chosen[np.argsort(-lengths[chosen], kind="stable")]
        remaining = lengths[order]
        starts = offsets[order]

        context = rng.choice(self.initial.indices, size=order.size, p=self.initial.probs)
        for k in range(m):
            tags[starts + k] = (context // L ** (m - 1 - k)) % L

        failed = np.zeros(order.size, dtype=bool)
        missing = -1
        descending = -remaining
        for j in range(m, int(remaining[0])):
            active = int(np.searchsorted(descending, -j, side="left"))
            current = context[:active]
            unseen = ~self._observed[current]
            if missing < 0 and np.any(unseen & ~failed[:active]):
                missing = int(current[np.argmax(unseen & ~failed[:active])])
            failed[:active] |= unseen
            draws = rng.random(active)
            nxt = np.minimum((self._cdf[current] < draws[:, None]).sum(axis=1), L - 1)
            tags[starts[:active] + j] = nxt
            context[:active] = (current * L + nxt) % modulus
        return order[failed], missing


def generate_surrogates(
    model: SurrogateModel,
    sentence_lengths: Sequence[int],
    K: int,
    seed: Optional[int] = None,
    *,
    name: str = "surrogates",
    threads: Optional[int] = None,
    language_id: str = "",
) -> List[Corpus]:
    """Draw ``K`` surrogate corpora from an order-m model.

    Every surrogate has exactly ``sentence_lengths``. Surrogate k uses the
    stream ``(seed, name, k)``, so the output does not depend on ``threads``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")

    def _one(k: int) -> Corpus:
        return model.generate(sentence_lengths, derive_rng(seed, name, k), language_id)

    return thread_map(_one, range(K), threads)


def memory_test(
    corpus: Corpus,
    m: int = 2,
    K: int = 1000,
    seed: Optional[int] = None,
    *,
    estimator: Union[Estimator, str] = Estimator.NSB,
    threads: Optional[int] = None,
) -> MemoryTestResult:
    """Test whether a corpus is compatible with memory ``m``.

    The gain Ĝ_m of the corpus is compared with Ĝ_m of ``K`` surrogates
    drawn from the order-m chain fitted to it, with identical sentence
    lengths. The p-value is the fraction of surrogates whose gain is at
    least the real one. Surrogate mean and standard deviation are reported
    for every u the corpus supports.

    Raises
    ------
    InsufficientData
        If r_max of the corpus is below ``m + 2``.

    """
    if K < 1:
        raise ValueError("K must be at least 1")
    estimator = Estimator(estimator)
    horizon = r_max(count_blocks(corpus, 1))
    if horizon < m + 2:
        raise InsufficientData(
            f"{corpus.language_id}: r_max = {horizon} cannot test memory {m} (needs {m + 2})"
        )
    gains, _ = _curve(corpus, horizon, estimator)
    model = SurrogateModel.from_corpus(corpus, m)
    stream = f"memory_test:{corpus.language_id}:{m}"

    def _surrogate_gains(k: int) -> List[float]:
        surrogate = model.generate(corpus.lengths, derive_rng(seed, stream, k), corpus.language_id)
        return _curve(surrogate, horizon, estimator)[0]

    surrogate = np.array(
        thread_map(_surrogate_gains, range(K), threads, desc=f"Surrogates {corpus.language_id}"),
        dtype=np.float64,
    )
    means = surrogate.mean(axis=0)
    stds = surrogate.std(axis=0, ddof=1) if K > 1 else np.zeros_like(means)
    p_value = float(np.count_nonzero(surrogate[:, m] >= gains[m])) / K
    log.info(
        "%s: G_%s = %.5f, surrogates %.5f +- %.5f, p = %s",
        corpus.language_id,
        m,
        gains[m],
        means[m],
        stds[m],
        p_value,
    )
    return MemoryTestResult(
        language_id=corpus.language_id,
        m=m,
        K=K,
        estimator=estimator,
        statistic=gains[m],
        surrogate_mean=float(means[m]),
        surrogate_std=float(stds[m]),
        p_value=p_value,
        gains=gains,
        surrogate_means=means.tolist(),
        surrogate_stds=stds.tolist(),
    )


def estimate_memory(
    gains: Sequence[float], surrogate_std: Sequence[float], sigmas: float = 3.0
) -> int:
    """Get the smallest μ such that every gain from u = μ on is within noise of 0.

    A gain is within noise when ``|G_u| <= sigmas * surrogate_std[u]``.
    Returns ``len(gains)`` when even the last gain is significant.
    """
    if len(gains) != len(surrogate_std):
        raise ValueError("gains and surrogate_std must have the same length")
    memory = len(gains)
    for u in range(len(gains) - 1, -1, -1):
        if math.fabs(gains[u]) <= sigmas * surrogate_std[u]:
            memory = u
        else:
            break
    return memory
