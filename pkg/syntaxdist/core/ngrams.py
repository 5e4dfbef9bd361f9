"""Block counting and maximum-likelihood block statistics.

A block of size r is r consecutive tags inside one sentence. Blocks are
identified by their base-L index: the digits ``(i_0, ..., i_{r-1})`` read as
a number with ``i_0`` most significant. All counts are sparse: only observed
indices are stored, as sorted numpy arrays.
"""
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import attr
import numpy as np

from .conllu import Corpus
from .errors import DigitOutOfRange, EmptyCounts, InsufficientData
from .tags import L, PosTag
from .utils import derive_rng

__all__ = [
    "MAX_BLOCK_SIZE",
    "encode_block",
    "decode_block",
    "block_name",
    "BlockCounts",
    "BlockDistribution",
    "TransitionTable",
    "count_blocks",
    "count_block_sizes",
    "estimate_distribution",
    "estimate_transitions",
    "sample_corpus",
]

log = logging.getLogger("syntaxdist.ngrams")

# Block indices lie in [0, 15 ** r); 15 ** 16 still fits in int64, 15 ** 17 does not,
# so blocks one tag longer than the largest size stay exact.
MAX_BLOCK_SIZE = 15


def _check_block_size(r: int, minimum: int = 1) -> int:
    r = int(r)
    if not minimum <= r <= MAX_BLOCK_SIZE:
        raise ValueError(f"Block size must lie in [{minimum}, {MAX_BLOCK_SIZE}], got {r}")
    return r


def encode_block(digits: Sequence[int]) -> int:
    """Get the base-L index of a block.

    Parameters
    ----------
    digits : Sequence[int]
        Tag indices, most significant first.

    Returns
    -------
    int
        ``sum(digits[k] * L ** (r - 1 - k))``.

    Raises
    ------
    DigitOutOfRange
        If a digit is not a tag index.

    """
    if not digits:
        raise ValueError("A block has at least one tag")
    value = 0
    for digit in digits:
        digit = int(digit)
        if not 0 <= digit < L:
            raise DigitOutOfRange(f"Block digit {digit} is not in [0, {L - 1}]")
        value = value * L + digit
    return value


def decode_block(value: int, r: int) -> Tuple[int, ...]:
    """Inverse of `encode_block` for blocks of size ``r``."""
    r = _check_block_size(r)
    value = int(value)
    if not 0 <= value < L ** r:
        raise DigitOutOfRange(f"Block index {value} is not in [0, {L ** r - 1}]")
    digits = []
    for _ in range(r):
        value, digit = divmod(value, L)
        digits.append(digit)
    return tuple(reversed(digits))


def block_name(value: int, r: int) -> str:
    """Spell a block index as tag names, e.g. 307 at r=3 is ``"ADP DET NOUN"``."""
    return " ".join(PosTag(d).name for d in decode_block(value, r))


def _sorted_pairs(indices, values, dtype) -> Tuple[np.ndarray, np.ndarray]:
    indices = np.ascontiguousarray(indices, dtype=np.int64).reshape(-1)
    values = np.ascontiguousarray(values, dtype=dtype).reshape(-1)
    if indices.shape != values.shape:
        raise ValueError("indices and values must have the same length")
    order = np.argsort(indices, kind="stable")
    indices, values = indices[order], values[order]
    if indices.size > 1 and np.any(np.diff(indices) == 0):
        raise ValueError("Block indices must be unique")
    return indices, values


@attr.s(frozen=True, slots=True, eq=False, repr=False)
class BlockCounts:
    """Occurrence counts of blocks of one size.

    Attributes
    ----------
    r : int
        Block size.
    indices : numpy.ndarray
        Observed block indices, ascending.
    counts : numpy.ndarray
        Positive counts aligned with `indices`.
    language_id : str

    """

    r: int = attr.ib(converter=int)
    indices: np.ndarray = attr.ib()
    counts: np.ndarray = attr.ib()
    language_id: str = attr.ib(default="")

    def __attrs_post_init__(self):
        _check_block_size(self.r)
        indices, counts = _sorted_pairs(self.indices, self.counts, np.int64)
        if counts.size and counts.min() <= 0:
            raise ValueError("Stored counts must be positive")
        if indices.size and (indices[0] < 0 or indices[-1] >= L ** self.r):
            raise DigitOutOfRange(f"Block index out of range for r={self.r}")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_mapping(cls, r: int, mapping: Dict[int, int], language_id: str = "") -> "BlockCounts":
        items = [(k, v) for k, v in mapping.items() if v]
        return cls(r, [k for k, _ in items], [v for _, v in items], language_id)

    @property
    def total(self) -> int:
        """N^(r), the number of block occurrences."""
        return int(self.counts.sum())

    @property
    def distinct(self) -> int:
        return int(self.indices.size)

    def __getitem__(self, index: int) -> int:
        pos = int(np.searchsorted(self.indices, index))
        if pos < self.indices.size and self.indices[pos] == index:
            return int(self.counts[pos])
        return 0

    def __len__(self) -> int:
        return self.distinct

    def to_dict(self) -> Dict[int, int]:
        return dict(zip(self.indices.tolist(), self.counts.tolist()))

    def to_json(self) -> dict:
        return {
            "language_id": self.language_id,
            "r": self.r,
            "L": L,
            "total": self.total,
            "counts": [[i, c] for i, c in zip(self.indices.tolist(), self.counts.tolist())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BlockCounts":
        if data.get("L", L) != L:
            raise ValueError(f"Counts were made over an alphabet of {data['L']} tags, not {L}")
        pairs = data["counts"]
        return cls(
            data["r"], [p[0] for p in pairs], [p[1] for p in pairs], data.get("language_id", "")
        )

    def csv_rows(self) -> List[Tuple[int, int]]:
        """Rows for a ``block_index,count`` table."""
        return list(zip(self.indices.tolist(), self.counts.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlockCounts):
            return NotImplemented
        return (
            self.r == other.r
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"<BlockCounts r={self.r} distinct={self.distinct} total={self.total}>"


@attr.s(frozen=True, slots=True, eq=False, repr=False)
class BlockDistribution:
    """A normalised probability vector over the block index space of size ``L ** r``.

    Unobserved blocks are implicit zeros.
    """

    r: int = attr.ib(converter=int)
    indices: np.ndarray = attr.ib()
    probs: np.ndarray = attr.ib()
    language_id: str = attr.ib(default="")

    def __attrs_post_init__(self):
        _check_block_size(self.r)
        indices, probs = _sorted_pairs(self.indices, self.probs, np.float64)
        if probs.size and probs.min() < 0:
            raise ValueError("Probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-12 * max(1, probs.size) ** 0.5 + 1e-12:
            raise ValueError("Probabilities must sum to 1")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(cls, r: int, mapping: Dict[int, float], language_id: str = ""):
        items = [(k, v) for k, v in mapping.items() if v]
        return cls(r, [k for k, _ in items], [v for _, v in items], language_id)

    def __getitem__(self, index: int) -> float:
        pos = int(np.searchsorted(self.indices, index))
        if pos < self.indices.size and self.indices[pos] == index:
            return float(self.probs[pos])
        return 0.0

    def __len__(self) -> int:
        return int(self.indices.size)

    def to_dict(self) -> Dict[int, float]:
        return dict(zip(self.indices.tolist(), self.probs.tolist()))

    def most_probable(self, n: int = 3) -> List[Tuple[str, float]]:
        """Get the ``n`` most probable blocks as ``(names, probability)`` pairs.

        Ties are listed in index order.
        """
        order = np.lexsort((self.indices, -self.probs))[:n]
        return [(block_name(int(self.indices[i]), self.r), float(self.probs[i])) for i in order]

    def marginalize_last(self) -> "BlockDistribution":
        """Sum out the last tag of every block."""
        if self.r < 2:
            raise ValueError("Cannot marginalise a distribution over single tags")
        prefixes, inverse = np.unique(self.indices // L, return_inverse=True)
        return BlockDistribution(
            self.r - 1, prefixes, np.bincount(inverse, weights=self.probs), self.language_id
        )

    def marginalize_first(self) -> "BlockDistribution":
        """Sum out the first tag of every block."""
        if self.r < 2:
            raise ValueError("Cannot marginalise a distribution over single tags")
        suffixes, inverse = np.unique(self.indices % L ** (self.r - 1), return_inverse=True)
        return BlockDistribution(
            self.r - 1, suffixes, np.bincount(inverse, weights=self.probs), self.language_id
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlockDistribution):
            return NotImplemented
        return (
            self.r == other.r
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"<BlockDistribution r={self.r} support={len(self)}>"


@attr.s(frozen=True, slots=True, eq=False, repr=False)
class TransitionTable:
    """Order-u transition probabilities p(z | context).

    Stored as the sparse list of observed ``(context, z)`` blocks of size
    ``u + 1``: a block index ``b`` has context ``b // L`` and next tag
    ``b % L``. A row exists only for observed contexts.
    """

    order: int = attr.ib(converter=int)
    indices: np.ndarray = attr.ib()
    probs: np.ndarray = attr.ib()

    def __attrs_post_init__(self):
        if self.order < 1:
            raise ValueError("Transition tables have order >= 1")
        _check_block_size(self.order + 1, minimum=2)
        indices, probs = _sorted_pairs(self.indices, self.probs, np.float64)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "probs", probs)

    @property
    def contexts(self) -> np.ndarray:
        """Observed context block indices (size `order`), ascending."""
        return np.unique(self.indices // L)

    def row(self, context: int) -> Dict[int, float]:
        """Get ``{tag: probability}`` for ``context``; empty when unobserved."""
        lo = int(np.searchsorted(self.indices, context * L))
        hi = int(np.searchsorted(self.indices, (context + 1) * L))
        return {int(i % L): float(p) for i, p in zip(self.indices[lo:hi], self.probs[lo:hi])}

    def probability(self, context: int, tag: int) -> float:
        index = int(context) * L + int(tag)
        pos = int(np.searchsorted(self.indices, index))
        if pos < self.indices.size and self.indices[pos] == index:
            return float(self.probs[pos])
        return 0.0

    def dense(self) -> Tuple[np.ndarray, np.ndarray]:
        """Get a dense ``(L ** order, L)`` probability matrix and a row-observed mask."""
        matrix = np.zeros((L ** self.order, L), dtype=np.float64)
        matrix[self.indices // L, self.indices % L] = self.probs
        return matrix, matrix.sum(axis=1) > 0

    def __repr__(self) -> str:
        return f"<TransitionTable order={self.order} contexts={self.contexts.size}>"


def _block_codes(corpus: Corpus, r: int) -> np.ndarray:
    """Base-L codes of every within-sentence block of size ``r``, in text order."""
    tags = corpus.tags.astype(np.int64)
    n = tags.size
    if n < r:
        return np.empty(0, dtype=np.int64)
    width = n - r + 1
    codes = np.zeros(width, dtype=np.int64)
    for k in range(r):
        codes = codes * L + tags[k : k + width]
    sentence = np.repeat(np.arange(corpus.sentence_count), corpus.lengths)
    inside = sentence[:width] == sentence[r - 1 :]
    return codes[inside]


def count_blocks(corpus: Corpus, r: int) -> BlockCounts:
    """Count the overlapping blocks of size ``r`` in every sentence.

    A sentence of length n contributes ``n - r + 1`` blocks, or none when it
    is shorter than r. Blocks never span sentence boundaries.

    Parameters
    ----------
    corpus : Corpus
    r : int
        Block size, at least 1.

    Returns
    -------
    BlockCounts
        Possibly empty.

    """
    r = _check_block_size(r)
    indices, counts = np.unique(_block_codes(corpus, r), return_counts=True)
    return BlockCounts(r, indices, counts, corpus.language_id)


def estimate_distribution(counts: BlockCounts) -> BlockDistribution:
    """Maximum-likelihood block probabilities ``n_j / N``.

    Raises
    ------
    EmptyCounts
        If no block was observed.

    """
    total = counts.total
    if total == 0:
        raise EmptyCounts(f"No blocks of size {counts.r} to normalise")
    return BlockDistribution(counts.r, counts.indices, counts.counts / total, counts.language_id)


def estimate_transitions(counts: BlockCounts) -> TransitionTable:
    """Order ``r - 1`` transition probabilities from counts of size-r blocks.

    ``row(context)[z] = n(context z) / sum_v n(context v)``.

    Raises
    ------
    EmptyCounts
        If no block was observed.

    """
    if counts.r < 2:
        raise ValueError("Transition probabilities need blocks of size >= 2")
    if counts.total == 0:
        raise EmptyCounts(f"No blocks of size {counts.r} to estimate transitions from")
    contexts = counts.indices // L
    _, inverse = np.unique(contexts, return_inverse=True)
    row_totals = np.bincount(inverse, weights=counts.counts)
    return TransitionTable(counts.r - 1, counts.indices, counts.counts / row_totals[inverse])


def sample_corpus(
    corpus: Corpus,
    target_tokens: int = 10000,
    seed: Optional[int] = None,
    *,
    max_samples: int = 20,
) -> List[Corpus]:
    """Split a corpus into random samples of roughly ``target_tokens`` tokens.

    Sentences are shuffled once and consumed without replacement; a sample is
    closed as soon as its token count first reaches ``target_tokens``. The
    remainder that cannot reach the target is discarded.

    Parameters
    ----------
    corpus : Corpus
    target_tokens : int
        Minimum size of each sample.
    seed : Optional[int]
        Master seed; the stream is keyed by the corpus language.
    max_samples : int
        Upper bound on the number of samples.

    Returns
    -------
    List[Corpus]
        Samples named ``<language_id>#<k>``, k counting from 0.

    Raises
    ------
    InsufficientData
        If the corpus is smaller than ``target_tokens``.

    """
    if target_tokens <= 0:
        raise ValueError("target_tokens must be positive")
    if corpus.token_count < target_tokens:
        raise InsufficientData(
            f"{corpus.language_id} has {corpus.token_count} tokens, "
            f"fewer than one sample of {target_tokens}"
        )
    rng = derive_rng(seed, f"sample_corpus:{corpus.language_id}")
    order = rng.permutation(corpus.sentence_count)
    reached = np.cumsum(corpus.lengths[order])

    samples: List[Corpus] = []
    start, base = 0, 0
    while len(samples) < max_samples:
        stop = int(np.searchsorted(reached, base + target_tokens, side="left"))
        if stop >= reached.size:
            break
        samples.append(
            corpus.select(order[start : stop + 1], language_id=f"{corpus.language_id}#{len(samples)}")
        )
        base = int(reached[stop])
        start = stop + 1
    log.debug("Drew %s samples of >= %s tokens from %s", len(samples), target_tokens, corpus.language_id)
    return samples


def count_block_sizes(corpus: Corpus, sizes: Iterable[int]) -> Dict[int, BlockCounts]:
    """Count blocks of several sizes at once."""
    return {r: count_blocks(corpus, r) for r in sizes}
