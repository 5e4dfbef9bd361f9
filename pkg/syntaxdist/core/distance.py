"""Distances between block distributions and labelled distance matrices."""
import csv
import enum
import io
import itertools
import logging
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import attr
import numpy as np
from scipy import stats
from scipy.spatial.distance import jensenshannon, squareform

from . import data_manager
from .conllu import Corpus
from .errors import DataError, DuplicateLabel, MismatchedBlockSize
from .ngrams import BlockDistribution, count_blocks, estimate_distribution, sample_corpus
from .utils import thread_map

__all__ = [
    "Metric",
    "DistanceMatrix",
    "js_distance",
    "hellinger_distance",
    "distance",
    "build_distance_matrix",
    "sample_distance_matrix",
    "rank_agreement",
]

log = logging.getLogger("syntaxdist.distance")


class Metric(enum.Enum):
    JENSEN_SHANNON = "jensen_shannon"
    HELLINGER = "hellinger"


def _aligned(p: BlockDistribution, q: BlockDistribution) -> Tuple[np.ndarray, np.ndarray]:
    """Both distributions as dense vectors over the union of their supports."""
    if p.r != q.r:
        raise MismatchedBlockSize(f"Cannot compare blocks of size {p.r} with blocks of size {q.r}")
    support = np.union1d(p.indices, q.indices)
    left = np.zeros(support.size)
    right = np.zeros(support.size)
    left[np.searchsorted(support, p.indices)] = p.probs
    right[np.searchsorted(support, q.indices)] = q.probs
    return left, right


def _clip(value: float) -> float:
    if np.isnan(value):
        return 0.0
    return float(min(max(value, 0.0), 1.0))


def js_distance(p: BlockDistribution, q: BlockDistribution) -> float:
    """Jensen-Shannon distance with base-2 logarithms, in [0, 1].

    Raises
    ------
    MismatchedBlockSize
        If the distributions are over blocks of different sizes.

    """
    left, right = _aligned(p, q)
    return _clip(jensenshannon(left, right, base=2))


def hellinger_distance(p: BlockDistribution, q: BlockDistribution) -> float:
    """``sqrt(sum((sqrt(p) - sqrt(q)) ** 2) / 2)``, in [0, 1].

    Raises
    ------
    MismatchedBlockSize
        If the distributions are over blocks of different sizes.

    """
    left, right = _aligned(p, q)
    return _clip(np.sqrt(0.5 * np.sum((np.sqrt(left) - np.sqrt(right)) ** 2)))


_METRICS = {Metric.JENSEN_SHANNON: js_distance, Metric.HELLINGER: hellinger_distance}


def distance(
    p: BlockDistribution, q: BlockDistribution, metric: Union[Metric, str] = Metric.JENSEN_SHANNON
) -> float:
    return _METRICS[Metric(metric)](p, q)


@attr.s(frozen=True, slots=True, eq=False, repr=False)
class DistanceMatrix:
    """A symmetric matrix of distances between labelled items.

    Attributes
    ----------
    labels : Tuple[str, ...]
    values : numpy.ndarray
        ``n x n``, zero diagonal, entries in [0, 1].
    metric : Metric
    r : int
        Block size of the compared distributions.

    """

    labels: Tuple[str, ...] = attr.ib(converter=tuple)
    values: np.ndarray = attr.ib(converter=lambda v: np.array(v, dtype=np.float64))
    metric: Metric = attr.ib(converter=Metric)
    r: int = attr.ib(converter=int)

    def __attrs_post_init__(self):
        n = len(self.labels)
        seen = set()
        for label in self.labels:
            if label in seen:
                raise DuplicateLabel(label)
            seen.add(label)
        if self.values.shape != (n, n):
            raise DataError(f"Expected a {n}x{n} matrix, got shape {self.values.shape}")
        if not np.array_equal(self.values, self.values.T):
            raise DataError("Distance matrix is not symmetric")
        if np.any(np.diag(self.values) != 0):
            raise DataError("Distance matrix has a non-zero diagonal")
        if np.any(self.values < 0) or np.any(self.values > 1 + 1e-12):
            raise DataError("Distances must lie in [0, 1]")
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __getitem__(self, pair: Tuple[str, str]) -> float:
        a, b = pair
        return float(self.values[self.index(a), self.index(b)])

    def condensed(self) -> np.ndarray:
        """The upper triangle, row by row, as scipy's condensed form."""
        return squareform(self.values, checks=False)

    def submatrix(self, labels: Sequence[str]) -> "DistanceMatrix":
        indices = [self.index(label) for label in labels]
        return DistanceMatrix(labels, self.values[np.ix_(indices, indices)], self.metric, self.r)

    def without(self, labels: Iterable[str]) -> "DistanceMatrix":
        drop = set(labels)
        return self.submatrix([label for label in self.labels if label not in drop])

    def reordered(self, order: Sequence[int]) -> "DistanceMatrix":
        return self.submatrix([self.labels[i] for i in order])

    def csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["", *self.labels])
        for label, row in zip(self.labels, self.values.tolist()):
            writer.writerow([label, *map(repr, row)])
        return buffer.getvalue()

    def save_csv(self, path: Path) -> None:
        data_manager.atomic_write_text(path, self.csv_text())

    @classmethod
    def load_csv(
        cls, path: Path, metric: Union[Metric, str] = Metric.JENSEN_SHANNON, r: int = 3
    ) -> "DistanceMatrix":
        with Path(path).open(encoding="utf-8", newline="") as fs:
            rows = list(csv.reader(fs))
        if not rows:
            raise DataError(f"{path} is empty")
        labels = rows[0][1:]
        if [row[0] for row in rows[1:]] != labels:
            raise DataError(f"{path}: row labels do not match column labels")
        return cls(labels, [[float(v) for v in row[1:]] for row in rows[1:]], metric, r)

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "metric": self.metric.value,
            "r": self.r,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "DistanceMatrix":
        return cls(data["labels"], data["values"], data["metric"], data["r"])

    def save_json(self, path: Path) -> None:
        data_manager.save_json(path, self.to_json())

    @classmethod
    def load_json(cls, path: Path) -> "DistanceMatrix":
        return cls.from_json(data_manager.load_json(path))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.metric is other.metric
            and self.r == other.r
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"<DistanceMatrix n={len(self)} metric={self.metric.value} r={self.r}>"


def build_distance_matrix(
    dists: Union[Mapping[str, BlockDistribution], Sequence[Tuple[str, BlockDistribution]]],
    metric: Union[Metric, str] = Metric.JENSEN_SHANNON,
    *,
    threads: Optional[int] = None,
) -> DistanceMatrix:
    """Compute all pairwise distances between labelled distributions.

    Each unordered pair is computed once.

    Raises
    ------
    DuplicateLabel
        If a label occurs twice.
    MismatchedBlockSize
        If the distributions do not share one block size.

    """
    metric = Metric(metric)
    items = list(dists.items()) if isinstance(dists, Mapping) else list(dists)
    if len(items) < 2:
        raise ValueError("A distance matrix needs at least two entries")
    labels = [label for label, _ in items]
    seen = set()
    for label in labels:
        if label in seen:
            raise DuplicateLabel(label)
        seen.add(label)
    sizes = {dist.r for _, dist in items}
    if len(sizes) != 1:
        raise MismatchedBlockSize(f"Distributions have block sizes {sorted(sizes)}")

    compare = _METRICS[metric]
    pairs = list(itertools.combinations(range(len(items)), 2))
    found = thread_map(lambda ij: compare(items[ij[0]][1], items[ij[1]][1]), pairs, threads)
    values = np.zeros((len(items), len(items)))
    for (i, j), value in zip(pairs, found):
        values[i, j] = values[j, i] = value
    log.debug("Built a %sx%s %s matrix", len(items), len(items), metric.value)
    return DistanceMatrix(labels, values, metric, sizes.pop())


def sample_distance_matrix(
    group_corpora: Sequence[Corpus],
    target_tokens: int = 10000,
    metric: Union[Metric, str] = Metric.JENSEN_SHANNON,
    seed: Optional[int] = None,
    *,
    r: int = 3,
    max_samples: int = 20,
    threads: Optional[int] = None,
) -> DistanceMatrix:
    """Distances between random text samples of several languages.

    Every corpus is split with `sample_corpus`; each sample's block
    distribution becomes one row labelled ``<language_id>#<k>``.
    """
    if len(group_corpora) < 2:
        raise ValueError("A sample matrix needs at least two languages")
    dists: List[Tuple[str, BlockDistribution]] = []
    for corpus in group_corpora:
        for sample in sample_corpus(corpus, target_tokens, seed, max_samples=max_samples):
            dists.append((sample.language_id, estimate_distribution(count_blocks(sample, r))))
    return build_distance_matrix(dists, metric, threads=threads)


def rank_agreement(a: DistanceMatrix, b: DistanceMatrix) -> float:
    """Spearman correlation between the pairwise distances of two matrices over the same labels."""
    if a.labels != b.labels:
        b = b.submatrix(a.labels)
    rho, _ = stats.spearmanr(a.condensed(), b.condensed())
    return float(rho)
