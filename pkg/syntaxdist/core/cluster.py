"""Clustering of distance matrices.

Complete-linkage hierarchical clustering orders the rows of a clustermap,
PAM k-medoids partitions the items, a silhouette sweep picks the number of
clusters, and the minimum spanning tree links every item to its nearest
neighbourhood.
"""
import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import attr
import networkx as nx
import numpy as np
from scipy.cluster import hierarchy
from sklearn.metrics import adjusted_rand_score, silhouette_score

from .distance import DistanceMatrix
from .errors import KOutOfRange
from .registry import LanguageRecord, MorphType
from .utils import thread_map

__all__ = [
    "Dendrogram",
    "ClusterAssignment",
    "SilhouetteSweep",
    "SpanningTree",
    "complete_linkage",
    "pam",
    "silhouette_sweep",
    "minimum_spanning_tree",
    "partition_agreement",
]

log = logging.getLogger("syntaxdist.cluster")

Merge = Tuple[int, int, float, int]


def _newick_label(label: str) -> str:
    if any(c in label for c in " ,;:()[]'\t\n"):
        return "'{}'".format(label.replace("'", "''"))
    return label


@attr.s(frozen=True, slots=True, eq=False)
class Dendrogram:
    """The merge history of an agglomerative clustering.

    Attributes
    ----------
    labels : Tuple[str, ...]
        Leaf labels, in matrix order; leaf i has cluster id i.
    merges : Tuple[Merge, ...]
        ``(cluster_a, cluster_b, height, new_id)``; the cluster created by
        merge s has id ``n + s``.
    leaf_order : Tuple[int, ...]
        Leaf indices from the left-to-right traversal of the tree.

    """

    labels: Tuple[str, ...] = attr.ib(converter=tuple)
    merges: Tuple[Merge, ...] = attr.ib(converter=tuple)
    leaf_order: Tuple[int, ...] = attr.ib(converter=tuple)
    linkage: np.ndarray = attr.ib(repr=False)

    @property
    def heights(self) -> List[float]:
        return [height for _, _, height, _ in self.merges]

    @property
    def ordered_labels(self) -> List[str]:
        return [self.labels[i] for i in self.leaf_order]

    def to_newick(self) -> str:
        """Render the tree in Newick format, branch lengths as height differences."""
        root = hierarchy.to_tree(self.linkage)

        def render(node: hierarchy.ClusterNode) -> str:
            if node.is_leaf():
                return _newick_label(self.labels[node.id])
            left, right = node.get_left(), node.get_right()
            return "({}:{!r},{}:{!r})".format(
                render(left),
                float(node.dist - left.dist),
                render(right),
                float(node.dist - right.dist),
            )

        return render(root) + ";\n"


def complete_linkage(matrix: DistanceMatrix) -> Dendrogram:
    """Cluster with complete linkage: clusters merge at their largest pairwise distance.

    Among pairs at the same height, the pair whose clusters hold the lowest
    item indices merges first, comparing the smaller cluster's lowest index,
    then the larger one's.
    """
    n = len(matrix)
    if n < 2:
        raise ValueError("Clustering needs at least two items")
    dist = np.array(matrix.values, dtype=float)
    np.fill_diagonal(dist, np.inf)
    # Slot i holds the cluster whose lowest item index is i.
    active = list(range(n))
    ids = list(range(n))
    sizes = [1] * n
    merges: List[Merge] = []
    rows = []
    for step in range(n - 1):
        # Row-major argmin on the symmetric block returns the lowest (i, j), i < j.
        i, j = divmod(int(np.argmin(dist[np.ix_(active, active)])), len(active))
        a, b = active[i], active[j]
        height = float(dist[a, b])
        first, second = sorted((ids[a], ids[b]))
        merges.append((first, second, height, n + step))
        rows.append((first, second, height, sizes[a] + sizes[b]))

        merged = np.maximum(dist[a], dist[b])
        dist[a, :] = merged
        dist[:, a] = merged
        dist[a, a] = np.inf
        ids[a] = n + step
        sizes[a] += sizes[b]
        del active[j]

    linkage = np.array(rows, dtype=float)
    order = hierarchy.leaves_list(linkage).tolist()
    return Dendrogram(matrix.labels, merges, order, linkage)


@attr.s(frozen=True, slots=True, auto_attribs=True)
class ClusterAssignment:
    """A partition of the items of a distance matrix around medoids.

    Attributes
    ----------
    labels : Tuple[str, ...]
    k : int
    medoids : Tuple[int, ...]
        Item indices, ascending; cluster c has medoid ``medoids[c]``.
    assignment : Tuple[int, ...]
        Cluster id of every item.
    cost : float
        Sum of distances from every item to its medoid.
    silhouette : float
        Mean silhouette score.

    """

    labels: Tuple[str, ...] = attr.ib(converter=tuple)
    k: int
    medoids: Tuple[int, ...] = attr.ib(converter=tuple)
    assignment: Tuple[int, ...] = attr.ib(converter=tuple)
    cost: float
    silhouette: float

    def cluster_of(self, label: str) -> int:
        return self.assignment[self.labels.index(label)]

    def members(self, cluster: int) -> List[str]:
        return [label for label, c in zip(self.labels, self.assignment) if c == cluster]

    def csv_rows(self) -> List[list]:
        medoids = set(self.medoids)
        return [
            [label, cluster, int(index in medoids)]
            for index, (label, cluster) in enumerate(zip(self.labels, self.assignment))
        ]


def _nearest(values: np.ndarray, medoids: np.ndarray):
    to_medoids = values[medoids]
    order = np.argsort(to_medoids, axis=0, kind="stable")
    columns = np.arange(values.shape[0])
    first = to_medoids[order[0], columns]
    second = to_medoids[order[1], columns]
    return order[0], first, second


def _build(values: np.ndarray, k: int) -> List[int]:
    medoids = [int(np.argmin(values.sum(axis=1)))]
    nearest = values[medoids[0]].copy()
    for _ in range(1, k):
        gains = np.maximum(nearest[None, :] - values, 0.0).sum(axis=1)
        gains[medoids] = -np.inf
        chosen = int(np.argmax(gains))
        medoids.append(chosen)
        nearest = np.minimum(nearest, values[chosen])
    return sorted(medoids)


def pam(matrix: DistanceMatrix, k: int, seed: Optional[int] = None) -> ClusterAssignment:
    """Partition the items into ``k`` clusters with PAM (BUILD, then SWAP).

    BUILD greedily adds the medoid that lowers the total cost the most; SWAP
    then applies the best medoid/non-medoid exchange while it strictly lowers
    the cost. Ties go to the lowest index, so the result is deterministic and
    ``seed`` is accepted only for interface symmetry with other estimators.

    Raises
    ------
    KOutOfRange
        Unless ``2 <= k < n``.

    """
    values = matrix.values
    n = len(matrix)
    if not 2 <= k < n:
        raise KOutOfRange(k, n)

    medoids = np.array(_build(values, k))
    while True:
        closest, first, second = _nearest(values, medoids)
        candidates = np.setdiff1d(np.arange(n), medoids)
        to_candidates = values[candidates]
        others = np.minimum(to_candidates - first[None, :], 0.0)
        replaced = np.minimum(to_candidates, second[None, :]) - first[None, :]
        change = np.empty((medoids.size, candidates.size))
        for position in range(medoids.size):
            owned = closest == position
            change[position] = np.where(owned[None, :], replaced, others).sum(axis=1)
        best = int(np.argmin(change))
        position, candidate = divmod(best, candidates.size)
        if change[position, candidate] >= -1e-12:
            break
        medoids[position] = candidates[candidate]
        medoids.sort()

    closest, first, _ = _nearest(values, medoids)
    closest[medoids] = np.arange(medoids.size)
    score = float(silhouette_score(values, closest, metric="precomputed"))
    cost = float(values[medoids[closest], np.arange(n)].sum())
    return ClusterAssignment(matrix.labels, k, medoids.tolist(), closest.tolist(), cost, score)


@attr.s(frozen=True, slots=True, auto_attribs=True)
class SilhouetteSweep:
    best_k: int
    scores: Dict[int, float]
    assignments: Dict[int, ClusterAssignment] = attr.ib(repr=False)

    @property
    def best(self) -> ClusterAssignment:
        return self.assignments[self.best_k]

    def csv_rows(self) -> List[list]:
        return [[k, score] for k, score in sorted(self.scores.items())]


def silhouette_sweep(
    matrix: DistanceMatrix,
    k_range: Tuple[int, int] = (2, 45),
    seed: Optional[int] = None,
    *,
    threads: Optional[int] = None,
) -> SilhouetteSweep:
    """Run PAM for every k in ``k_range`` (inclusive) and keep the best mean silhouette.

    Singleton clusters score 0. On equal scores the smallest k wins.

    Raises
    ------
    KOutOfRange
        Unless ``2 <= k_min <= k_max < n``.

    """
    k_min, k_max = k_range
    n = len(matrix)
    if not 2 <= k_min <= k_max < n:
        raise KOutOfRange(k_max if k_min >= 2 else k_min, n)
    ks = list(range(k_min, k_max + 1))
    found = thread_map(lambda k: pam(matrix, k, seed), ks, threads, desc="Silhouette sweep")
    assignments = dict(zip(ks, found))
    scores = {k: a.silhouette for k, a in assignments.items()}
    best_k = max(ks, key=lambda k: (scores[k], -k))
    log.info("Best silhouette %.4f at k = %s", scores[best_k], best_k)
    return SilhouetteSweep(best_k, scores, assignments)


_SHAPES = {
    MorphType.FUSIONAL: "circle",
    MorphType.AGGLUTINATIVE: "box",
    MorphType.ISOLATING: "diamond",
    MorphType.ISOLATING_FUSIONAL: "circle",
    MorphType.FUSIONAL_AGGLUTINATIVE: "circle",
}


def _edge_style(a: Optional[LanguageRecord], b: Optional[LanguageRecord]) -> str:
    if a is None or b is None:
        return "solid"
    if a.family != b.family:
        return "dotted"
    if a.group != b.group:
        return "dashed"
    return "solid"


def _quote(value) -> str:
    return '"{}"'.format(str(value).replace("\\", "\\\\").replace('"', '\\"'))


@attr.s(frozen=True, slots=True, auto_attribs=True)
class SpanningTree:
    """A spanning tree over the items of a distance matrix.

    Attributes
    ----------
    labels : Tuple[str, ...]
    edges : Tuple[Tuple[str, str, float], ...]
        ``(label_a, label_b, weight)`` with ``label_a`` before ``label_b`` in
        `labels`; sorted by that order.

    """

    labels: Tuple[str, ...] = attr.ib(converter=tuple)
    edges: Tuple[Tuple[str, str, float], ...] = attr.ib(converter=tuple)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def csv_rows(self) -> List[list]:
        return [[a, b, w] for a, b, w in self.edges]

    def to_dot(
        self,
        registry: Optional[Mapping[str, LanguageRecord]] = None,
        clusters: Optional[ClusterAssignment] = None,
    ) -> str:
        """Render the tree as an undirected Graphviz graph.

        Edges are ``solid`` within a language group, ``dashed`` within a
        family and ``dotted`` across families. Node shapes follow the
        morphological type (circle fusional, box agglutinative, diamond
        isolating); mixed types get a dashed outline. With ``clusters`` the
        nodes are filled with one hue per cluster.
        """
        registry = registry or {}
        lines = ["graph mst {", '    node [fontname="Helvetica", style=filled, fillcolor=white];']
        for label in self.labels:
            record = registry.get(label)
            attrs = []
            if record is not None:
                attrs += [
                    f"label={_quote(record.name)}",
                    f"shape={_SHAPES[record.morph_type]}",
                    f"family={_quote(record.family)}",
                    f"group={_quote(record.group)}",
                    f"morph_type={_quote(record.morph_type.value)}",
                ]
                if record.morph_type.is_mixed:
                    attrs.append('style="filled,dashed"')
            if clusters is not None:
                cluster = clusters.cluster_of(label)
                attrs.append(f"cluster={cluster}")
                attrs.append(f'fillcolor="{cluster / clusters.k:.3f} 0.45 0.95"')
            suffix = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"    {_quote(label)}{suffix};")
        for a, b, weight in self.edges:
            style = _edge_style(registry.get(a), registry.get(b))
            lines.append(f"    {_quote(a)} -- {_quote(b)} [len={weight!r}, style={style}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def minimum_spanning_tree(matrix: DistanceMatrix) -> SpanningTree:
    """Get the minimum spanning tree of the complete graph weighted by ``matrix``.

    Kruskal's algorithm considers edges by weight, then by item index, so
    equal weights are resolved towards lower indices.
    """
    n = len(matrix)
    if n < 2:
        raise ValueError("A spanning tree needs at least two items")
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    values = matrix.values
    graph.add_weighted_edges_from(
        (i, j, float(values[i, j])) for i in range(n) for j in range(i + 1, n)
    )
    tree = nx.minimum_spanning_tree(graph, algorithm="kruskal")
    edges = sorted((min(i, j), max(i, j)) for i, j in tree.edges())
    return SpanningTree(
        matrix.labels,
        [(matrix.labels[i], matrix.labels[j], float(values[i, j])) for i, j in edges],
    )


def partition_agreement(a: ClusterAssignment, b: ClusterAssignment) -> float:
    """Adjusted Rand index between two partitions of the same labels."""
    if set(a.labels) != set(b.labels):
        raise ValueError("Partitions must cover the same labels")
    other = [b.cluster_of(label) for label in a.labels]
    return float(adjusted_rand_score(a.assignment, other))
