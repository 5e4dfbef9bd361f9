"""Correlation between linguistic and geographic distances."""
import logging
import math
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import attr
import dcor
import numpy as np
from scipy import stats
from scipy.spatial.distance import squareform

from .distance import DistanceMatrix
from .errors import MissingCoordinates
from .registry import LanguageRecord, registry_by_id
from .utils import derive_rng, thread_map

__all__ = [
    "EARTH_RADIUS_KM",
    "DEFAULT_EXCLUDE",
    "GeoCorrelation",
    "LanguageCorrelation",
    "haversine_km",
    "geodesic_km",
    "geodesic_matrix",
    "distance_correlation",
    "correlate",
    "per_language_correlation",
]

log = logging.getLogger("syntaxdist.geo")

EARTH_RADIUS_KM = 6371.0088
# Afrikaans is spoken far from every other language of its family.
DEFAULT_EXCLUDE = ("af",)

Registry = Union[Mapping[str, LanguageRecord], Iterable[LanguageRecord]]


def haversine_km(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Great-circle distance in km between points given in degrees; broadcasts."""
    lat1, lon1, lat2, lon2 = (np.radians(np.asarray(v, dtype=np.float64)) for v in (lat1, lon1, lat2, lon2))
    a = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def geodesic_km(a: LanguageRecord, b: LanguageRecord) -> float:
    return float(haversine_km(a.latitude, a.longitude, b.latitude, b.longitude))


def _as_mapping(registry: Registry) -> Mapping[str, LanguageRecord]:
    return registry if isinstance(registry, Mapping) else registry_by_id(registry)


def _records(labels: Sequence[str], registry: Mapping[str, LanguageRecord]) -> List[LanguageRecord]:
    try:
        return [registry[label] for label in labels]
    except KeyError as e:
        raise MissingCoordinates(e.args[0]) from None


def geodesic_matrix(records: Sequence[LanguageRecord]) -> np.ndarray:
    lat = np.array([r.latitude for r in records])
    lon = np.array([r.longitude for r in records])
    values = haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    np.fill_diagonal(values, 0.0)
    return (values + values.T) / 2


def _log_pearson(linguistic: np.ndarray, geographic: np.ndarray, what: str) -> Tuple[float, float]:
    positive = geographic > 0
    if not np.all(positive):
        log.warning(
            "%s: excluding %s pairs at zero geodesic distance from the log-scale Pearson correlation",
            what,
            int(np.count_nonzero(~positive)),
        )
    x, y = linguistic[positive], np.log10(geographic[positive])
    if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        log.warning("%s: Pearson correlation is undefined (constant input)", what)
        return math.nan, math.nan
    r, p = stats.pearsonr(x, y)
    return float(r), float(p)


@attr.s(frozen=True, slots=True, auto_attribs=True)
class GeoCorrelation:
    """Dependence between linguistic and geodesic distances over all language pairs.

    Attributes
    ----------
    labels : Tuple[str, ...]
        Languages that took part.
    pairs : Tuple[Tuple[str, str, float, float], ...]
        ``(lang_a, lang_b, d_ling, d_geo_km)``.
    pearson_r : float
        Pearson correlation of d_ling with log10 of d_geo_km.
    distance_correlation : float
    p_value : float
        Permutation p-value of `distance_correlation`.
    permutations : int
    log_distance_correlation : bool
        Whether the distance correlation used log10 geodesic distances.

    """

    labels: Tuple[str, ...] = attr.ib(converter=tuple)
    pairs: Tuple[Tuple[str, str, float, float], ...] = attr.ib(converter=tuple)
    pearson_r: float
    distance_correlation: float
    p_value: float
    permutations: int
    log_distance_correlation: bool = False

    def csv_rows(self) -> List[list]:
        return [list(pair) for pair in self.pairs]

    def to_json(self) -> dict:
        return {
            "languages": list(self.labels),
            "pairs": len(self.pairs),
            "pearson_r_log10": self.pearson_r,
            "distance_correlation": self.distance_correlation,
            "p_value_permutation": self.p_value,
            "permutations": self.permutations,
            "log_distance_correlation": self.log_distance_correlation,
        }


def distance_correlation(
    linguistic: np.ndarray, geographic: np.ndarray, use_log: bool = False
) -> float:
    """Sample distance correlation R_d of two pair-value vectors, without bias correction.

    With ``use_log`` the geodesic distances enter as log10 km.
    """
    if use_log:
        geographic = np.log10(np.maximum(geographic, 1e-9))
    return float(dcor.distance_correlation(linguistic, geographic))


def correlate(
    matrix: DistanceMatrix,
    registry: Registry,
    exclude: Iterable[str] = DEFAULT_EXCLUDE,
    permutations: int = 1000,
    seed: Optional[int] = None,
    *,
    log_distance_correlation: bool = False,
    threads: Optional[int] = None,
) -> GeoCorrelation:
    """Correlate linguistic distances with geodesic distances.

    The distance correlation is tested by permuting the assignment of
    locations to languages, which keeps the dependence between pairs that
    share a language. The p-value is ``(b + 1) / (permutations + 1)`` for
    ``b`` permutations reaching the observed value.

    Raises
    ------
    MissingCoordinates
        If a language has no registry entry.

    """
    if permutations < 1:
        raise ValueError("permutations must be positive")
    matrix = matrix.without(exclude)
    records = _records(matrix.labels, _as_mapping(registry))
    geo = geodesic_matrix(records)
    linguistic = matrix.condensed()
    geographic = squareform(geo, checks=False)

    pearson_r, _ = _log_pearson(linguistic, geographic, "all pairs")
    observed = distance_correlation(linguistic, geographic, log_distance_correlation)

    n = len(matrix)

    def _permuted(index: int) -> float:
        order = derive_rng(seed, "geo_permutation", index).permutation(n)
        shuffled = squareform(geo[np.ix_(order, order)], checks=False)
        return distance_correlation(linguistic, shuffled, log_distance_correlation)

    null = np.array(thread_map(_permuted, range(permutations), threads, desc="Permutations"))
    reached = int(np.count_nonzero(null >= observed))
    p_value = (reached + 1) / (permutations + 1)

    labels = matrix.labels
    index_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pairs = [
        (labels[i], labels[j], float(d), float(g))
        for (i, j), d, g in zip(index_pairs, linguistic.tolist(), geographic.tolist())
    ]
    log.info(
        "%s languages: Pearson r (log10 km) = %.3f, R_d = %.3f, p = %.4g",
        n,
        pearson_r,
        observed,
        p_value,
    )
    return GeoCorrelation(
        labels, pairs, pearson_r, observed, p_value, permutations, log_distance_correlation
    )


@attr.s(frozen=True, slots=True, auto_attribs=True)
class LanguageCorrelation:
    """Distances from one language to all others, and their Pearson correlation.

    ``pearson_r`` and ``p_value`` are NaN, with ``defined`` unset, when
    either distance is constant.
    """

    language_id: str
    pairs: Tuple[Tuple[str, float, float], ...] = attr.ib(converter=tuple)
    pearson_r: float
    p_value: float

    @property
    def defined(self) -> bool:
        return not math.isnan(self.pearson_r)

    def csv_rows(self) -> List[list]:
        return [[self.language_id, other, d, g] for other, d, g in self.pairs]


def per_language_correlation(
    matrix: DistanceMatrix,
    registry: Registry,
    language_id: str,
    exclude: Iterable[str] = DEFAULT_EXCLUDE,
) -> LanguageCorrelation:
    """Correlate one language's linguistic distances with log10 geodesic distances.

    Raises
    ------
    MissingCoordinates
        If a language has no registry entry.

    """
    exclude = set(exclude) - {language_id}
    matrix = matrix.without(exclude)
    mapping = _as_mapping(registry)
    index = matrix.index(language_id)
    records = _records(matrix.labels, mapping)
    others = [i for i in range(len(matrix)) if i != index]

    origin = records[index]
    linguistic = matrix.values[index, others]
    geographic = np.array([geodesic_km(origin, records[i]) for i in others])
    r, p = _log_pearson(linguistic, geographic, language_id)
    pairs = [
        (matrix.labels[i], float(d), float(g))
        for i, d, g in zip(others, linguistic.tolist(), geographic.tolist())
    ]
    return LanguageCorrelation(language_id, pairs, r, p)
