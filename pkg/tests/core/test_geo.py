import math

import numpy as np
import pytest

from syntaxdist.core.distance import DistanceMatrix
from syntaxdist.core.errors import MissingCoordinates
from syntaxdist.core.geo import (
    EARTH_RADIUS_KM,
    correlate,
    distance_correlation,
    geodesic_km,
    geodesic_matrix,
    haversine_km,
    per_language_correlation,
)
from syntaxdist.core.registry import LanguageRecord


def _records(n, seed=0):
    rng = np.random.default_rng(seed)
    return [
        LanguageRecord(f"l{i}", f"Lang {i}", "Family", "", "fusional", lat, lon)
        for i, (lat, lon) in enumerate(zip(rng.uniform(-60, 60, n), rng.uniform(-170, 170, n)))
    ]


def _geographic_matrix(records):
    geo = geodesic_matrix(records)
    return DistanceMatrix([r.language_id for r in records], geo / geo.max(), "jensen_shannon", 3)


def test_haversine_antipodes_on_equator():
    assert haversine_km(0, 0, 0, 180) == pytest.approx(math.pi * EARTH_RADIUS_KM)
    assert haversine_km(0, 0, 0, 180) == pytest.approx(20015.1, abs=0.1)


def test_haversine_berlin_paris():
    assert haversine_km(52.52, 13.405, 48.8566, 2.3522) == pytest.approx(878, abs=2)


def test_haversine_broadcasts():
    values = haversine_km(np.zeros((3, 1)), np.zeros((3, 1)), np.zeros((1, 4)), np.arange(4))
    assert values.shape == (3, 4)
    assert values[0, 0] == 0


def test_geodesic_matrix():
    records = _records(5)
    geo = geodesic_matrix(records)
    np.testing.assert_array_equal(geo, geo.T)
    assert np.all(np.diag(geo) == 0)
    assert geo[1, 3] == pytest.approx(geodesic_km(records[1], records[3]))


def test_linear_relation_is_fully_dependent():
    records = _records(9)
    result = correlate(_geographic_matrix(records), records, exclude=(), permutations=99, seed=1)
    assert result.distance_correlation == pytest.approx(1.0)
    assert result.p_value == pytest.approx(1 / 100)
    assert result.pearson_r > 0
    assert len(result.pairs) == 9 * 8 // 2
    assert result.to_json()["permutations"] == 99


def test_permutation_test_reproducible():
    records = _records(7, seed=2)
    rng = np.random.default_rng(9)
    raw = rng.random((7, 7))
    values = (raw + raw.T) / 2
    np.fill_diagonal(values, 0)
    matrix = DistanceMatrix([r.language_id for r in records], values, "hellinger", 3)

    first = correlate(matrix, records, exclude=(), permutations=50, seed=4, threads=1)
    second = correlate(matrix, records, exclude=(), permutations=50, seed=4, threads=3)
    assert first == second
    assert 1 / 51 <= first.p_value <= 1


def test_default_exclusion():
    records = _records(5)
    records.append(LanguageRecord("af", "Afrikaans", "Family", "", "fusional", -31.0, 22.0))
    geo = geodesic_matrix(records)
    matrix = DistanceMatrix([r.language_id for r in records], geo / geo.max(), "jensen_shannon", 3)
    result = correlate(matrix, records, permutations=10, seed=0)
    assert "af" not in result.labels
    assert len(result.labels) == 5
    assert "af" in correlate(matrix, records, exclude=(), permutations=10, seed=0).labels


def test_missing_coordinates():
    records = _records(3)
    matrix = DistanceMatrix(["l0", "l1", "qq"], [[0, 0.2, 0.3], [0.2, 0, 0.4], [0.3, 0.4, 0]], "jensen_shannon", 3)
    with pytest.raises(MissingCoordinates):
        correlate(matrix, records, exclude=(), permutations=5)
    with pytest.raises(MissingCoordinates):
        per_language_correlation(matrix, records, "l0", exclude=())


def test_per_language_correlation():
    records = _records(6, seed=3)
    result = per_language_correlation(_geographic_matrix(records), records, "l2", exclude=())
    assert result.defined
    assert result.pearson_r > 0
    assert [other for other, _, _ in result.pairs] == ["l0", "l1", "l3", "l4", "l5"]
    assert result.csv_rows()[0][0] == "l2"


def test_per_language_keeps_excluded_origin():
    records = _records(6, seed=3)
    result = per_language_correlation(_geographic_matrix(records), records, "l2", exclude=("l2", "l5"))
    assert [other for other, _, _ in result.pairs] == ["l0", "l1", "l3", "l4"]


def test_per_language_undefined_for_constant_distances():
    records = _records(4)
    values = np.full((4, 4), 0.5)
    values[1:, 1:] = 0.3
    np.fill_diagonal(values, 0)
    matrix = DistanceMatrix([r.language_id for r in records], values, "jensen_shannon", 3)
    result = per_language_correlation(matrix, records, "l0", exclude=())
    assert not result.defined
    assert math.isnan(result.p_value)


def _null_matrix(records, seed):
    rng = np.random.default_rng(seed)
    raw = rng.random((len(records), len(records)))
    values = (raw + raw.T) / 2
    np.fill_diagonal(values, 0)
    return DistanceMatrix([r.language_id for r in records], values, "jensen_shannon", 3)


def test_distance_correlation_of_a_vector_with_itself():
    values = np.random.default_rng(0).random(200)
    assert distance_correlation(values, values) == pytest.approx(1.0)


@pytest.mark.slow
def test_permutation_p_value_is_uniform_under_null():
    small = 0
    for trial in range(100):
        records = _records(10, seed=1000 + trial)
        result = correlate(_null_matrix(records, trial), records, exclude=(), permutations=199, seed=trial)
        small += result.p_value < 0.05
    assert 0.01 <= small / 100 <= 0.12


@pytest.mark.slow
def test_distance_correlation_of_independent_vectors_vanishes():
    rng = np.random.default_rng(3)

    def mean_over_trials(n):
        return np.mean([distance_correlation(rng.random(n), rng.random(n)) for _ in range(200)])

    # Without bias correction the null mean is about 1.5 / sqrt(n), roughly 0.11 at n = 200.
    at_200 = mean_over_trials(200)
    assert at_200 < 0.13
    assert at_200 < 0.6 * mean_over_trials(50)
    assert mean_over_trials(800) < 0.1
