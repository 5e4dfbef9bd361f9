import pytest

from syntaxdist.core.errors import CoordinateOutOfRange, DataError, DuplicateLanguage
from syntaxdist.core.registry import (
    REGISTRY_COLUMNS,
    LanguageRecord,
    MorphType,
    load_registry,
    registry_by_id,
    save_registry,
)


def _write(path, *rows):
    path.write_text("\n".join([",".join(REGISTRY_COLUMNS), *rows]) + "\n", encoding="utf-8")
    return path


def test_bundled_registry():
    records = load_registry()
    assert len(records) == 67
    by_id = registry_by_id(records)
    assert by_id["ja"].morph_type is MorphType.AGGLUTINATIVE
    assert by_id["en"].family == "Indo-European"
    assert by_id["en"].group == "Germanic"
    assert "af" in by_id


def test_morph_type_properties():
    assert MorphType.ISOLATING_FUSIONAL.is_mixed
    assert MorphType.ISOLATING_FUSIONAL.is_isolating
    assert not MorphType.FUSIONAL.is_mixed
    assert not MorphType.AGGLUTINATIVE.is_isolating


def test_round_trip(tmp_path, toy_registry):
    path = tmp_path / "languages.csv"
    save_registry(toy_registry, path)
    assert load_registry(path) == toy_registry


def test_duplicate_language(tmp_path):
    path = _write(
        tmp_path / "r.csv",
        "aa,A,F,,fusional,1,2",
        "aa,A2,F,,fusional,3,4",
    )
    with pytest.raises(DuplicateLanguage) as excinfo:
        load_registry(path)
    assert excinfo.value.language_id == "aa"


@pytest.mark.parametrize("lat, lon", [(91, 0), (-90.5, 0), (0, 180.01), (0, -181)])
def test_coordinates_out_of_range(tmp_path, lat, lon):
    path = _write(tmp_path / "r.csv", f"aa,A,F,,fusional,{lat},{lon}")
    with pytest.raises(CoordinateOutOfRange):
        load_registry(path)


def test_bad_morph_type(tmp_path):
    path = _write(tmp_path / "r.csv", "aa,A,F,,polysynthetic,0,0")
    with pytest.raises(DataError, match="polysynthetic"):
        load_registry(path)


def test_bad_header(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("id,name\naa,A\n", encoding="utf-8")
    with pytest.raises(DataError, match="header"):
        load_registry(path)


def test_record_converts_fields():
    record = LanguageRecord("aa", "A", "F", "", "Isolating", "10.5", "-3")
    assert record.morph_type is MorphType.ISOLATING
    assert record.latitude == 10.5
    assert record.longitude == -3.0
