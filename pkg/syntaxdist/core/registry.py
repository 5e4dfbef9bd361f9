"""The language metadata registry.

Each language carries its family, group and morphological type together with
one representative location (a WALS-style latitude/longitude pair). The
package ships a registry of 67 languages in ``data/languages.csv``.
"""
import csv
import enum
import io
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import attr

from . import data_manager
from .errors import CoordinateOutOfRange, DataError, DuplicateLanguage

__all__ = [
    "MorphType",
    "LanguageRecord",
    "REGISTRY_COLUMNS",
    "load_registry",
    "save_registry",
    "bundled_registry_path",
    "registry_by_id",
]

log = logging.getLogger("syntaxdist.registry")

REGISTRY_COLUMNS = ("language_id", "name", "family", "group", "morph_type", "latitude", "longitude")


class MorphType(enum.Enum):
    FUSIONAL = "fusional"
    AGGLUTINATIVE = "agglutinative"
    ISOLATING = "isolating"
    ISOLATING_FUSIONAL = "isolating-fusional"
    FUSIONAL_AGGLUTINATIVE = "fusional-agglutinative"

    @property
    def is_mixed(self) -> bool:
        return "-" in self.value

    @property
    def is_isolating(self) -> bool:
        return self.value.startswith("isolating")


def _morph_type(value) -> MorphType:
    if isinstance(value, MorphType):
        return value
    try:
        return MorphType(str(value).strip().lower())
    except ValueError:
        raise DataError(f"Unknown morphological type {value!r}") from None


@attr.s(frozen=True, slots=True, auto_attribs=True)
class LanguageRecord:
    """Metadata for one language.

    Attributes
    ----------
    language_id : str
        The identifier treebanks are keyed by (UD file prefix, e.g. ``"de"``).
    name : str
    family : str
    group : str
        Empty for isolates and single-member families.
    morph_type : MorphType
    latitude : float
        Degrees in [-90, 90].
    longitude : float
        Degrees in [-180, 180].

    """

    language_id: str
    name: str
    family: str
    group: str
    morph_type: MorphType = attr.ib(converter=_morph_type)
    latitude: float = attr.ib(converter=float)
    longitude: float = attr.ib(converter=float)

    def __attrs_post_init__(self):
        if not (-90.0 <= self.latitude <= 90.0 and -180.0 <= self.longitude <= 180.0):
            raise CoordinateOutOfRange(self.language_id, self.latitude, self.longitude)

    def to_row(self) -> List[str]:
        return [
            self.language_id,
            self.name,
            self.family,
            self.group,
            self.morph_type.value,
            repr(self.latitude),
            repr(self.longitude),
        ]


def bundled_registry_path() -> Path:
    return data_manager.bundled_data_path() / "languages.csv"


def load_registry(path: Optional[Path] = None) -> List[LanguageRecord]:
    """Read a registry CSV.

    Parameters
    ----------
    path : Optional[pathlib.Path]
        CSV with the header ``language_id,name,family,group,morph_type,latitude,longitude``.
        Defaults to the bundled registry.

    Returns
    -------
    List[LanguageRecord]
        Records in file order.

    Raises
    ------
    DuplicateLanguage
        If a language id occurs twice.
    CoordinateOutOfRange
        If a row has an invalid latitude or longitude.
    DataError
        If the header or a row is malformed.

    """
    path = bundled_registry_path() if path is None else Path(path)
    with path.open(encoding="utf-8", newline="") as fs:
        reader = csv.DictReader(fs)
        if tuple(reader.fieldnames or ()) != REGISTRY_COLUMNS:
            raise DataError(
                f"{path}: expected the header {','.join(REGISTRY_COLUMNS)}, "
                f"found {','.join(reader.fieldnames or ())}"
            )
        records: List[LanguageRecord] = []
        seen = set()
        for row in reader:
            language_id = row["language_id"].strip()
            if language_id in seen:
                raise DuplicateLanguage(language_id)
            seen.add(language_id)
            try:
                records.append(
                    LanguageRecord(
                        language_id=language_id,
                        name=row["name"].strip(),
                        family=row["family"].strip(),
                        group=row["group"].strip(),
                        morph_type=row["morph_type"],
                        latitude=row["latitude"],
                        longitude=row["longitude"],
                    )
                )
            except (TypeError, ValueError) as e:
                if isinstance(e, CoordinateOutOfRange):
                    raise
                raise DataError(f"{path}: bad row for {language_id!r}: {e}") from e
    log.debug("Loaded %s languages from %s", len(records), path)
    return records


def save_registry(records: Iterable[LanguageRecord], path: Path) -> None:
    """Write records in the format `load_registry` reads."""
    records = list(records)
    seen = set()
    for record in records:
        if record.language_id in seen:
            raise DuplicateLanguage(record.language_id)
        seen.add(record.language_id)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REGISTRY_COLUMNS)
    writer.writerows(record.to_row() for record in records)
    data_manager.atomic_write_text(Path(path), buffer.getvalue())


def registry_by_id(records: Iterable[LanguageRecord]) -> Dict[str, LanguageRecord]:
    return {record.language_id: record for record in records}
