"""Run configuration.

A run is described by one YAML document. Every key is optional; missing
keys take the defaults below. Precedence is: defaults, then the
configuration file, then command-line options.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import attr
import yaml
from schema import And, Optional as Opt, Or, Schema, SchemaError, Use

from . import data_manager
from .distance import Metric
from .entropy import Estimator
from .errors import ConfigError
from .ngrams import MAX_BLOCK_SIZE

__all__ = [
    "IngestSettings",
    "GainSettings",
    "MemorySettings",
    "IdentifySettings",
    "ClusterSettings",
    "GeoSettings",
    "SampleSettings",
    "RunConfig",
    "load_config",
]

log = logging.getLogger("syntaxdist.config")

DEFAULT_LANGUAGES = ("de", "is", "pt", "cs")


def _pair(value) -> Tuple[int, int]:
    low, high = value
    return int(low), int(high)


@attr.s(frozen=True, slots=True, auto_attribs=True)
class IngestSettings:
    min_tokens: int = 10000
    strip_final_punct: bool = False


@attr.s(frozen=True, slots=True, auto_attribs=True)
class GainSettings:
    # None uses r_max of each corpus.
    max_size: Optional[int] = None


@attr.s(frozen=True, slots=True, auto_attribs=True)
class MemorySettings:
    m: int = 2
    K: int = 1000
    sigmas: float = 3.0


@attr.s(frozen=True, slots=True, auto_attribs=True)
class IdentifySettings:
    K: int = 1000
    repetitions: int = 10
    length_range: Tuple[int, int] = attr.ib(default=(5, 20), converter=_pair)
    orders: Tuple[int, ...] = attr.ib(default=(0, 1, 2, 3), converter=tuple)
    alpha: float = 0.0


@attr.s(frozen=True, slots=True, auto_attribs=True)
class ClusterSettings:
    k_range: Tuple[int, int] = attr.ib(default=(2, 45), converter=_pair)
    # None takes the k with the best silhouette.
    k: Optional[int] = None


@attr.s(frozen=True, slots=True, auto_attribs=True)
class GeoSettings:
    permutations: int = 1000
    exclude: Tuple[str, ...] = attr.ib(default=("af",), converter=tuple)
    log_distance_correlation: bool = False
    panel_languages: Tuple[str, ...] = attr.ib(default=("de", "pt", "cs", "eu"), converter=tuple)


@attr.s(frozen=True, slots=True, auto_attribs=True)
class SampleSettings:
    target_tokens: int = 10000
    max_samples: int = 20


_SECTIONS = {
    "ingest": IngestSettings,
    "gain": GainSettings,
    "memory": MemorySettings,
    "identify": IdentifySettings,
    "cluster": ClusterSettings,
    "geo": GeoSettings,
    "samples": SampleSettings,
}

# Keys that locate files rather than change results; kept out of the digest.
_PATH_KEYS = ("data_dir", "registry_path", "output_dir")


def _optional_path(value) -> Optional[Path]:
    return None if value is None else Path(value)


@attr.s(frozen=True, slots=True, auto_attribs=True)
class RunConfig:
    """Everything a run depends on.

    Attributes
    ----------
    data_dir : Optional[pathlib.Path]
        Directory searched for ``*.conllu`` treebanks.
    registry_path : Optional[pathlib.Path]
        Language registry CSV; ``None`` uses the bundled one.
    output_dir : pathlib.Path
        Root of the tag cache and of every report.
    block_size : int
        Block size r of the distance matrices.
    metric : Metric
    estimator : Estimator
        Entropy estimator behind gain curves and memory tests.
    seed : int
        Master seed of every random stream.
    threads : Optional[int]
        Worker threads; ``None`` uses every core.
    languages : Tuple[str, ...]
        Languages of the gain, memory and identification experiments.

    """

    data_dir: Optional[Path] = attr.ib(default=None, converter=_optional_path)
    registry_path: Optional[Path] = attr.ib(default=None, converter=_optional_path)
    output_dir: Path = attr.ib(default=Path("syntaxdist-output"), converter=Path)
    block_size: int = 3
    metric: Metric = attr.ib(default=Metric.JENSEN_SHANNON, converter=Metric)
    estimator: Estimator = attr.ib(default=Estimator.NSB, converter=Estimator)
    seed: int = 0
    threads: Optional[int] = None
    languages: Tuple[str, ...] = attr.ib(default=DEFAULT_LANGUAGES, converter=tuple)
    ingest: IngestSettings = attr.ib(factory=IngestSettings)
    gain: GainSettings = attr.ib(factory=GainSettings)
    memory: MemorySettings = attr.ib(factory=MemorySettings)
    identify: IdentifySettings = attr.ib(factory=IdentifySettings)
    cluster: ClusterSettings = attr.ib(factory=ClusterSettings)
    geo: GeoSettings = attr.ib(factory=GeoSettings)
    samples: SampleSettings = attr.ib(factory=SampleSettings)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "RunConfig":
        """Build a configuration from a plain mapping, validating it first.

        Raises
        ------
        ConfigError
            On unknown keys, wrong types, out-of-range values, or settings
            that contradict each other.

        """
        try:
            data = _SCHEMA.validate(data or {})
        except SchemaError as e:
            raise ConfigError(f"Invalid configuration: {e.code}") from None
        kwargs = {}
        for key, value in data.items():
            if key in _SECTIONS:
                kwargs[key] = _SECTIONS[key](**value)
            else:
                kwargs[key] = value
        config = cls(**kwargs)
        config._check_consistency()
        return config

    def _check_consistency(self) -> None:
        shortest = self.identify.length_range[0]
        highest = max(self.identify.orders)
        # An order-u model scores the first u + 1 tags of a sentence at once.
        if shortest < highest + 1:
            raise ConfigError(
                f"Invalid configuration: identify.length_range starts at {shortest}, but order "
                f"{highest} needs sentences of at least {highest + 1} tags"
            )

    def to_dict(self) -> Dict[str, Any]:
        def plain(value):
            if isinstance(value, Path):
                return value.as_posix()
            if isinstance(value, (Metric, Estimator)):
                return value.value
            if isinstance(value, tuple):
                return [plain(v) for v in value]
            return value

        data = {}
        for field in attr.fields(RunConfig):
            value = getattr(self, field.name)
            if field.name in _SECTIONS:
                data[field.name] = {k: plain(v) for k, v in attr.asdict(value, recurse=False).items()}
            else:
                data[field.name] = plain(value)
        return data

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"Configuration is not valid YAML: {e}") from None
        if data is not None and not isinstance(data, dict):
            raise ConfigError("A configuration file holds one mapping")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read configuration {path}: {e.strerror}") from None
        log.debug("Loaded configuration from %s", path)
        return cls.from_yaml(text)

    def save(self, path: Path) -> None:
        data_manager.atomic_write_text(path, self.to_yaml())

    def with_overrides(self, **overrides) -> "RunConfig":
        """Apply overrides, skipping ``None`` values.

        Keys may name a section field as ``"section.field"`` given through
        a mapping, e.g. ``**{"ingest.min_tokens": 5000}``.
        """
        data = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            if "." in key:
                section, field = key.split(".", 1)
                data[section][field] = value
            else:
                data[key] = value
        return RunConfig.from_dict(data)

    def digest(self) -> str:
        """SHA-256 of the settings that affect results (file locations excluded)."""
        data = self.to_dict()
        for key in _PATH_KEYS:
            data.pop(key)
        return data_manager.json_digest(data)


def _positive(kind=int):
    return And(kind, lambda v: v > 0)


def _non_negative(kind=int):
    return And(kind, lambda v: v >= 0)


def _range(minimum: int):
    return And(
        Or(list, tuple),
        lambda v: len(v) == 2 and all(isinstance(x, int) for x in v),
        lambda v: minimum <= v[0] <= v[1],
    )


_SCHEMA = Schema(
    {
        Opt("data_dir"): Or(None, str),
        Opt("registry_path"): Or(None, str),
        Opt("output_dir"): str,
        Opt("block_size"): And(int, lambda v: 1 <= v <= MAX_BLOCK_SIZE),
        Opt("metric"): And(str, Use(Metric)),
        Opt("estimator"): And(str, Use(Estimator)),
        Opt("seed"): _non_negative(),
        Opt("threads"): Or(None, _positive()),
        Opt("languages"): [str],
        Opt("ingest"): {
            Opt("min_tokens"): _non_negative(),
            Opt("strip_final_punct"): bool,
        },
        Opt("gain"): {Opt("max_size"): Or(None, And(int, lambda v: 2 <= v <= MAX_BLOCK_SIZE))},
        Opt("memory"): {
            Opt("m"): _non_negative(),
            Opt("K"): _positive(),
            Opt("sigmas"): _positive(Or(int, float)),
        },
        Opt("identify"): {
            Opt("K"): _positive(),
            Opt("repetitions"): _positive(),
            Opt("length_range"): _range(1),
            Opt("orders"): And([_non_negative()], len),
            Opt("alpha"): _non_negative(Or(int, float)),
        },
        Opt("cluster"): {
            Opt("k_range"): _range(2),
            Opt("k"): Or(None, And(int, lambda v: v >= 2)),
        },
        Opt("geo"): {
            Opt("permutations"): _positive(),
            Opt("exclude"): [str],
            Opt("log_distance_correlation"): bool,
            Opt("panel_languages"): [str],
        },
        Opt("samples"): {
            Opt("target_tokens"): _positive(),
            Opt("max_samples"): _positive(),
        },
    }
)


def load_config(path: Optional[Path] = None) -> RunConfig:
    """Load the configuration a run should start from.

    Without ``path`` the per-user file is used when it exists, and the
    built-in defaults otherwise.
    """
    if path is not None:
        return RunConfig.load(path)
    if data_manager.user_config_file.exists():
        log.info("Using configuration %s", data_manager.user_config_file)
        return RunConfig.load(data_manager.user_config_file)
    return RunConfig()
