from .. import __version__
from .config import RunConfig
from .conllu import Corpus
from .distance import DistanceMatrix, Metric
from .entropy import Estimator
from .tags import L, PosTag, map_upos

__all__ = [
    "__version__",
    "Corpus",
    "DistanceMatrix",
    "Estimator",
    "L",
    "Metric",
    "PosTag",
    "RunConfig",
    "map_upos",
]
