from typing import Optional

__all__ = [
    "SyntaxDistError",
    "DataError",
    "ConfigError",
    "UnknownTag",
    "MalformedLine",
    "DuplicateLanguage",
    "CoordinateOutOfRange",
    "DigitOutOfRange",
    "EmptyCounts",
    "InsufficientData",
    "InconsistentMarginals",
    "MissingContext",
    "SentenceTooShort",
    "MismatchedBlockSize",
    "DuplicateLabel",
    "KOutOfRange",
    "MissingCoordinates",
]


class SyntaxDistError(Exception):
    """Base error class for syntaxdist-related errors."""


class DataError(SyntaxDistError):
    """Base error class for problems with the input data.

    The command line exits with code 1 when one of these escapes a subcommand.
    """


class ConfigError(SyntaxDistError):
    """Raised when a run configuration is invalid.

    The command line exits with code 2 when one of these escapes a subcommand.
    """


class UnknownTag(DataError, ValueError):
    """Raised for a part-of-speech label outside the 17 UPOS labels."""

    def __init__(
        self, label: str, *args, source: Optional[str] = None, line: Optional[int] = None
    ):
        super().__init__(*args)
        self.label = label
        self.source = source
        self.line = line

    def __str__(self) -> str:
        where = f" ({self.source}:{self.line})" if self.source is not None else ""
        return f"Unknown UPOS tag {self.label!r}{where}"


class MalformedLine(DataError):
    """Raised when a CoNLL-U token line does not have 10 columns.

    Attributes
    ----------
    source : str
        Name of the stream the line was read from.
    line : int
        1-based line number.
    columns : int
        Number of tab-separated columns found.

    """

    def __init__(self, source: str, line: int, columns: int, *args):
        super().__init__(*args)
        self.source = source
        self.line = line
        self.columns = columns

    def __str__(self) -> str:
        return f"{self.source}:{self.line}: expected 10 columns, found {self.columns}"


class DuplicateLanguage(DataError):
    """Raised when a registry lists the same language id twice."""

    def __init__(self, language_id: str, *args):
        super().__init__(*args)
        self.language_id = language_id

    def __str__(self) -> str:
        return f"Language {self.language_id!r} appears more than once in the registry"


class CoordinateOutOfRange(DataError, ValueError):
    """Raised for a latitude outside [-90, 90] or a longitude outside [-180, 180]."""

    def __init__(self, language_id: str, latitude: float, longitude: float, *args):
        super().__init__(*args)
        self.language_id = language_id
        self.latitude = latitude
        self.longitude = longitude

    def __str__(self) -> str:
        return (
            f"Coordinates ({self.latitude}, {self.longitude}) of {self.language_id!r} "
            f"are out of range"
        )


class DigitOutOfRange(DataError, ValueError):
    """Raised when a block digit is not a valid tag index."""


class EmptyCounts(DataError):
    """Raised when probabilities are requested from block counts with a zero total."""


class InsufficientData(DataError):
    """Raised when a corpus is too small for the requested analysis."""


class InconsistentMarginals(DataError, ValueError):
    """Raised when exact block distributions do not marginalise onto each other."""


class MissingContext(DataError):
    """Raised when a Markov generator reaches a context without a transition row."""

    def __init__(self, context: int, *args):
        super().__init__(*args)
        self.context = context

    def __str__(self) -> str:
        return f"No transition row for context block {self.context}"


class SentenceTooShort(DataError, ValueError):
    """Raised when a sentence is shorter than a model's order requires."""

    def __init__(self, length: int, order: int, *args):
        super().__init__(*args)
        self.length = length
        self.order = order

    def __str__(self) -> str:
        return f"A sentence of length {self.length} cannot be scored at order {self.order}"


class MismatchedBlockSize(DataError, ValueError):
    """Raised when two block distributions with different block sizes are compared."""


class DuplicateLabel(DataError, ValueError):
    """Raised when a distance matrix would carry the same label twice."""

    def __init__(self, label: str, *args):
        super().__init__(*args)
        self.label = label

    def __str__(self) -> str:
        return f"Label {self.label!r} is used more than once"


class KOutOfRange(DataError, ValueError):
    """Raised when a cluster count is not in the valid range for a matrix."""

    def __init__(self, k: int, n: int, *args):
        super().__init__(*args)
        self.k = k
        self.n = n

    def __str__(self) -> str:
        return f"Cannot form {self.k} clusters from {self.n} items"


class MissingCoordinates(DataError):
    """Raised when a language in a distance matrix has no registry entry."""

    def __init__(self, language_id: str, *args):
        super().__init__(*args)
        self.language_id = language_id

    def __str__(self) -> str:
        return f"No coordinates registered for {self.language_id!r}"
