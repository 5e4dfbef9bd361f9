import enum

from .errors import UnknownTag

__all__ = ["L", "PosTag", "UPOS_LABELS", "map_upos"]


class PosTag(enum.IntEnum):
    """The 15 part-of-speech categories, indexed in alphabetical order.

    The Universal Dependencies ``SYM`` and ``X`` labels are folded into
    `PUNCT`, so the "others" class is a single symbol.
    """

    # Maintainer Note: do NOT re-order these.
    # Block indices are base-15 numbers over these values.

    ADJ = 0
    ADP = 1
    ADV = 2
    AUX = 3
    CCONJ = 4
    DET = 5
    INTJ = 6
    NOUN = 7
    NUM = 8
    PART = 9
    PRON = 10
    PROPN = 11
    PUNCT = 12
    SCONJ = 13
    VERB = 14

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}.{self.name}>"


L = len(PosTag)

UPOS_LABELS = frozenset((*PosTag.__members__, "SYM", "X"))

_UPOS_TO_TAG = {**{tag.name: tag for tag in PosTag}, "SYM": PosTag.PUNCT, "X": PosTag.PUNCT}


def map_upos(upos_label: str) -> PosTag:
    """Map a UPOS label onto the 15-symbol alphabet.

    Parameters
    ----------
    upos_label : str
        One of the 17 Universal Dependencies UPOS labels.

    Returns
    -------
    PosTag
        The matching tag. ``SYM`` and ``X`` map to `PosTag.PUNCT`.

    Raises
    ------
    UnknownTag
        If the label is not a UPOS label.

    """
    try:
        return _UPOS_TO_TAG[upos_label]
    except KeyError:
        raise UnknownTag(upos_label) from None
