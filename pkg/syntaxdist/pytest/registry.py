import pytest

from syntaxdist.core.registry import LanguageRecord

__all__ = ["toy_registry"]


@pytest.fixture()
def toy_registry():
    return [
        LanguageRecord("aa", "Alpha", "Family A", "Group A", "fusional", 48.0, 10.0),
        LanguageRecord("ab", "Beta", "Family A", "Group B", "agglutinative", 50.0, 12.0),
        LanguageRecord("zz", "Zeta", "Family Z", "", "isolating", -10.0, 120.0),
    ]
