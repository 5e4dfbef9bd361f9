from pathlib import Path

import pytest

from syntaxdist.pytest import *

DATA = Path(__file__).parent / "data"


@pytest.fixture()
def treebank_dir():
    return DATA / "treebanks"
