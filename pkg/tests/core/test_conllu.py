import io

import numpy as np
import pytest

from syntaxdist.core.conllu import (
    Corpus,
    filter_min_tokens,
    parse_conllu,
    read_cache,
    read_conllu_file,
    read_treebanks,
    write_cache,
)
from syntaxdist.core.errors import DataError, MalformedLine, UnknownTag
from syntaxdist.core.tags import PosTag

P = PosTag


def _line(index, upos):
    return "\t".join([str(index), "w", "w", upos, "_", "_", "0", "dep", "_", "_"])


def _conllu(*sentences):
    blocks = []
    for tags in sentences:
        blocks.append("\n".join(_line(i, upos) for i, upos in enumerate(tags, 1)))
    return io.StringIO("\n\n".join(blocks) + "\n\n")


def test_parse_skips_comments_ranges_and_empty_nodes(treebank_dir):
    corpus = read_conllu_file(treebank_dir / "en_mini-ud-test.conllu", language_id="en")
    assert corpus.sentences == [
        (P.DET, P.NOUN, P.VERB, P.PUNCT),
        (P.PRON, P.AUX, P.PART, P.VERB, P.PUNCT),
        (P.PRON, P.VERB, P.ADP, P.DET, P.NOUN, P.PUNCT),
    ]


def test_untagged_sentence_is_dropped(treebank_dir, caplog):
    corpus = read_conllu_file(treebank_dir / "en_mini-ud-test.conllu", language_id="en")
    assert corpus.sentence_count == 3
    assert "untagged" in caplog.text


def test_sym_and_x_fold_into_punct(treebank_dir):
    corpus = read_conllu_file(treebank_dir / "de_mini-ud-test.conllu", language_id="de")
    assert corpus.sentences == [
        (P.DET, P.NOUN, P.AUX, P.NUM, P.PUNCT, P.PUNCT),
        (P.INTJ, P.PUNCT),
    ]


def test_strip_final_punct():
    corpus = parse_conllu(_conllu(["DET", "NOUN", "PUNCT"], ["PUNCT"]), strip_final_punct=True)
    # A sentence left empty disappears.
    assert corpus.sentences == [(P.DET, P.NOUN)]


def test_no_trailing_blank_line():
    stream = io.StringIO(_line(1, "NOUN") + "\n" + _line(2, "VERB"))
    assert parse_conllu(stream).sentences == [(P.NOUN, P.VERB)]


def test_bytes_and_bom():
    raw = ("\ufeff# c\n" + _line(1, "ADJ") + "\n\n").encode("utf-8")
    assert parse_conllu(io.BytesIO(raw)).sentences == [(P.ADJ,)]


def test_malformed_line():
    stream = io.StringIO("1\tw\tw\tNOUN\n")
    with pytest.raises(MalformedLine) as excinfo:
        parse_conllu(stream, source="bad.conllu")
    assert excinfo.value.line == 1
    assert excinfo.value.columns == 4
    assert "bad.conllu:1" in str(excinfo.value)


def test_unknown_tag_carries_location():
    with pytest.raises(UnknownTag) as excinfo:
        parse_conllu(_conllu(["NOUN", "FOO"]), source="x.conllu")
    assert excinfo.value.label == "FOO"
    assert excinfo.value.line == 2
    assert excinfo.value.source == "x.conllu"


def test_read_treebanks_pools_by_prefix(treebank_dir):
    corpora = read_treebanks(treebank_dir, threads=1)
    assert list(corpora) == ["de", "en", "ja"]
    assert {k: (c.sentence_count, c.token_count) for k, c in corpora.items()} == {
        "de": (2, 8),
        "en": (3, 15),
        "ja": (2, 11),
    }
    assert corpora["ja"].sources == ("ja_mini-ud-test.conllu",)


def test_read_treebanks_empty(tmp_path):
    with pytest.raises(DataError, match="Found 0 treebanks"):
        read_treebanks(tmp_path)


def test_filter_min_tokens(treebank_dir):
    corpora = read_treebanks(treebank_dir, threads=1)
    kept = filter_min_tokens(corpora.values(), 10)
    assert [c.language_id for c in kept] == ["en", "ja"]


def test_corpus_select_and_without(toy_corpus):
    picked = toy_corpus.select([2, 0])
    assert picked.sentences == [toy_corpus.sentence(2), toy_corpus.sentence(0)]
    rest = toy_corpus.without([0, 2])
    assert rest.sentences == [toy_corpus.sentence(1)]
    assert rest.token_count == 6


def test_corpus_rejects_bad_lengths():
    with pytest.raises(ValueError):
        Corpus("xx", [1, 2, 3], [2])
    with pytest.raises(ValueError):
        Corpus("xx", [1, 15], [2])


def test_cache_round_trip(tmp_path, treebank_dir):
    corpora = read_treebanks(treebank_dir, threads=1)
    manifest = write_cache(corpora, tmp_path, min_tokens=0)
    assert manifest["min_tokens"] == 0
    assert manifest["languages"][1] == {
        "language_id": "en",
        "sentences": 3,
        "tokens": 15,
        "files": ["en_mini-ud-test.conllu"],
    }
    restored = read_cache(tmp_path)
    assert restored == corpora
    assert list(read_cache(tmp_path, ["ja"])) == ["ja"]


def test_cache_is_byte_identical_on_rewrite(tmp_path, treebank_dir):
    corpora = read_treebanks(treebank_dir, threads=1)
    write_cache(corpora, tmp_path)
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    write_cache(corpora, tmp_path)
    assert {p.name: p.read_bytes() for p in tmp_path.iterdir()} == first


def test_read_cache_missing(tmp_path):
    with pytest.raises(DataError):
        read_cache(tmp_path)


def test_offsets(toy_corpus):
    np.testing.assert_array_equal(toy_corpus.offsets, [0, 4, 10])
