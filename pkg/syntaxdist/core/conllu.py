"""Reading CoNLL-U treebanks into part-of-speech tag sequences.

Only the UPOS column is consumed. A `Corpus` keeps all of a language's
sentences in one flat tag array, which is what the counting code in
`syntaxdist.core.ngrams` works on.
"""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from . import data_manager
from .errors import DataError, MalformedLine, UnknownTag
from .tags import L, PosTag, map_upos
from .utils import thread_map

__all__ = [
    "TagSequence",
    "Corpus",
    "parse_conllu",
    "read_conllu_file",
    "read_treebanks",
    "filter_min_tokens",
    "write_cache",
    "read_cache",
    "MANIFEST_NAME",
]

log = logging.getLogger("syntaxdist.ingest")

TagSequence = Tuple[int, ...]

MANIFEST_NAME = "manifest.json"
CACHE_SUFFIX = ".tags"

_UNTAGGED = "_"


def _as_tags(value) -> np.ndarray:
    return np.ascontiguousarray(value, dtype=np.int8).reshape(-1)


def _as_lengths(value) -> np.ndarray:
    return np.ascontiguousarray(value, dtype=np.int64).reshape(-1)


@attr.s(frozen=True, slots=True, eq=False, repr=False)
class Corpus:
    """All tagged sentences of one language.

    Attributes
    ----------
    language_id : str
        ISO-like language code.
    tags : numpy.ndarray
        Every sentence's tags, concatenated.
    lengths : numpy.ndarray
        Sentence lengths; ``lengths.sum() == len(tags)``.
    sources : Tuple[str, ...]
        Names of the files the sentences were read from.

    """

    language_id: str = attr.ib()
    tags: np.ndarray = attr.ib(converter=_as_tags)
    lengths: np.ndarray = attr.ib(converter=_as_lengths)
    sources: Tuple[str, ...] = attr.ib(default=(), converter=tuple)

    def __attrs_post_init__(self):
        if self.lengths.size and self.lengths.min() < 1:
            raise ValueError("Sentences must contain at least one tag")
        if int(self.lengths.sum()) != self.tags.size:
            raise ValueError("Sentence lengths do not add up to the number of tags")
        if self.tags.size and (self.tags.min() < 0 or self.tags.max() >= L):
            raise ValueError(f"Tag indices must lie in [0, {L - 1}]")

    @classmethod
    def from_sentences(
        cls, language_id: str, sentences: Iterable[Sequence[int]], sources: Iterable[str] = ()
    ) -> "Corpus":
        sentences = [tuple(int(t) for t in s) for s in sentences]
        tags = [t for s in sentences for t in s]
        return cls(language_id, tags, [len(s) for s in sentences], tuple(sources))

    @classmethod
    def concat(cls, language_id: str, corpora: Sequence["Corpus"]) -> "Corpus":
        """Pool several treebanks of one language into a single corpus."""
        if not corpora:
            return cls(language_id, [], [])
        return cls(
            language_id,
            np.concatenate([c.tags for c in corpora]),
            np.concatenate([c.lengths for c in corpora]),
            tuple(s for c in corpora for s in c.sources),
        )

    @property
    def token_count(self) -> int:
        return int(self.tags.size)

    @property
    def sentence_count(self) -> int:
        """The number of sentences, R."""
        return int(self.lengths.size)

    @property
    def offsets(self) -> np.ndarray:
        """Start position of every sentence in `tags`."""
        return np.concatenate(([0], np.cumsum(self.lengths)[:-1])).astype(np.int64)

    @property
    def sentences(self) -> List[TagSequence]:
        ends = np.cumsum(self.lengths)
        starts = ends - self.lengths
        flat = self.tags.tolist()
        return [tuple(flat[s:e]) for s, e in zip(starts.tolist(), ends.tolist())]

    def sentence(self, index: int) -> TagSequence:
        start = int(self.lengths[:index].sum())
        return tuple(self.tags[start : start + int(self.lengths[index])].tolist())

    def select(self, indices: Sequence[int], language_id: Optional[str] = None) -> "Corpus":
        """Build a corpus from the sentences at ``indices``, in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        starts = self.offsets[indices]
        lengths = self.lengths[indices]
        if indices.size:
            positions = np.concatenate(
                [np.arange(s, s + n) for s, n in zip(starts.tolist(), lengths.tolist())]
            )
        else:
            positions = np.empty(0, dtype=np.int64)
        return Corpus(
            self.language_id if language_id is None else language_id,
            self.tags[positions],
            lengths,
            self.sources,
        )

    def without(self, indices: Sequence[int]) -> "Corpus":
        """Build a corpus of every sentence except those at ``indices``."""
        keep = np.ones(self.sentence_count, dtype=bool)
        keep[np.asarray(indices, dtype=np.int64)] = False
        return self.select(np.flatnonzero(keep))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            self.language_id == other.language_id
            and np.array_equal(self.lengths, other.lengths)
            and np.array_equal(self.tags, other.tags)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"<Corpus language_id={self.language_id!r} sentences={self.sentence_count}"
            f" tokens={self.token_count}>"
        )


def _finish_sentence(
    tags: List[int], untagged: bool, strip_final_punct: bool, source: str, line: int
) -> Optional[List[int]]:
    if untagged:
        log.warning("%s:%s: dropping a sentence with untagged tokens", source, line)
        return None
    if strip_final_punct and tags and tags[-1] == PosTag.PUNCT:
        tags = tags[:-1]
    return tags or None


def parse_conllu(
    stream: Iterable[Union[bytes, str]],
    *,
    source: str = "<stream>",
    language_id: str = "",
    strip_final_punct: bool = False,
) -> Corpus:
    """Parse CoNLL-U text into a corpus of tag sequences.

    Comment lines, multiword-token ranges (``3-4``) and empty nodes (``5.1``)
    are skipped. Sentences containing an untagged (``_``) token are dropped
    with a warning, and sentences left empty are dropped silently.

    Parameters
    ----------
    stream : Iterable[Union[bytes, str]]
        Lines of CoNLL-U text, e.g. a file opened in binary mode.
    source : str
        Name used in error messages.
    language_id : str
        Language of the resulting corpus.
    strip_final_punct : bool
        Drop a sentence-final `PosTag.PUNCT`, as in a worked example where
        the closing period is not counted.

    Returns
    -------
    Corpus

    Raises
    ------
    MalformedLine
        If a token line does not have 10 tab-separated columns.
    UnknownTag
        If a token carries a label outside the UPOS inventory.

    """
    sentences: List[List[int]] = []
    current: List[int] = []
    untagged = False
    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if lineno == 1:
            line = line.lstrip("\ufeff")
        line = line.rstrip("\r\n")
        if not line.strip():
            if current or untagged:
                tags = _finish_sentence(current, untagged, strip_final_punct, source, lineno)
                if tags:
                    sentences.append(tags)
            current, untagged = [], False
            continue
        if line.startswith("#"):
            continue
        columns = line.split("\t")
        if len(columns) != 10:
            raise MalformedLine(source, lineno, len(columns))
        token_id, upos = columns[0], columns[3]
        if "-" in token_id or "." in token_id:
            continue
        if upos == _UNTAGGED:
            untagged = True
            continue
        try:
            current.append(int(map_upos(upos)))
        except UnknownTag as e:
            raise UnknownTag(e.label, source=source, line=lineno) from None
    if current or untagged:
        tags = _finish_sentence(current, untagged, strip_final_punct, source, lineno)
        if tags:
            sentences.append(tags)

    return Corpus.from_sentences(language_id, sentences, sources=(source,))


def read_conllu_file(
    path: Path, *, language_id: str = "", strip_final_punct: bool = False, name: str = None
) -> Corpus:
    path = Path(path)
    with path.open("rb") as fs:
        corpus = parse_conllu(
            fs,
            source=name or path.name,
            language_id=language_id,
            strip_final_punct=strip_final_punct,
        )
    log.debug(
        "Read %s sentences (%s tokens) from %s", corpus.sentence_count, corpus.token_count, path
    )
    return corpus


def _language_of(path: Path) -> str:
    # UD file names start with the language code: de_gsd-ud-train.conllu
    if "_" in path.name:
        return path.name.split("_", 1)[0]
    return path.parent.name


def read_treebanks(
    data_dir: Path, *, strip_final_punct: bool = False, threads: Optional[int] = None
) -> Dict[str, Corpus]:
    """Read every ``.conllu`` file under ``data_dir``, pooled per language.

    The language of a file is the prefix of its name up to the first
    underscore (the UD naming convention); a file without an underscore takes
    the name of its directory. Treebanks of one language are concatenated in
    path order.

    Raises
    ------
    DataError
        If no treebank is found.

    """
    data_dir = Path(data_dir)
    paths = sorted(data_dir.rglob("*.conllu")) if data_dir.is_dir() else []
    if not paths:
        raise DataError(f"Found 0 treebanks (*.conllu) under {data_dir}")
    log.info("Found %s treebanks under %s", len(paths), data_dir)

    def _read(path: Path) -> Corpus:
        return read_conllu_file(
            path,
            language_id=_language_of(path),
            strip_final_punct=strip_final_punct,
            name=path.relative_to(data_dir).as_posix(),
        )

    by_language: Dict[str, List[Corpus]] = defaultdict(list)
    for corpus in thread_map(_read, paths, threads):
        by_language[corpus.language_id].append(corpus)
    return {
        language_id: Corpus.concat(language_id, parts)
        for language_id, parts in sorted(by_language.items())
    }


def filter_min_tokens(corpora: Sequence[Corpus], threshold: int = 10000) -> List[Corpus]:
    """Keep the corpora with at least ``threshold`` tokens."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    kept = []
    for corpus in corpora:
        if corpus.token_count >= threshold:
            kept.append(corpus)
        else:
            log.info(
                "Dropping %s: %s tokens is below the %s token threshold",
                corpus.language_id,
                corpus.token_count,
                threshold,
            )
    return kept


def _cache_text(corpus: Corpus) -> str:
    return "".join(" ".join(map(str, s)) + "\n" for s in corpus.sentences)


def write_cache(corpora: Mapping[str, Corpus], cache_dir: Path, **manifest_extra) -> dict:
    """Write the tag-sequence cache and its manifest.

    Each language gets ``<language_id>.tags`` with one sentence per line as
    space-separated tag indices. ``manifest.json`` records the sentence
    count R, token count and consumed files of every language.

    Returns
    -------
    dict
        The manifest that was written.

    """
    cache_dir = Path(cache_dir)
    entries = []
    for language_id, corpus in sorted(corpora.items()):
        data_manager.atomic_write_text(cache_dir / f"{language_id}{CACHE_SUFFIX}", _cache_text(corpus))
        entries.append(
            {
                "language_id": language_id,
                "sentences": corpus.sentence_count,
                "tokens": corpus.token_count,
                "files": list(corpus.sources),
            }
        )
    manifest = {"languages": entries, **manifest_extra}
    data_manager.save_json(cache_dir / MANIFEST_NAME, manifest)
    log.info("Cached %s languages in %s", len(entries), cache_dir)
    return manifest


def read_cache(cache_dir: Path, languages: Optional[Iterable[str]] = None) -> Dict[str, Corpus]:
    """Read corpora back from a tag-sequence cache.

    Parameters
    ----------
    cache_dir : pathlib.Path
        Directory written by `write_cache`.
    languages : Optional[Iterable[str]]
        Restrict to these language ids. Defaults to every cached language.

    Raises
    ------
    DataError
        If the cache or a requested language is missing.

    """
    cache_dir = Path(cache_dir)
    manifest_path = cache_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise DataError(f"No tag cache at {cache_dir}; run the ingest command first")
    manifest = data_manager.load_json(manifest_path)
    entries = {entry["language_id"]: entry for entry in manifest["languages"]}
    wanted = sorted(entries) if languages is None else list(languages)

    corpora = {}
    for language_id in wanted:
        if language_id not in entries:
            raise DataError(f"Language {language_id!r} is not in the tag cache")
        with (cache_dir / f"{language_id}{CACHE_SUFFIX}").open(encoding="utf-8") as fs:
            sentences = [tuple(int(t) for t in line.split()) for line in fs if line.strip()]
        corpora[language_id] = Corpus.from_sentences(
            language_id, sentences, sources=entries[language_id]["files"]
        )
    return corpora
