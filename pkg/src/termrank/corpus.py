"""Core corpus types and ingestion of raw and pre-annotated input.

Two input routes exist: raw text (a directory of files or a
one-document-per-line file) that still needs the preprocessing pipeline,
and an already annotated corpus in a tab-separated token-per-line format
that skips preprocessing entirely.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from termrank.errors import ConfigError, CorpusFormatError

log = logging.getLogger(__name__)


class PosTag(enum.Enum):
    """Coarse part-of-speech classes used by the linguistic filters.

    Everything outside the four filter-relevant classes collapses to OTHER.
    ``code`` is the single-character form used by pattern matching.
    """

    NOUN = "N"
    ADJ = "A"
    ADV = "R"
    VERB = "V"
    OTHER = "O"

    @property
    def code(self) -> str:
        return self.value


# Universal-dependencies style tags accepted without a warning.  PROPN acts
# as a noun (named-entity terms), AUX as a verb; the rest carry no filter
# meaning and collapse to OTHER.
_UPOS_MAP = {
    "NOUN": PosTag.NOUN,
    "PROPN": PosTag.NOUN,
    "ADJ": PosTag.ADJ,
    "ADV": PosTag.ADV,
    "VERB": PosTag.VERB,
    "AUX": PosTag.VERB,
}

KNOWN_UPOS = frozenset(_UPOS_MAP) | frozenset(
    {
        "ADP", "CCONJ", "DET", "INTJ", "NUM", "PART", "PRON",
        "PUNCT", "SCONJ", "SYM", "X", "OTHER",
    }
)


def map_upos(tag: str) -> PosTag:
    """Map a textual PoS tag to its coarse class (unknown tags -> OTHER)."""
    return _UPOS_MAP.get(tag, PosTag.OTHER)


@dataclass(frozen=True)
class Document:
    """A raw input document. ``text`` may be empty; that is never an error."""

    doc_id: str
    text: str


@dataclass(frozen=True)
class AnnotatedToken:
    surface: str
    lemma: str
    pos: PosTag
    is_stopword: bool


Sentence = tuple[AnnotatedToken, ...]


@dataclass(frozen=True)
class AnnotatedDocument:
    """A document as an ordered list of sentences of annotated tokens."""

    doc_id: str
    sentences: tuple[Sentence, ...]


@dataclass
class Diagnostics:
    """Counters for recoverable ingestion and annotation problems."""

    dropped_sentences: int = 0
    unknown_tags: int = 0
    undecodable_docs: int = 0
    errors: list[str] = field(default_factory=list)

    def record(self, message: str) -> None:
        self.errors.append(message)
        log.warning("%s", message)


def ingest_raw(
    path: str | Path,
    format: str = "dir",
    diagnostics: Diagnostics | None = None,
) -> Iterator[Document]:
    """Yield Documents from raw input in deterministic order.

    ``format`` is ``"dir"`` (every regular file under ``path`` is one
    document, doc_id = relative path, lexicographic order) or ``"lines"``
    (one document per line, doc_id = 1-based line number).  A document
    that is not valid UTF-8 is skipped and counted; the stream continues.
    """
    path = Path(path)
    if format == "dir":
        if not path.is_dir():
            raise OSError(f"not a readable directory: {path}")
        files = sorted(
            (p for p in path.rglob("*") if p.is_file()),
            key=lambda p: p.relative_to(path).as_posix(),
        )
        for fp in files:
            doc_id = fp.relative_to(path).as_posix()
            raw = fp.read_bytes()
            try:
                yield Document(doc_id, raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                if diagnostics is not None:
                    diagnostics.undecodable_docs += 1
                    diagnostics.record(f"document {doc_id!r}: invalid UTF-8 ({exc})")
                else:
                    log.warning("document %r: invalid UTF-8 (%s)", doc_id, exc)
    elif format == "lines":
        if not path.is_file():
            raise OSError(f"not a readable file: {path}")
        raw = path.read_bytes()
        lines = raw.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        for i, line in enumerate(lines, start=1):
            doc_id = str(i)
            try:
                yield Document(doc_id, line.decode("utf-8"))
            except UnicodeDecodeError as exc:
                if diagnostics is not None:
                    diagnostics.undecodable_docs += 1
                    diagnostics.record(f"document {doc_id!r}: invalid UTF-8 ({exc})")
                else:
                    log.warning("document %r: invalid UTF-8 (%s)", doc_id, exc)
    else:
        raise ConfigError(f"unknown raw format: {format!r}")


def _clean_annotated_lemma(raw: str, lineno: int) -> str:
    lemma = "".join(c if c.isalpha() else " " for c in raw.lower())
    parts = lemma.split()
    if len(parts) != 1:
        raise CorpusFormatError(
            f"line {lineno}: lemma {raw!r} does not reduce to a single word"
        )
    return parts[0]


def ingest_annotated(
    path: str | Path,
    stopwords: Iterable[str] | None = None,
    diagnostics: Diagnostics | None = None,
) -> Iterator[AnnotatedDocument]:
    """Yield AnnotatedDocuments from the tab-separated annotated format.

    Columns per token line: doc_id, sent_idx (0-based), surface, lemma,
    upos.  Blank lines are allowed and ignored; sentences are grouped by
    (doc_id, sent_idx) and documents by contiguous doc_id runs.  Lemmas
    are lowercased and must reduce to one letters-only word.  Unknown
    tags map to OTHER and bump a warning counter.

    The format does not carry stopword flags, so flags are recomputed
    here from ``stopwords`` (lemma membership); with no list given every
    flag is False.
    """
    stopset = frozenset(stopwords) if stopwords is not None else frozenset()

    cur_doc: str | None = None
    cur_sent: int | None = None
    seen_docs: set[str] = set()
    sentences: list[Sentence] = []
    tokens: list[AnnotatedToken] = []

    def finish_sentence() -> None:
        nonlocal tokens
        if tokens:
            sentences.append(tuple(tokens))
            tokens = []

    def finish_document() -> AnnotatedDocument:
        nonlocal sentences
        finish_sentence()
        doc = AnnotatedDocument(cur_doc, tuple(sentences))  # type: ignore[arg-type]
        sentences = []
        return doc

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise CorpusFormatError(
                    f"line {lineno}: expected 5 tab-separated columns, got {len(cols)}"
                )
            doc_id, sent_idx_s, surface, lemma_raw, upos = cols
            try:
                sent_idx = int(sent_idx_s)
            except ValueError:
                raise CorpusFormatError(
                    f"line {lineno}: sent_idx {sent_idx_s!r} is not an integer"
                ) from None
            if sent_idx < 0:
                raise CorpusFormatError(f"line {lineno}: negative sent_idx")
            if not surface:
                raise CorpusFormatError(f"line {lineno}: empty surface")
            lemma = _clean_annotated_lemma(lemma_raw, lineno)
            if upos not in KNOWN_UPOS and diagnostics is not None:
                diagnostics.unknown_tags += 1

            if doc_id != cur_doc:
                if doc_id in seen_docs:
                    raise CorpusFormatError(
                        f"line {lineno}: doc_id {doc_id!r} reappears after "
                        "another document (doc ids must be contiguous and unique)"
                    )
                if cur_doc is not None:
                    yield finish_document()
                seen_docs.add(doc_id)
                cur_doc = doc_id
                cur_sent = sent_idx
            elif sent_idx != cur_sent:
                finish_sentence()
                cur_sent = sent_idx

            tokens.append(
                AnnotatedToken(
                    surface=surface,
                    lemma=lemma,
                    pos=map_upos(upos),
                    is_stopword=lemma in stopset,
                )
            )

    if cur_doc is not None:
        yield finish_document()


def write_annotated(docs: Iterable[AnnotatedDocument], path: str | Path) -> None:
    """Export documents in the format consumed by ``ingest_annotated``.

    Round-trips exactly when re-ingested with the same stopword list.
    Documents with zero sentences have no representation in this format
    and are skipped.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            if "\t" in doc.doc_id or "\n" in doc.doc_id:
                raise CorpusFormatError(
                    f"doc_id {doc.doc_id!r} contains a tab or newline"
                )
            for sent_idx, sentence in enumerate(doc.sentences):
                for tok in sentence:
                    fh.write(
                        f"{doc.doc_id}\t{sent_idx}\t{tok.surface}\t"
                        f"{tok.lemma}\t{tok.pos.name}\n"
                    )
