"""Text preprocessing: sentence segmentation, cleaning, tokenization,
PoS tagging and lemmatization, and stopword flagging.

Sentences are segmented before cleaning (cleaning destroys the
punctuation that marks boundaries), the tagger sees the full token
sequence including stopwords, and stopword tokens are flagged rather
than deleted; deletion happens later, at filter-matching time.  The net
effect is that filters never see stopwords, digits or special
characters, while tagging still gets full sentence context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from termrank.corpus import (
    AnnotatedDocument,
    AnnotatedToken,
    Diagnostics,
    Document,
    PosTag,
    map_upos,
)
from termrank.errors import AnnotationError, ConfigError

_SENTENCE_BREAK = re.compile(r"[.!?;\n]")

#: An annotator maps a sentence of surface tokens to (lemma, tag) pairs,
#: one pair per input token, deterministically.
Annotator = Callable[[Sequence[str]], list[tuple[str, PosTag]]]


@dataclass(frozen=True)
class StopwordList:
    words: frozenset[str]

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.words

    def __iter__(self):
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)


def load_stopwords(path: str | Path | None = None) -> StopwordList:
    """Load a stopword list (one lowercase word per line).

    With no path the bundled default English function-word list is used.
    """
    if path is None:
        text = (
            resources.files("termrank").joinpath("data/stopwords.txt").read_text("utf-8")
        )
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"stopword file not found: {p}")
        text = p.read_text("utf-8")
    words = frozenset(w.strip().lower() for w in text.splitlines() if w.strip())
    return StopwordList(words)


def segment_sentences(text: str) -> list[str]:
    """Split text into raw sentence strings on ``.!?;`` and newlines.

    Empty segments are dropped; surviving segments keep their original
    spacing (cleaning normalizes it later).
    """
    return [seg for seg in _SENTENCE_BREAK.split(text) if seg]


def clean_text(sentence: str) -> str:
    """Lowercase, replace every non-letter with a space, collapse runs.

    Idempotent: the output contains only lowercase letters and single
    spaces.  Letter-ness is the Unicode letter property, so accented and
    non-Latin letters survive.
    """
    lowered = sentence.lower()
    stripped = "".join(c if c.isalpha() else " " for c in lowered)
    return " ".join(stripped.split())


def tokenize(cleaned: str) -> list[str]:
    """Whitespace-split cleaned text; never yields empty tokens."""
    return cleaned.split()


# Suffix fallback for words missing from the lexicon.  Ordered; first hit
# wins; default is NOUN.
_SUFFIX_RULES = (
    ("ly", PosTag.ADV),
    ("ous", PosTag.ADJ),
    ("al", PosTag.ADJ),
    ("ive", PosTag.ADJ),
    ("ic", PosTag.ADJ),
    ("ing", PosTag.VERB),
    ("ed", PosTag.VERB),
    ("ize", PosTag.VERB),
    ("ise", PosTag.VERB),
)


class LexiconAnnotator:
    """Lookup-based annotator over a surface -> (lemma, tag) table.

    Unknown words keep their surface as the lemma and are tagged by
    suffix heuristics.  Deterministic and safe for concurrent read-only
    use.
    """

    def __init__(self, entries: dict[str, tuple[str, PosTag]]):
        self._entries = dict(entries)

    def __call__(self, tokens: Sequence[str]) -> list[tuple[str, PosTag]]:
        out = []
        for tok in tokens:
            hit = self._entries.get(tok)
            if hit is not None:
                out.append(hit)
            else:
                out.append((tok, _suffix_tag(tok)))
        return out


def _suffix_tag(word: str) -> PosTag:
    for suffix, tag in _SUFFIX_RULES:
        if len(word) > len(suffix) and word.endswith(suffix):
            return tag
    return PosTag.NOUN


def load_lexicon(path: str | Path) -> dict[str, tuple[str, PosTag]]:
    """Parse a lexicon file: ``surface<TAB>lemma<TAB>upos`` per line."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"lexicon file not found: {p}")
    entries: dict[str, tuple[str, PosTag]] = {}
    with open(p, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ConfigError(
                    f"{p}: line {lineno}: expected 3 tab-separated columns"
                )
            surface, lemma, upos = cols
            surface = surface.strip().lower()
            lemma = lemma.strip().lower()
            if not surface or not lemma or not lemma.isalpha():
                raise ConfigError(
                    f"{p}: line {lineno}: lemma must be a non-empty letters-only word"
                )
            entries[surface] = (lemma, map_upos(upos.strip()))
    return entries


def builtin_annotator(lexicon: str | Path) -> LexiconAnnotator:
    """Build the bundled lookup+suffix-rule annotator from a lexicon file."""
    return LexiconAnnotator(load_lexicon(lexicon))


def annotate(
    document: Document,
    annotator: Annotator,
    stopwords: StopwordList,
    diagnostics: Diagnostics | None = None,
) -> AnnotatedDocument:
    """Run the full preprocessing pipeline on one raw document.

    Per sentence: segment, clean, tokenize, tag and lemmatize the full
    token sequence, then flag stopwords by lemma membership.  A sentence
    whose annotation fails is dropped and counted; the document (and the
    corpus) always survives.  Sentences with zero tokens after cleaning
    are dropped silently.
    """
    sentences = []
    for raw_sentence in segment_sentences(document.text):
        tokens = tokenize(clean_text(raw_sentence))
        if not tokens:
            continue
        try:
            tagged = annotator(tokens)
            if len(tagged) != len(tokens):
                raise AnnotationError(
                    f"annotator returned {len(tagged)} pairs for "
                    f"{len(tokens)} tokens"
                )
        except Exception:
            if diagnostics is not None:
                diagnostics.dropped_sentences += 1
            continue
        sentences.append(
            tuple(
                AnnotatedToken(
                    surface=tok,
                    lemma=lemma,
                    pos=tag,
                    is_stopword=lemma in stopwords,
                )
                for tok, (lemma, tag) in zip(tokens, tagged)
            )
        )
    return AnnotatedDocument(document.doc_id, tuple(sentences))
