"""Corpus-level statistics behind the scoring formulas.

Two passes over the corpus, both sharded through the execution engine:

Pass 1 finds the candidate set.  Every filter hit is counted into
per-filter occurrence totals, and each term remembers its earliest
occurrence (document order, then sentence, then span, then filter id);
that first occurrence fixes the term's attributed filter.

Pass 2 recounts every candidate as a bare lemma run: each offset in
each content projection where the run appears counts, whether or not a
filter matched there.  This makes f(a) >= f(b) whenever candidate b
contains candidate a, which keeps the nested-term correction of the
length-weighted score non-negative.  The same scan collects document
frequencies and, within a window of W projection tokens on either side
of each occurrence (sentence-bounded, outside the span itself),
context-word co-occurrence counts.

Both passes merge only integers and min-tuples, so the merged corpus
statistics are identical for every shard count and pool kind.  The
nested-term index and the inverse document frequencies are derived
serially from the merged snapshot, and the final structures are built
in sorted term order so downstream iteration is canonical.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from termrank.corpus import AnnotatedDocument
from termrank.engine import run_sharded
from termrank.errors import ConfigError
from termrank.filters import (
    MIN_CANDIDATE_LENGTH,
    LinguisticFilter,
    builtin_filters,
    content_projection,
    extract_candidates,
)

TermKey = tuple[str, ...]

DEFAULT_WINDOW = 5


def canonical_term(key: TermKey) -> str:
    """Space-joined lemma string; splitting on spaces round-trips."""
    return " ".join(key)


@dataclass
class TermStats:
    """Per-term integers plus the derived inverse document frequency."""

    freq: int
    doc_freq: int
    length: int
    filter_id: int
    idf: float = 0.0


@dataclass
class CorpusStats:
    """Everything scoring needs; all parallel-merged values are integers."""

    n_docs: int
    window: int
    min_length: int
    terms: dict[TermKey, TermStats]
    filter_totals: dict[int, int]
    nested: dict[TermKey, tuple[TermKey, ...]]
    cooccurrence: dict[TermKey, dict[str, int]]

    def containers(self, key: TermKey) -> tuple[TermKey, ...]:
        """The candidate terms properly containing key (its T_a)."""
        return self.nested.get(key, ())


@dataclass
class Pass1Partial:
    first_seen: dict[TermKey, tuple[int, int, int, int, int]] = field(
        default_factory=dict
    )
    filter_counts: Counter = field(default_factory=Counter)


def _doc_label(pair: tuple[int, AnnotatedDocument]) -> str:
    return pair[1].doc_id


def _pass1_doc(
    pair: tuple[int, AnnotatedDocument],
    filters: tuple[LinguisticFilter, ...],
    min_length: int,
) -> Pass1Partial:
    doc_index, doc = pair
    partial = Pass1Partial()
    first_seen = partial.first_seen
    for occ in extract_candidates(doc, doc_index, filters, min_length):
        mark = (occ.doc_index, occ.sent_idx, occ.start, occ.end, occ.filter_id)
        prev = first_seen.get(occ.term)
        if prev is None or mark < prev:
            first_seen[occ.term] = mark
        partial.filter_counts[occ.filter_id] += 1
    return partial


def _pass1_merge(a: Pass1Partial, b: Pass1Partial) -> Pass1Partial:
    for key, mark in b.first_seen.items():
        prev = a.first_seen.get(key)
        if prev is None or mark < prev:
            a.first_seen[key] = mark
    a.filter_counts.update(b.filter_counts)
    return a


@dataclass
class Pass2Partial:
    freq: Counter = field(default_factory=Counter)
    doc_freq: Counter = field(default_factory=Counter)
    cooccurrence: dict[TermKey, Counter] = field(default_factory=dict)


def _pass2_doc(
    pair: tuple[int, AnnotatedDocument],
    candidates: frozenset[TermKey],
    lengths: tuple[int, ...],
    window: int,
) -> Pass2Partial:
    partial = Pass2Partial()
    _doc_index, doc = pair
    seen: set[TermKey] = set()
    for sentence in doc.sentences:
        lemmas, _codes = content_projection(sentence)
        n = len(lemmas)
        for start in range(n):
            for length in lengths:
                end = start + length
                if end > n:
                    break
                key = lemmas[start:end]
                if key not in candidates:
                    continue
                partial.freq[key] += 1
                seen.add(key)
                lo = max(0, start - window)
                hi = min(n, end + window)
                if lo == start and hi == end:
                    continue
                ctx = partial.cooccurrence.setdefault(key, Counter())
                for j in range(lo, start):
                    ctx[lemmas[j]] += 1
                for j in range(end, hi):
                    ctx[lemmas[j]] += 1
    for key in seen:
        partial.doc_freq[key] += 1
    return partial


def _pass2_merge(a: Pass2Partial, b: Pass2Partial) -> Pass2Partial:
    a.freq.update(b.freq)
    a.doc_freq.update(b.doc_freq)
    for key, ctx in b.cooccurrence.items():
        mine = a.cooccurrence.get(key)
        if mine is None:
            a.cooccurrence[key] = ctx
        else:
            mine.update(ctx)
    return a


def compute_idf(n_docs: int, doc_freq: int) -> float:
    """Natural-log inverse document frequency, ln(N / n(a)).

    doc_freq of zero is an internal invariant violation: a term exists
    only because it occurred somewhere.
    """
    if doc_freq < 1:
        raise ValueError(f"doc_freq must be >= 1, got {doc_freq}")
    if n_docs < doc_freq:
        raise ValueError(f"doc_freq {doc_freq} exceeds corpus size {n_docs}")
    return math.log(n_docs / doc_freq)


def build_nested_index(
    keys: Iterable[TermKey], min_length: int = MIN_CANDIDATE_LENGTH
) -> dict[TermKey, tuple[TermKey, ...]]:
    """Map each term to the candidate terms that properly contain it.

    Containment is strict contiguous-subsequence containment of lemma
    runs; a container is listed once however many times the shorter run
    repeats inside it.  Terms with no containers are absent.  Enumerating
    the sub-slices of each candidate keeps this near-linear in practice
    instead of quadratic in the candidate count.
    """
    keyset = set(keys)
    containers: dict[TermKey, set[TermKey]] = {}
    for outer in keyset:
        size = len(outer)
        for sub_len in range(min_length, size):
            for i in range(size - sub_len + 1):
                sub = outer[i : i + sub_len]
                if sub in keyset:
                    containers.setdefault(sub, set()).add(outer)
    return {key: tuple(sorted(found)) for key, found in sorted(containers.items())}


def build_corpus_stats(
    docs: Sequence[AnnotatedDocument],
    filters: Sequence[LinguisticFilter] | None = None,
    window: int = DEFAULT_WINDOW,
    min_length: int = MIN_CANDIDATE_LENGTH,
    n_shards: int = 1,
    pool: str = "thread",
    max_workers: int | None = None,
) -> CorpusStats:
    """Run both passes and assemble canonical corpus statistics.

    The result is independent of n_shards, pool kind, and worker count:
    identical terms, counts, and iteration order every time.
    """
    if window < 0:
        raise ConfigError(f"window must be >= 0, got {window}")
    if min_length < 1:
        raise ConfigError(f"minimum candidate length must be >= 1, got {min_length}")
    if filters is None:
        filters = builtin_filters()
    filters = tuple(filters)

    items = list(enumerate(docs))
    pass1 = run_sharded(
        items,
        _pass1_doc,
        _pass1_merge,
        Pass1Partial(),
        n_shards=n_shards,
        pool=pool,
        max_workers=max_workers,
        work_args=(filters, min_length),
        label=_doc_label,
    )
    candidates = frozenset(pass1.first_seen)
    lengths = tuple(sorted({len(key) for key in candidates}))
    pass2 = run_sharded(
        items,
        _pass2_doc,
        _pass2_merge,
        Pass2Partial(),
        n_shards=n_shards,
        pool=pool,
        max_workers=max_workers,
        work_args=(candidates, lengths, window),
        label=_doc_label,
    )

    n_docs = len(docs)
    terms = {}
    cooccurrence = {}
    for key in sorted(candidates):
        doc_freq = pass2.doc_freq[key]
        terms[key] = TermStats(
            freq=pass2.freq[key],
            doc_freq=doc_freq,
            length=len(key),
            filter_id=pass1.first_seen[key][4],
            idf=compute_idf(n_docs, doc_freq),
        )
        ctx = pass2.cooccurrence.get(key)
        if ctx:
            cooccurrence[key] = {lemma: ctx[lemma] for lemma in sorted(ctx)}
    return CorpusStats(
        n_docs=n_docs,
        window=window,
        min_length=min_length,
        terms=terms,
        filter_totals={fid: pass1.filter_counts[fid] for fid in sorted(pass1.filter_counts)},
        nested=build_nested_index(candidates, min_length),
        cooccurrence=cooccurrence,
    )
