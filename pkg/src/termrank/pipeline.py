"""End-to-end composition: raw text to annotated corpus, annotated
corpus to a statistics-bearing term store, store to scored store, plus
the corpus-duplication benchmark driver.

Each stage persists its output (annotated file, then store records and
the statistics sidecar), so stages can run as separate commands and be
timed independently.  Scoring always runs in the fixed order c_value,
nc_value, lidf_value; the later two depend on the first and auto-enable
it (with a notice) when the store lacks it.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean, stdev
from typing import Callable, Iterable, Sequence

from termrank import __version__
from termrank.corpus import (
    AnnotatedDocument,
    Diagnostics,
    Document,
    ingest_annotated,
    ingest_raw,
    write_annotated,
)
from termrank.errors import ConfigError, StoreError
from termrank.filters import MIN_CANDIDATE_LENGTH, LinguisticFilter
from termrank.preprocess import Annotator, StopwordList, annotate
from termrank.scoring import (
    DEFAULT_CONTEXT_MODE,
    DEFAULT_TOP_FRACTION,
    add_c_values,
    add_lidf_values,
    add_nc_values,
    make_scored_terms,
)
from termrank.stats import (
    DEFAULT_WINDOW,
    CorpusStats,
    TermKey,
    TermStats,
    build_corpus_stats,
    build_nested_index,
    canonical_term,
)
from termrank.store import JsonlStore, TermRecord

PIPELINE_VERSION = __version__

#: CLI metric spelling -> record field name, in mandated scoring order.
METRIC_FIELDS = {"cvalue": "c_value", "ncvalue": "nc_value", "lidf": "lidf_value"}

BENCH_PHASES = ("preprocessing", "cvalue", "ncvalue", "lidf")


def annotate_corpus(
    docs: Iterable[Document],
    annotator: Annotator,
    stopwords: StopwordList,
    diagnostics: Diagnostics | None = None,
) -> list[AnnotatedDocument]:
    return [annotate(doc, annotator, stopwords, diagnostics) for doc in docs]


def preprocess_corpus(
    input_path: str | Path,
    fmt: str,
    output_path: str | Path,
    annotator: Annotator | None,
    stopwords: StopwordList,
    diagnostics: Diagnostics | None = None,
) -> tuple[int, int, int]:
    """Raw (or already annotated) input -> canonical annotated file.

    Returns (documents, sentences, tokens) counts of the export.
    """
    if fmt in ("annotated", "conllu"):
        docs = list(
            ingest_annotated(input_path, stopwords=stopwords, diagnostics=diagnostics)
        )
    else:
        if annotator is None:
            raise ConfigError(f"an annotator is required for raw format {fmt!r}")
        raw = list(ingest_raw(input_path, fmt, diagnostics))
        docs = annotate_corpus(raw, annotator, stopwords, diagnostics)
    write_annotated(docs, output_path)
    n_sentences = sum(len(d.sentences) for d in docs)
    n_tokens = sum(len(s) for d in docs for s in d.sentences)
    return len(docs), n_sentences, n_tokens


def load_annotated_corpus(
    path: str | Path,
    stopwords: StopwordList | None = None,
    diagnostics: Diagnostics | None = None,
) -> list[AnnotatedDocument]:
    return list(ingest_annotated(path, stopwords=stopwords, diagnostics=diagnostics))


def _base_meta(stats: CorpusStats) -> dict:
    return {
        "n_docs": stats.n_docs,
        "context_mode": None,
        "window": stats.window,
        "top_fraction": None,
        "pipeline_version": PIPELINE_VERSION,
    }


def stats_to_sidecar(stats: CorpusStats) -> dict:
    return {
        "n_docs": stats.n_docs,
        "window": stats.window,
        "filter_totals": {str(fid): n for fid, n in stats.filter_totals.items()},
        "cooccurrence": {
            canonical_term(key): dict(ctx) for key, ctx in stats.cooccurrence.items()
        },
    }


def extract_to_store(
    docs: Sequence[AnnotatedDocument],
    store_path: str | Path,
    filters: Sequence[LinguisticFilter] | None = None,
    window: int = DEFAULT_WINDOW,
    min_length: int = MIN_CANDIDATE_LENGTH,
    n_shards: int = 1,
    pool: str = "thread",
    max_workers: int | None = None,
) -> CorpusStats:
    """Build corpus statistics and persist them as an unscored store."""
    stats = build_corpus_stats(
        docs,
        filters=filters,
        window=window,
        min_length=min_length,
        n_shards=n_shards,
        pool=pool,
        max_workers=max_workers,
    )
    meta = _base_meta(stats)
    records = [
        TermRecord(
            term=canonical_term(key),
            words=list(key),
            filter=ts.filter_id,
            length=ts.length,
            freq=ts.freq,
            doc_freq=ts.doc_freq,
            idf=ts.idf,
            meta=dict(meta),
        )
        for key, ts in stats.terms.items()
    ]
    backend = JsonlStore(store_path)
    backend.write_records(records)
    backend.write_sidecar(stats_to_sidecar(stats))
    return stats


def stats_from_store(
    store_path: str | Path,
) -> tuple[CorpusStats, list[TermRecord]]:
    """Rebuild a CorpusStats snapshot from records plus sidecar.

    The nested index is recomputed from the term keys; everything else
    is read back verbatim.
    """
    backend = JsonlStore(store_path)
    records = backend.read_records()
    sidecar = backend.read_sidecar()
    try:
        n_docs = int(sidecar["n_docs"])
        window = int(sidecar["window"])
        filter_totals = {
            int(fid): int(n) for fid, n in sidecar["filter_totals"].items()
        }
        cooccurrence = {
            tuple(term.split(" ")): {str(l): int(n) for l, n in ctx.items()}
            for term, ctx in sidecar["cooccurrence"].items()
        }
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise StoreError(
            f"{backend.sidecar_path}: malformed statistics sidecar ({exc})"
        ) from exc
    terms: dict[TermKey, TermStats] = {}
    for rec in records:
        terms[tuple(rec.words)] = TermStats(
            freq=rec.freq,
            doc_freq=rec.doc_freq,
            length=rec.length,
            filter_id=rec.filter,
            idf=rec.idf,
        )
    min_length = min((ts.length for ts in terms.values()), default=MIN_CANDIDATE_LENGTH)
    stats = CorpusStats(
        n_docs=n_docs,
        window=window,
        min_length=min_length,
        terms=terms,
        filter_totals={fid: filter_totals[fid] for fid in sorted(filter_totals)},
        nested=build_nested_index(terms, min_length),
        cooccurrence={key: cooccurrence[key] for key in sorted(cooccurrence)},
    )
    return stats, records


@dataclass
class ScoreSummary:
    n_terms: int
    written: list[str] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)


def score_store(
    store_path: str | Path,
    metrics: Sequence[str] = ("cvalue",),
    context_mode: str = DEFAULT_CONTEXT_MODE,
    top_fraction: float = DEFAULT_TOP_FRACTION,
    window_override: int | None = None,
) -> ScoreSummary:
    """Compute the requested metrics from a statistics-bearing store and
    write them back, always in the order cvalue, ncvalue, lidf.

    window_override applies to window-mode context only: 0 disables
    context co-occurrence outright; any other value must equal the
    window the store was extracted with (the counts cannot be redone
    without the corpus).
    """
    requested = set(metrics)
    unknown = requested - set(METRIC_FIELDS)
    if unknown:
        raise ConfigError(
            f"unknown metrics {sorted(unknown)}; expected a subset of "
            f"{tuple(METRIC_FIELDS)}"
        )
    if not requested:
        raise ConfigError("no metrics requested")

    stats, records = stats_from_store(store_path)
    if window_override is not None and window_override != stats.window:
        if window_override == 0:
            stats.window = 0
            stats.cooccurrence = {}
        else:
            raise ConfigError(
                f"window {window_override} differs from the stored window "
                f"{stats.window}; re-run extraction to change it"
            )

    summary = ScoreSummary(n_terms=len(records))
    write_c = "cvalue" in requested
    if requested & {"ncvalue", "lidf"} and not write_c:
        if any(rec.c_value is None for rec in records):
            write_c = True
            summary.notices.append(
                "cvalue auto-enabled: ncvalue/lidf are built on it and the "
                "store has no c_value yet"
            )

    scored = make_scored_terms(stats)
    add_c_values(stats, scored)
    backend = JsonlStore(store_path)
    if write_c:
        backend.update_scores(
            "c_value", {st.term: (st.c_value, st.c_value_norm) for st in scored}
        )
        summary.written.append("cvalue")

    meta_updates: dict = {}
    if "ncvalue" in requested:
        add_nc_values(stats, scored, mode=context_mode, top_fraction=top_fraction)
        backend.update_scores(
            "nc_value", {st.term: (st.nc_value, st.nc_value_norm) for st in scored}
        )
        summary.written.append("ncvalue")
        meta_updates["context_mode"] = context_mode
        meta_updates["top_fraction"] = top_fraction
        if window_override is not None:
            meta_updates["window"] = stats.window
    if "lidf" in requested:
        add_lidf_values(stats, scored)
        backend.update_scores(
            "lidf_value", {st.term: (st.lidf_value, st.lidf_value_norm) for st in scored}
        )
        summary.written.append("lidf")
    if meta_updates:
        backend.update_meta(meta_updates)
    return summary


def duplicate_corpus(docs: Sequence, k: int) -> list:
    """k-fold corpus duplication; copy i > 0 gets doc_id '<id>#copy_<i>'.

    Works for raw and annotated documents alike.  Duplication multiplies
    every frequency and document count by exactly k while leaving the
    candidate term set unchanged.
    """
    if k < 1:
        raise ConfigError(f"duplication factor must be >= 1, got {k}")
    out = list(docs)
    for i in range(1, k):
        for doc in docs:
            out.append(dataclasses.replace(doc, doc_id=f"{doc.doc_id}#copy_{i}"))
    return out


@dataclass
class BenchResult:
    rows: list[dict]
    candidate_counts: dict[int, int]
    candidate_sets_identical: bool


def run_benchmark(
    raw_docs: Sequence[Document],
    annotator: Annotator,
    stopwords: StopwordList,
    scales: Sequence[int],
    repeats: int,
    filters: Sequence[LinguisticFilter] | None = None,
    window: int = DEFAULT_WINDOW,
    context_mode: str = DEFAULT_CONTEXT_MODE,
    top_fraction: float = DEFAULT_TOP_FRACTION,
    n_shards: int = 1,
    pool: str = "serial",
    max_workers: int | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> BenchResult:
    """Time the four pipeline phases per duplication scale.

    Corpus materialization is excluded from the timings; candidate key
    sets are compared across scales (duplication must not change them).
    """
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    for scale in scales:
        if scale < 1:
            raise ConfigError(f"scales must be >= 1, got {scale}")
    if not scales:
        raise ConfigError("no scales given")

    rows = []
    key_sets: dict[int, frozenset[TermKey]] = {}
    counts: dict[int, int] = {}
    for scale in scales:
        scaled = duplicate_corpus(raw_docs, scale)
        timings: dict[str, list[float]] = {phase: [] for phase in BENCH_PHASES}
        for _run in range(repeats):
            t0 = clock()
            annotated = annotate_corpus(scaled, annotator, stopwords)
            timings["preprocessing"].append(clock() - t0)

            t0 = clock()
            stats = build_corpus_stats(
                annotated,
                filters=filters,
                window=window,
                n_shards=n_shards,
                pool=pool,
                max_workers=max_workers,
            )
            scored = make_scored_terms(stats)
            add_c_values(stats, scored)
            timings["cvalue"].append(clock() - t0)

            t0 = clock()
            add_nc_values(stats, scored, mode=context_mode, top_fraction=top_fraction)
            timings["ncvalue"].append(clock() - t0)

            t0 = clock()
            add_lidf_values(stats, scored)
            timings["lidf"].append(clock() - t0)

            key_sets.setdefault(scale, frozenset(stats.terms))
            counts.setdefault(scale, len(stats.terms))
        for phase in BENCH_PHASES:
            samples = timings[phase]
            rows.append(
                {
                    "scale": scale,
                    "phase": phase,
                    "mean_seconds": fmean(samples),
                    "stddev_seconds": stdev(samples) if len(samples) > 1 else 0.0,
                    "n_runs": repeats,
                }
            )
    distinct = {key_sets[scale] for scale in key_sets}
    return BenchResult(
        rows=rows,
        candidate_counts=counts,
        candidate_sets_identical=len(distinct) == 1,
    )
