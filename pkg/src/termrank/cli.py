"""Command-line frontend: preprocess, extract, score, top, search, bench.

Each subcommand is one pipeline stage persisting its output, so a full
run is a sequence of invocations sharing --store.  Exit codes: 0 on
success, 1 on runtime failure, 2 on configuration errors (argparse
usage errors included).
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Sequence

from termrank import __version__
from termrank.corpus import Diagnostics, ingest_raw
from termrank.engine import POOL_KINDS
from termrank.errors import ConfigError, TermrankError
from termrank.filters import LinguisticFilter, builtin_filters, load_filter_file
from termrank.pipeline import (
    METRIC_FIELDS,
    load_annotated_corpus,
    preprocess_corpus,
    extract_to_store,
    run_benchmark,
    score_store,
)
from termrank.preprocess import (
    LexiconAnnotator,
    builtin_annotator,
    load_stopwords,
)
from termrank.scoring import CONTEXT_MODES, DEFAULT_CONTEXT_MODE, DEFAULT_TOP_FRACTION
from termrank.stats import DEFAULT_WINDOW, build_nested_index
from termrank.store import JsonlStore, TermRecord, record_to_json

RAW_FORMATS = ("dir", "lines")
INPUT_FORMATS = RAW_FORMATS + ("annotated", "conllu")
SEARCH_MODES = ("exact", "substring")
BENCH_FIELDS = ("scale", "phase", "mean_seconds", "stddev_seconds", "n_runs")


def _require_exists(path: str, flag: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{flag}: no such path: {path}")
    return p


def _load_stopword_list(args):
    if args.stopwords is not None:
        _require_exists(args.stopwords, "--stopwords")
        return load_stopwords(args.stopwords)
    return load_stopwords()


def _load_annotator(args) -> LexiconAnnotator:
    if args.lexicon is not None:
        _require_exists(args.lexicon, "--lexicon")
        return builtin_annotator(args.lexicon)
    return LexiconAnnotator({})


def _load_filters(args) -> tuple[LinguisticFilter, ...]:
    filters = list(builtin_filters())
    if getattr(args, "filters", None) is not None:
        _require_exists(args.filters, "--filters")
        filters.extend(load_filter_file(args.filters, first_id=len(filters) + 1))
    return tuple(filters)


def _report_diagnostics(diag: Diagnostics) -> None:
    if diag.dropped_sentences:
        print(f"warning: dropped {diag.dropped_sentences} sentences", file=sys.stderr)
    if diag.undecodable_docs:
        print(
            f"warning: {diag.undecodable_docs} documents had undecodable bytes",
            file=sys.stderr,
        )
    for message in diag.errors:
        print(f"warning: {message}", file=sys.stderr)


def _print_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    # right-align numeric-ish columns, left-align term text
    def fmt(cells):
        out = []
        for i, cell in enumerate(cells):
            if headers[i] == "term":
                out.append(cell.ljust(widths[i]))
            else:
                out.append(cell.rjust(widths[i]))
        return "  ".join(out).rstrip()

    print(fmt(headers))
    for row in rows:
        print(fmt(row))


def _nested_flags(records: Sequence[TermRecord]) -> dict[str, bool]:
    keys = [tuple(rec.words) for rec in records]
    min_length = min((rec.length for rec in records), default=2)
    nested = build_nested_index(keys, min_length)
    return {rec.term: bool(nested.get(tuple(rec.words))) for rec in records}


def _score_table(
    selected: Sequence[TermRecord],
    all_records: Sequence[TermRecord],
    metric: str,
) -> None:
    flags = _nested_flags(all_records)
    norm_field = METRIC_FIELDS[metric] + "_norm"
    rows = []
    for rank, rec in enumerate(selected, start=1):
        norm = getattr(rec, norm_field)
        rows.append(
            (
                str(rank),
                rec.term,
                "-" if norm is None else f"{norm:.2f}",
                str(rec.freq),
                "yes" if flags[rec.term] else "no",
            )
        )
    _print_table(("rank", "term", "score", "freq", "nested"), rows)


def cmd_preprocess(args) -> int:
    _require_exists(args.input, "--input")
    stopwords = _load_stopword_list(args)
    annotator = None
    if args.format in RAW_FORMATS:
        annotator = _load_annotator(args)
    diag = Diagnostics()
    n_docs, n_sentences, n_tokens = preprocess_corpus(
        args.input, args.format, args.output, annotator, stopwords, diag
    )
    _report_diagnostics(diag)
    print(
        f"{n_docs} documents, {n_sentences} sentences, {n_tokens} tokens "
        f"-> {args.output}"
    )
    return 0


def cmd_extract(args) -> int:
    _require_exists(args.input, "--input")
    stopwords = _load_stopword_list(args)
    filters = _load_filters(args)
    diag = Diagnostics()
    docs = load_annotated_corpus(args.input, stopwords=stopwords, diagnostics=diag)
    _report_diagnostics(diag)
    stats = extract_to_store(
        docs,
        args.store,
        filters=filters,
        window=args.window,
        n_shards=args.shards,
        pool=args.pool,
        max_workers=args.workers,
    )
    if not stats.terms:
        print("warning: no candidate terms extracted", file=sys.stderr)
    print(f"{len(stats.terms)} candidate terms -> {args.store}")
    return 0


def _parse_metrics(raw: str) -> list[str]:
    metrics = [m.strip() for m in raw.split(",") if m.strip()]
    if not metrics:
        raise ConfigError("--metrics: no metrics given")
    unknown = set(metrics) - set(METRIC_FIELDS)
    if unknown:
        raise ConfigError(
            f"--metrics: unknown metrics {sorted(unknown)}; "
            f"choose from {', '.join(METRIC_FIELDS)}"
        )
    return metrics


def cmd_score(args) -> int:
    _require_exists(args.store, "--store")
    metrics = _parse_metrics(args.metrics)
    summary = score_store(
        args.store,
        metrics,
        context_mode=args.context_mode,
        top_fraction=args.top_fraction,
        window_override=args.window,
    )
    for note in summary.notices:
        print(f"notice: {note}")
    print(
        f"wrote {', '.join(summary.written)} for {summary.n_terms} terms "
        f"-> {args.store}"
    )
    return 0


def cmd_top(args) -> int:
    _require_exists(args.store, "--store")
    backend = JsonlStore(args.store)
    selected = backend.top_k(METRIC_FIELDS[args.metric], args.k)
    if args.json:
        for rec in selected:
            print(record_to_json(rec))
        return 0
    _score_table(selected, backend.read_records(), args.metric)
    return 0


def cmd_search(args) -> int:
    _require_exists(args.store, "--store")
    backend = JsonlStore(args.store)
    hits = backend.search(args.query, args.mode)
    if args.json:
        for rec in hits:
            print(record_to_json(rec))
        return 0
    if not hits:
        print(f"no matches for {args.query!r}")
        return 0
    _score_table(hits, backend.read_records(), args.metric)
    return 0


def _parse_scales(raw: str) -> list[int]:
    try:
        scales = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"--scales: {exc}") from exc
    if not scales:
        raise ConfigError("--scales: no scales given")
    return scales


def cmd_bench(args) -> int:
    _require_exists(args.input, "--input")
    stopwords = _load_stopword_list(args)
    annotator = _load_annotator(args)
    filters = _load_filters(args)
    diag = Diagnostics()
    raw_docs = list(ingest_raw(args.input, args.format, diag))
    _report_diagnostics(diag)
    result = run_benchmark(
        raw_docs,
        annotator,
        stopwords,
        scales=_parse_scales(args.scales),
        repeats=args.repeats,
        filters=filters,
        window=args.window,
        context_mode=args.context_mode,
        top_fraction=args.top_fraction,
        n_shards=args.shards,
        pool=args.pool,
        max_workers=args.workers,
    )
    if args.output is not None:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            _write_bench_csv(fh, result.rows)
        print(f"benchmark report -> {args.output}")
    else:
        _write_bench_csv(sys.stdout, result.rows)
    counts = ", ".join(
        f"scale {scale}: {n} terms" for scale, n in sorted(result.candidate_counts.items())
    )
    print(f"candidate terms per scale: {counts}", file=sys.stderr)
    if not result.candidate_sets_identical:
        raise TermrankError("candidate term sets differ across scales")
    return 0


def _write_bench_csv(fh, rows) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BENCH_FIELDS)
    for row in rows:
        writer.writerow(
            [
                row["scale"],
                row["phase"],
                f"{row['mean_seconds']:.6f}",
                f"{row['stddev_seconds']:.6f}",
                row["n_runs"],
            ]
        )


def _add_parallel_flags(parser, default_pool: str = "thread") -> None:
    parser.add_argument("--shards", type=int, default=1, help="number of work shards")
    parser.add_argument(
        "--workers", type=int, default=None, help="worker threads/processes"
    )
    parser.add_argument(
        "--pool", choices=POOL_KINDS, default=default_pool, help="execution pool kind"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="termrank",
        description="Extract and rank multi-word candidate terms from a corpus.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="annotate a raw corpus")
    p.add_argument("--input", required=True, help="corpus path")
    p.add_argument("--format", choices=INPUT_FORMATS, default="dir")
    p.add_argument("--lexicon", help="tab-separated surface/lemma/tag lexicon")
    p.add_argument("--stopwords", help="stopword list, one word per line")
    p.add_argument("--output", required=True, help="annotated corpus path")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("extract", help="extract candidate terms with statistics")
    p.add_argument("--input", required=True, help="annotated corpus path")
    p.add_argument("--store", required=True, help="term store path")
    p.add_argument("--stopwords", help="stopword list, one word per line")
    p.add_argument("--filters", help="extra tag-pattern file")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    _add_parallel_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("score", help="compute ranking metrics on a store")
    p.add_argument("--store", required=True)
    p.add_argument(
        "--metrics",
        default="cvalue",
        help="comma-separated subset of cvalue,ncvalue,lidf",
    )
    p.add_argument("--context-mode", choices=CONTEXT_MODES, default=DEFAULT_CONTEXT_MODE)
    p.add_argument("--top-fraction", type=float, default=DEFAULT_TOP_FRACTION)
    p.add_argument(
        "--window",
        type=int,
        default=None,
        help="context window override; 0 disables context, otherwise must "
        "match the extraction window",
    )
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("top", help="show the k highest-ranked terms")
    p.add_argument("--store", required=True)
    p.add_argument("--metric", choices=tuple(METRIC_FIELDS), default="cvalue")
    p.add_argument("-k", "--k", type=int, default=10, dest="k")
    p.add_argument("--json", action="store_true", help="raw record lines")
    p.set_defaults(func=cmd_top)

    p = sub.add_parser("search", help="look up stored terms")
    p.add_argument("query")
    p.add_argument("--store", required=True)
    p.add_argument("--mode", choices=SEARCH_MODES, default="substring")
    p.add_argument("--metric", choices=tuple(METRIC_FIELDS), default="cvalue")
    p.add_argument("--json", action="store_true", help="raw record lines")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("bench", help="time pipeline phases on duplicated corpora")
    p.add_argument("--input", required=True, help="raw corpus path")
    p.add_argument("--format", choices=RAW_FORMATS, default="dir")
    p.add_argument("--lexicon")
    p.add_argument("--stopwords")
    p.add_argument("--filters")
    p.add_argument("--scales", default="1,2,3,4,5")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--context-mode", choices=CONTEXT_MODES, default=DEFAULT_CONTEXT_MODE)
    p.add_argument("--top-fraction", type=float, default=DEFAULT_TOP_FRACTION)
    p.add_argument("--output", help="CSV report path (stdout when omitted)")
    _add_parallel_flags(p, default_pool="serial")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TermrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
