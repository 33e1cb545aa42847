"""Corpus-to-ranked-terms pipeline.

Extracts multi-word candidate terms from a document corpus with
part-of-speech linguistic filters and ranks them with the C-Value,
NC-Value and LIDF-Value metrics.  Execution is deterministic and
shard-parallel; results live in a line-oriented JSON term store.
"""

__version__ = "0.1.0"

from termrank.corpus import (
    AnnotatedDocument,
    AnnotatedToken,
    Document,
    PosTag,
    ingest_annotated,
    ingest_raw,
)
from termrank.filters import (
    CandidateOccurrence,
    LinguisticFilter,
    builtin_filters,
    compile_filter,
    extract_candidates,
)
from termrank.scoring import (
    c_value,
    context_weights,
    filter_probability,
    lidf_value,
    nc_value,
    normalize_and_rank,
)
from termrank.stats import CorpusStats, TermStats, build_corpus_stats

__all__ = [
    "AnnotatedDocument",
    "AnnotatedToken",
    "CandidateOccurrence",
    "CorpusStats",
    "Document",
    "LinguisticFilter",
    "PosTag",
    "TermStats",
    "build_corpus_stats",
    "builtin_filters",
    "c_value",
    "compile_filter",
    "context_weights",
    "extract_candidates",
    "filter_probability",
    "ingest_annotated",
    "ingest_raw",
    "lidf_value",
    "nc_value",
    "normalize_and_rank",
]
