"""Term scoring: length-weighted nested-corrected frequency (c_value),
its context-word blend (nc_value), and the filter-probability/IDF
product (lidf_value), plus normalization and ranking.

All floating-point work happens here, on an immutable merged
CorpusStats snapshot, iterating terms in canonical order; nothing in
this module runs under the parallel engine, which is what makes scores
reproducible to the bit across shard counts.

The context blend supports two modes.  In constituent mode a term's
context words are its own constituent lemmas, weighted by how many
top-ranked terms share them, and each contributes with the term's own
frequency.  In window mode context words are the lemmas observed around
the term's occurrences (collected during the statistics pass), each
contributing with its co-occurrence count.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from termrank.errors import ConfigError, ScoringError
from termrank.stats import CorpusStats, TermKey, TermStats, canonical_term

CONTEXT_MODES = ("constituent", "window")
DEFAULT_CONTEXT_MODE = "constituent"
DEFAULT_TOP_FRACTION = 1.0

# Empirical blend coefficients for nc_value.
C_BLEND = 0.8
CONTEXT_BLEND = 0.2

_METRIC_FIELDS = ("c_value", "nc_value", "lidf_value")


@dataclass(frozen=True)
class ContextWeights:
    """Lemma weights from the top-ranked terms; n_terms is how many
    terms were considered (the weight denominator)."""

    weights: dict[str, float]
    n_terms: int


@dataclass
class ScoredTerm:
    """A term key, its statistics, and whichever scores have been
    computed so far (None = that pass has not run)."""

    key: TermKey
    stats: TermStats
    c_value: float | None = None
    nc_value: float | None = None
    lidf_value: float | None = None
    c_value_norm: float | None = None
    nc_value_norm: float | None = None
    lidf_value_norm: float | None = None

    @property
    def term(self) -> str:
        return canonical_term(self.key)


def c_value(a: TermKey, stats: CorpusStats) -> float:
    """Length-weighted frequency with the nested-term correction.

    log2(1+|a|) * f(a) when nothing contains a; otherwise the frequency
    is reduced by the mean frequency of the containing terms.  The
    corpus-wide recount guarantees each container frequency <= f(a), so
    the result is never negative.
    """
    ts = stats.terms[a]
    weight = math.log2(1 + ts.length)
    containers = stats.containers(a)
    if not containers:
        return weight * ts.freq
    total = 0
    for b in containers:
        total += stats.terms[b].freq
    return weight * (ts.freq - total / len(containers))


def context_weights(
    candidates: Sequence[ScoredTerm], top_fraction: float = DEFAULT_TOP_FRACTION
) -> ContextWeights:
    """Weight each lemma of the top ceil(top_fraction * n) terms by the
    fraction of those terms containing it.

    Ranking is by c_value descending, ties by canonical term string
    ascending; every candidate must have c_value computed.
    """
    if not 0 < top_fraction <= 1:
        raise ConfigError(f"top fraction must be in (0, 1], got {top_fraction}")
    if not candidates:
        return ContextWeights(weights={}, n_terms=0)
    for st in candidates:
        if st.c_value is None:
            raise ScoringError(
                f"context weights need c_value for every candidate; "
                f"{st.term!r} has none"
            )
    ranked = sorted(candidates, key=lambda st: (-st.c_value, st.term))
    n_top = math.ceil(top_fraction * len(ranked))
    tally: Counter = Counter()
    for st in ranked[:n_top]:
        for lemma in set(st.key):
            tally[lemma] += 1
    weights = {lemma: tally[lemma] / n_top for lemma in sorted(tally)}
    return ContextWeights(weights=weights, n_terms=n_top)


def _context_sum(
    a: TermKey, stats: CorpusStats, weights: ContextWeights, mode: str
) -> float:
    if mode not in CONTEXT_MODES:
        raise ConfigError(
            f"unknown context mode {mode!r}; expected one of {CONTEXT_MODES}"
        )
    table = weights.weights
    if not table:
        return 0.0
    if mode == "constituent":
        total = 0.0
        for lemma in sorted(set(a)):
            w = table.get(lemma)
            if w is not None:
                total += w
        return stats.terms[a].freq * total
    ctx = stats.cooccurrence.get(a)
    if not ctx:
        return 0.0
    total = 0.0
    for lemma in sorted(ctx):
        w = table.get(lemma)
        if w is not None:
            total += ctx[lemma] * w
    return total


def nc_value(
    a: TermKey,
    stats: CorpusStats,
    weights: ContextWeights,
    mode: str = DEFAULT_CONTEXT_MODE,
) -> float:
    """0.8 * c_value + 0.2 * weighted context evidence (see module doc)."""
    return C_BLEND * c_value(a, stats) + CONTEXT_BLEND * _context_sum(
        a, stats, weights, mode
    )


def filter_probability(filter_id: int, stats: CorpusStats) -> float:
    """Share of all candidate occurrences credited to this filter."""
    total = sum(stats.filter_totals.values())
    if total <= 0:
        raise ScoringError(
            "no candidate occurrences recorded; cannot estimate filter "
            "probabilities on an empty corpus"
        )
    return stats.filter_totals.get(filter_id, 0) / total


def lidf_value(a: TermKey, stats: CorpusStats) -> float:
    """filter probability * idf * c_value."""
    ts = stats.terms[a]
    return filter_probability(ts.filter_id, stats) * ts.idf * c_value(a, stats)


def normalize_and_rank(scored: Sequence[ScoredTerm], metric: str) -> list[ScoredTerm]:
    """Set <metric>_norm = raw / corpus max (0.0 when the max is 0) and
    return the terms ranked by that normalized score descending, ties by
    canonical term string ascending."""
    if metric not in _METRIC_FIELDS:
        raise ConfigError(
            f"unknown metric field {metric!r}; expected one of {_METRIC_FIELDS}"
        )
    if not scored:
        return []
    values = []
    for st in scored:
        v = getattr(st, metric)
        if v is None:
            raise ScoringError(f"{metric} not computed for {st.term!r}")
        values.append(v)
    top = max(values)
    norm_field = metric + "_norm"
    for st, v in zip(scored, values):
        setattr(st, norm_field, (v / top) if top > 0 else 0.0)
    return sorted(scored, key=lambda st: (-getattr(st, norm_field), st.term))


def make_scored_terms(stats: CorpusStats) -> list[ScoredTerm]:
    """One unscored ScoredTerm per candidate, in canonical term order."""
    return [ScoredTerm(key=key, stats=stats.terms[key]) for key in sorted(stats.terms)]


def add_c_values(stats: CorpusStats, scored: Sequence[ScoredTerm]) -> list[ScoredTerm]:
    """Fill c_value and c_value_norm for every term; return the ranking."""
    for st in scored:
        st.c_value = c_value(st.key, stats)
    return normalize_and_rank(scored, "c_value")


def add_nc_values(
    stats: CorpusStats,
    scored: Sequence[ScoredTerm],
    mode: str = DEFAULT_CONTEXT_MODE,
    top_fraction: float = DEFAULT_TOP_FRACTION,
) -> list[ScoredTerm]:
    """Fill nc_value and nc_value_norm (c_value must already be filled);
    return the ranking.  Never adds or drops a term."""
    weights = context_weights(scored, top_fraction)
    for st in scored:
        if st.c_value is None:
            raise ScoringError(f"c_value not computed for {st.term!r}")
        st.nc_value = C_BLEND * st.c_value + CONTEXT_BLEND * _context_sum(
            st.key, stats, weights, mode
        )
    return normalize_and_rank(scored, "nc_value")


def add_lidf_values(
    stats: CorpusStats, scored: Sequence[ScoredTerm]
) -> list[ScoredTerm]:
    """Fill lidf_value and lidf_value_norm (c_value must already be
    filled); return the ranking."""
    probabilities = {
        fid: filter_probability(fid, stats) for fid in stats.filter_totals
    }
    for st in scored:
        if st.c_value is None:
            raise ScoringError(f"c_value not computed for {st.term!r}")
        st.lidf_value = (
            probabilities.get(st.stats.filter_id, 0.0) * st.stats.idf * st.c_value
        )
    return normalize_and_rank(scored, "lidf_value")
