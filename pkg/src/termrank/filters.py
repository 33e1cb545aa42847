"""Linguistic filters: a tag-pattern language compiled to DFAs, plus
candidate extraction over annotated sentences.

A pattern is a sequence of tag classes ``N`` (noun), ``A`` (adjective),
``R`` (adverb), ``V`` (verb), each optionally followed by ``+`` or
``*``, with parenthesized groups, e.g. ``N A+ (N A+)*``.  Whitespace
separates atoms and is otherwise ignored.  Compilation runs pattern ->
NFA -> DFA (subset construction) once, up front; matching is then a
table walk with no backtracking.  Compiled filters are immutable, safe
to share across threads, and picklable for process pools.

Matching operates on the content projection of a sentence: stopword
tokens are removed (so a candidate may bridge them in the original
text), while tokens of any other word class stay in as ``O`` and block
every match that would cross them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from termrank.corpus import AnnotatedDocument, Sentence
from termrank.errors import ConfigError, PatternError

# Alphabet of the pattern language; matching input uses the same codes.
_SYMBOLS = "NARV"
_SYMBOL_INDEX = {c: i for i, c in enumerate(_SYMBOLS)}

#: Minimum words in a candidate term; single words are never candidates.
MIN_CANDIDATE_LENGTH = 2


def _parse(spec: str):
    """Parse a pattern into a nested tuple AST.

    Nodes: ("sym", char), ("seq", [nodes]), ("plus", node),
    ("star", node).  Raises PatternError with the offset of the fault.
    """
    pos = 0
    n = len(spec)

    def parse_seq() -> tuple:
        nonlocal pos
        parts = []
        while pos < n:
            ch = spec[pos]
            if ch.isspace():
                pos += 1
                continue
            if ch == ")":
                break
            if ch in "+*":
                raise PatternError("quantifier has nothing to repeat", pos)
            if ch == "(":
                open_pos = pos
                pos += 1
                inner = parse_seq()
                if pos >= n or spec[pos] != ")":
                    raise PatternError("unclosed group", open_pos)
                if not inner[1]:
                    raise PatternError("empty group", open_pos)
                pos += 1
                node = inner
            elif ch in _SYMBOL_INDEX:
                node = ("sym", ch)
                pos += 1
            else:
                raise PatternError(f"unexpected character {ch!r}", pos)
            if pos < n and spec[pos] in "+*":
                node = ("plus" if spec[pos] == "+" else "star", node)
                pos += 1
            parts.append(node)
        return ("seq", parts)

    ast = parse_seq()
    if pos < n:
        raise PatternError("unmatched ')'", pos)
    if not ast[1]:
        raise PatternError("empty pattern", 0)
    return ast


def _build_nfa(ast):
    """Thompson construction; returns (start, accept, eps, sym).

    eps[i] lists epsilon targets of state i; sym[i] is (char, target) or
    None.  Every fragment has exactly one accept state.
    """
    eps: list[list[int]] = []
    sym: list[tuple[str, int] | None] = []

    def new_state() -> int:
        eps.append([])
        sym.append(None)
        return len(eps) - 1

    def build(node) -> tuple[int, int]:
        kind = node[0]
        if kind == "sym":
            s, t = new_state(), new_state()
            sym[s] = (node[1], t)
            return s, t
        if kind == "seq":
            start = accept = None
            for part in node[1]:
                ps, pa = build(part)
                if start is None:
                    start = ps
                else:
                    eps[accept].append(ps)
                accept = pa
            return start, accept
        if kind == "plus":
            ps, pa = build(node[1])
            eps[pa].append(ps)
            return ps, pa
        if kind == "star":
            ps, pa = build(node[1])
            s, t = new_state(), new_state()
            eps[s].extend((ps, t))
            eps[pa].extend((ps, t))
            return s, t
        raise AssertionError(f"unknown node {kind}")

    start, accept = build(ast)
    return start, accept, eps, sym


def _closure(states: Iterable[int], eps) -> frozenset[int]:
    seen = set(states)
    stack = list(seen)
    while stack:
        for t in eps[stack.pop()]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return frozenset(seen)


def _to_dfa(start: int, accept: int, eps, sym):
    """Full subset construction over the NARV alphabet.

    Returns (start, transitions, accepting, dead) where transitions is a
    dense state-by-symbol table and dead is the index of the absorbing
    reject state (-1 if unreachable).
    """
    start_set = _closure([start], eps)
    index: dict[frozenset[int], int] = {start_set: 0}
    order = [start_set]
    transitions: list[tuple[int, ...]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for ch in _SYMBOLS:
            moved = {sym[s][1] for s in cur if sym[s] is not None and sym[s][0] == ch}
            nxt = _closure(moved, eps) if moved else frozenset()
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        transitions.append(tuple(row))
        i += 1
    accepting = tuple(accept in st for st in order)
    return 0, tuple(transitions), accepting, index.get(frozenset(), -1)


@dataclass(frozen=True)
class LinguisticFilter:
    """A compiled tag pattern with its numeric identity."""

    filter_id: int
    spec: str
    start: int
    transitions: tuple[tuple[int, int, int, int], ...]
    accepting: tuple[bool, ...]
    dead: int

    def matches(self, codes: str) -> bool:
        """Whether the whole code string matches the pattern."""
        state = self.start
        for ch in codes:
            i = _SYMBOL_INDEX.get(ch)
            if i is None:
                return False
            state = self.transitions[state][i]
            if state == self.dead:
                return False
        return self.accepting[state]

    def match_spans(
        self, codes: str, min_length: int = MIN_CANDIDATE_LENGTH
    ) -> list[tuple[int, int]]:
        """All (start, end) spans of the code string matching the pattern.

        Every matching span of at least min_length symbols is reported,
        nested and overlapping ones included, in (start, end) order.
        """
        spans = []
        n = len(codes)
        table = self.transitions
        for start in range(n):
            state = self.start
            for end in range(start, n):
                i = _SYMBOL_INDEX.get(codes[end])
                if i is None:
                    break
                state = table[state][i]
                if state == self.dead:
                    break
                if self.accepting[state] and end + 1 - start >= min_length:
                    spans.append((start, end + 1))
        return spans


def compile_filter(spec: str, filter_id: int = 0) -> LinguisticFilter:
    """Compile a pattern string; PatternError pinpoints any syntax fault."""
    start, transitions, accepting, dead = _to_dfa(*_build_nfa(_parse(spec)))
    return LinguisticFilter(
        filter_id=filter_id,
        spec=spec,
        start=start,
        transitions=transitions,
        accepting=accepting,
        dead=dead,
    )


# The five built-in filters, in priority order: when two filters accept
# the same span, the candidate is credited to the lower id.
BUILTIN_SPECS: tuple[tuple[int, str], ...] = (
    (1, "N N+"),
    (2, "A+ N+"),
    (3, "N A+ (N A+)*"),
    (4, "N+ R+ N*"),
    (5, "N V+ R* A*"),
)

_BUILTINS = tuple(compile_filter(spec, fid) for fid, spec in BUILTIN_SPECS)


def builtin_filters() -> tuple[LinguisticFilter, ...]:
    """The five standard noun-phrase-centric filters, ids 1 through 5."""
    return _BUILTINS


def load_filter_file(path: str | Path, first_id: int = 6) -> tuple[LinguisticFilter, ...]:
    """Load extra patterns, one per line; ids run first_id, first_id+1, ...

    Blank lines are skipped.  A malformed pattern raises ConfigError
    naming the file and line.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"filter file not found: {p}")
    compiled = []
    next_id = first_id
    for lineno, line in enumerate(p.read_text("utf-8").splitlines(), start=1):
        spec = line.strip()
        if not spec:
            continue
        try:
            compiled.append(compile_filter(spec, next_id))
        except PatternError as err:
            raise ConfigError(f"{p}: line {lineno}: {err}") from err
        next_id += 1
    return tuple(compiled)


@dataclass(frozen=True, order=True)
class CandidateOccurrence:
    """One filter hit.  Field order defines the ordering used to pick a
    term's first occurrence (and thereby its attributed filter)."""

    doc_index: int
    sent_idx: int
    start: int
    end: int
    filter_id: int
    doc_id: str
    term: tuple[str, ...]


def content_projection(sentence: Sentence) -> tuple[tuple[str, ...], str]:
    """Drop stopword tokens; return surviving lemmas and their tag codes."""
    lemmas = []
    codes = []
    for tok in sentence:
        if tok.is_stopword:
            continue
        lemmas.append(tok.lemma)
        codes.append(tok.pos.code)
    return tuple(lemmas), "".join(codes)


def extract_candidates(
    doc: AnnotatedDocument,
    doc_index: int,
    filters: Sequence[LinguisticFilter] | None = None,
    min_length: int = MIN_CANDIDATE_LENGTH,
) -> list[CandidateOccurrence]:
    """All candidate occurrences in one document, in reading order.

    Spans are offsets into the content projection of each sentence.  A
    span accepted by several filters yields a single occurrence credited
    to the lowest filter id.
    """
    if filters is None:
        filters = builtin_filters()
    ordered = sorted(filters, key=lambda f: f.filter_id)
    occurrences = []
    for sent_idx, sentence in enumerate(doc.sentences):
        lemmas, codes = content_projection(sentence)
        if len(codes) < min_length:
            continue
        claimed: dict[tuple[int, int], int] = {}
        for filt in ordered:
            for span in filt.match_spans(codes, min_length):
                claimed.setdefault(span, filt.filter_id)
        for start, end in sorted(claimed):
            occurrences.append(
                CandidateOccurrence(
                    doc_index=doc_index,
                    sent_idx=sent_idx,
                    start=start,
                    end=end,
                    filter_id=claimed[(start, end)],
                    doc_id=doc.doc_id,
                    term=lemmas[start:end],
                )
            )
    return occurrences
