"""Line-oriented JSON term store.

One JSON object per line, UTF-8, records sorted by term, fields in a
fixed order so that identical inputs produce byte-identical files.
Score fields are absent until the corresponding scoring pass has run;
statistics fields are always present.  Reals rely on Python's shortest
round-trip float formatting, so parse-and-rewrite preserves every
untouched byte.

Writes go through a temp file and an atomic rename under an exclusive
lock file; readers never lock.  A statistics sidecar
(``<store>.stats.json``) carries the corpus-level numbers that are not
per-term (document count, window, per-filter occurrence totals, and
context co-occurrence counts) so scoring can rerun from the store alone.

The JsonlStore class implements the swappable StoreBackend contract;
the module-level functions are path-first conveniences over it.
"""

from __future__ import annotations

import json
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from termrank.errors import ConfigError, StoreError, StoreLockedError

FIELD_ORDER = (
    "term",
    "words",
    "filter",
    "length",
    "freq",
    "doc_freq",
    "idf",
    "c_value",
    "nc_value",
    "lidf_value",
    "c_value_norm",
    "nc_value_norm",
    "lidf_value_norm",
    "meta",
)

META_FIELDS = ("n_docs", "context_mode", "window", "top_fraction", "pipeline_version")

#: Metric field -> its CLI spelling, for actionable error messages.
METRIC_CLI_NAMES = {"c_value": "cvalue", "nc_value": "ncvalue", "lidf_value": "lidf"}

_SCORE_FIELDS = (
    "c_value",
    "nc_value",
    "lidf_value",
    "c_value_norm",
    "nc_value_norm",
    "lidf_value_norm",
)

_REQUIRED_FIELDS = ("term", "words", "filter", "length", "freq", "doc_freq", "idf", "meta")


@dataclass
class TermRecord:
    """The persisted per-term document."""

    term: str
    words: list[str]
    filter: int
    length: int
    freq: int
    doc_freq: int
    idf: float
    meta: dict = field(default_factory=dict)
    c_value: float | None = None
    nc_value: float | None = None
    lidf_value: float | None = None
    c_value_norm: float | None = None
    nc_value_norm: float | None = None
    lidf_value_norm: float | None = None


def _record_to_obj(rec: TermRecord) -> dict:
    obj = {}
    for name in FIELD_ORDER:
        if name == "meta":
            meta = rec.meta or {}
            obj["meta"] = {key: meta.get(key) for key in META_FIELDS}
        else:
            value = getattr(rec, name)
            if name in _SCORE_FIELDS and value is None:
                continue
            obj[name] = value
    return obj


def _record_from_obj(obj: dict, where: str) -> TermRecord:
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise StoreError(f"{where}: missing field {name!r}")
    try:
        rec = TermRecord(
            term=str(obj["term"]),
            words=[str(w) for w in obj["words"]],
            filter=int(obj["filter"]),
            length=int(obj["length"]),
            freq=int(obj["freq"]),
            doc_freq=int(obj["doc_freq"]),
            idf=float(obj["idf"]),
            meta=dict(obj["meta"]),
        )
        for name in _SCORE_FIELDS:
            value = obj.get(name)
            if value is not None:
                setattr(rec, name, float(value))
    except (TypeError, ValueError) as exc:
        raise StoreError(f"{where}: malformed record ({exc})") from exc
    return rec


def _validate_for_write(records: Sequence[TermRecord]) -> None:
    seen = set()
    for rec in records:
        if rec.term in seen:
            raise StoreError(f"duplicate term {rec.term!r}")
        seen.add(rec.term)
        if rec.term != " ".join(rec.words):
            raise StoreError(
                f"term {rec.term!r} does not equal its words joined by spaces"
            )
        if rec.length != len(rec.words):
            raise StoreError(
                f"term {rec.term!r}: length {rec.length} != {len(rec.words)} words"
            )


class _StoreLock:
    """Exclusive advisory lock: O_CREAT|O_EXCL on ``<store>.lock``."""

    def __init__(self, store_path: Path):
        self.lock_path = Path(str(store_path) + ".lock")
        self._fd: int | None = None

    def __enter__(self) -> "_StoreLock":
        try:
            self._fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLockedError(
                f"store is locked by another writer (remove stale {self.lock_path} "
                f"if no writer is running)"
            ) from None
        return self

    def __exit__(self, *exc_info) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
        try:
            os.unlink(self.lock_path)
        except FileNotFoundError:
            pass


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def record_to_json(record: TermRecord) -> str:
    """Single-line serialization, exactly as stored on disk."""
    return _dumps(_record_to_obj(record))


class StoreBackend(ABC):
    """Contract for term-record persistence; update operations touch
    only the named fields, get-after-put round-trips exactly."""

    @abstractmethod
    def write_records(self, records: Sequence[TermRecord]) -> None: ...

    @abstractmethod
    def read_records(self) -> list[TermRecord]: ...

    @abstractmethod
    def update_scores(self, metric: str, values: dict) -> None: ...

    @abstractmethod
    def update_meta(self, updates: dict) -> None: ...

    @abstractmethod
    def get(self, term: str) -> TermRecord | None: ...

    @abstractmethod
    def top_k(self, metric: str, k: int) -> list[TermRecord]: ...

    @abstractmethod
    def search(self, query: str, mode: str = "substring") -> list[TermRecord]: ...


class JsonlStore(StoreBackend):
    def __init__(self, path: str | Path):
        self.path = Path(path)

    @property
    def sidecar_path(self) -> Path:
        return Path(str(self.path) + ".stats.json")

    def write_records(self, records: Sequence[TermRecord]) -> None:
        _validate_for_write(records)
        ordered = sorted(records, key=lambda r: r.term)
        lines = [_dumps(_record_to_obj(rec)) for rec in ordered]
        text = "".join(line + "\n" for line in lines)
        with _StoreLock(self.path):
            _atomic_write_text(self.path, text)

    def read_records(self) -> list[TermRecord]:
        if not self.path.is_file():
            raise StoreError(f"store not found: {self.path}")
        records = []
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                where = f"{self.path}: line {lineno}"
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StoreError(f"{where}: invalid JSON ({exc})") from exc
                records.append(_record_from_obj(obj, where))
        return records

    def update_scores(self, metric: str, values: dict) -> None:
        """values maps canonical term -> (raw, normalized); only the
        metric's two fields change on the named records."""
        if metric not in METRIC_CLI_NAMES:
            raise ConfigError(
                f"unknown metric field {metric!r}; "
                f"expected one of {tuple(METRIC_CLI_NAMES)}"
            )
        with _StoreLock(self.path):
            records = self.read_records()
            by_term = {rec.term: rec for rec in records}
            for term in values:
                if term not in by_term:
                    raise StoreError(f"unknown term {term!r}; not in {self.path}")
            norm_field = metric + "_norm"
            for term, (raw, norm) in values.items():
                rec = by_term[term]
                setattr(rec, metric, float(raw))
                setattr(rec, norm_field, float(norm))
            self._rewrite(records)

    def update_meta(self, updates: dict) -> None:
        """Set meta subfields on every record."""
        bad = set(updates) - set(META_FIELDS)
        if bad:
            raise ConfigError(f"unknown meta fields: {sorted(bad)}")
        with _StoreLock(self.path):
            records = self.read_records()
            for rec in records:
                rec.meta.update(updates)
            self._rewrite(records)

    def _rewrite(self, records: Sequence[TermRecord]) -> None:
        # Caller holds the lock; records came from read_records (sorted).
        lines = [_dumps(_record_to_obj(rec)) for rec in sorted(records, key=lambda r: r.term)]
        _atomic_write_text(self.path, "".join(line + "\n" for line in lines))

    def get(self, term: str) -> TermRecord | None:
        for rec in self.read_records():
            if rec.term == term:
                return rec
        return None

    def top_k(self, metric: str, k: int) -> list[TermRecord]:
        if metric not in METRIC_CLI_NAMES:
            raise ConfigError(
                f"unknown metric field {metric!r}; "
                f"expected one of {tuple(METRIC_CLI_NAMES)}"
            )
        if k < 0:
            raise ConfigError(f"k must be >= 0, got {k}")
        records = self.read_records()
        norm_field = metric + "_norm"
        for rec in records:
            if getattr(rec, norm_field) is None:
                raise StoreError(
                    f"{metric} not computed for {rec.term!r}; run scoring with "
                    f"--metrics {METRIC_CLI_NAMES[metric]} first"
                )
        ranked = sorted(records, key=lambda r: (-getattr(r, norm_field), r.term))
        return ranked[:k]

    def search(self, query: str, mode: str = "substring") -> list[TermRecord]:
        if mode not in ("exact", "substring"):
            raise ConfigError(f"unknown search mode {mode!r}")
        records = self.read_records()
        if mode == "exact":
            return [rec for rec in records if rec.term == query][:1]
        return sorted(
            (rec for rec in records if query in rec.term), key=lambda r: r.term
        )

    def write_sidecar(self, data: dict) -> None:
        _atomic_write_text(self.sidecar_path, _dumps(data) + "\n")

    def read_sidecar(self) -> dict:
        if not self.sidecar_path.is_file():
            raise StoreError(f"statistics sidecar not found: {self.sidecar_path}")
        try:
            return json.loads(self.sidecar_path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreError(f"{self.sidecar_path}: invalid JSON ({exc})") from exc


def write_records(records: Sequence[TermRecord], path: str | Path) -> None:
    JsonlStore(path).write_records(records)


def read_records(path: str | Path) -> list[TermRecord]:
    return JsonlStore(path).read_records()


def update_scores(path: str | Path, metric: str, values: dict) -> None:
    JsonlStore(path).update_scores(metric, values)


def update_meta(path: str | Path, updates: dict) -> None:
    JsonlStore(path).update_meta(updates)


def top_k(path: str | Path, metric: str, k: int) -> list[TermRecord]:
    return JsonlStore(path).top_k(metric, k)


def search(path: str | Path, query: str, mode: str = "substring") -> list[TermRecord]:
    return JsonlStore(path).search(query, mode)


def write_stats_sidecar(path: str | Path, data: dict) -> None:
    JsonlStore(path).write_sidecar(data)


def read_stats_sidecar(path: str | Path) -> dict:
    return JsonlStore(path).read_sidecar()
