"""Deterministic sharded execution.

Work items are dealt round-robin to a fixed number of shards by their
position in the input sequence; each shard folds a per-item work
function into a fresh copy of the identity value; the per-shard partials
are then folded again in shard-id order.  For a merge that is
commutative and associative with the identity, the result equals the
plain sequential fold in input order, no matter the shard count or pool
kind.  The pipeline keeps its merges to integer counters and min-tuples
for exactly this reason, deferring all float arithmetic until after the
merge.

Process pools require work, merge, and label to be module-level
functions and every argument picklable; the thread pool is the default
and has no such constraint.
"""

from __future__ import annotations

import copy
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

from termrank.errors import ConfigError, ShardFailure

T = TypeVar("T")
Item = TypeVar("Item")

POOL_KINDS = ("serial", "thread", "process")


@dataclass(frozen=True)
class ShardPlan:
    """How a run is split: item i goes to shard i mod n_shards."""

    n_items: int
    n_shards: int

    def shard_of(self, index: int) -> int:
        return index % self.n_shards

    def shard_indices(self, shard_id: int) -> range:
        return range(shard_id, self.n_items, self.n_shards)


def plan_shards(n_items: int, n_shards: int) -> ShardPlan:
    if n_shards < 1:
        raise ConfigError(f"shard count must be >= 1, got {n_shards}")
    return ShardPlan(n_items=n_items, n_shards=n_shards)


def _default_label(item) -> str:
    doc_id = getattr(item, "doc_id", None)
    if doc_id is not None:
        return str(doc_id)
    return repr(item)[:80]


def _fold_shard(
    shard_id: int,
    items: Sequence[Item],
    work: Callable[..., T],
    merge: Callable[[T, T], T],
    identity: T,
    work_args: tuple,
    label: Callable[[Item], str],
) -> T:
    acc = copy.deepcopy(identity)
    for item in items:
        try:
            partial = work(item, *work_args)
        except ShardFailure:
            raise
        except Exception as exc:
            raise ShardFailure(shard_id, label(item), exc) from exc
        acc = merge(acc, partial)
    return acc


def run_sharded(
    items: Sequence[Item],
    work: Callable[..., T],
    merge: Callable[[T, T], T],
    identity: T,
    n_shards: int = 1,
    pool: str = "thread",
    max_workers: int | None = None,
    work_args: tuple = (),
    label: Callable[[Item], str] = _default_label,
) -> T:
    """Fold work(item, *work_args) over all items, shard-parallel.

    merge may mutate and return its first argument; identity is never
    mutated (shards fold into deep copies).  A failure on any item
    aborts the whole run with a ShardFailure naming the shard and item.
    """
    plan = plan_shards(len(items), n_shards)
    if pool not in POOL_KINDS:
        raise ConfigError(f"unknown pool kind {pool!r}; expected one of {POOL_KINDS}")
    shards = [
        [items[i] for i in plan.shard_indices(shard_id)]
        for shard_id in range(plan.n_shards)
    ]

    if pool == "serial":
        partials = [
            _fold_shard(shard_id, shard, work, merge, identity, work_args, label)
            for shard_id, shard in enumerate(shards)
        ]
    else:
        executor_cls = ThreadPoolExecutor if pool == "thread" else ProcessPoolExecutor
        with executor_cls(max_workers=max_workers) as executor:
            futures = [
                executor.submit(
                    _fold_shard, shard_id, shard, work, merge, identity, work_args, label
                )
                for shard_id, shard in enumerate(shards)
            ]
            partials = [f.result() for f in futures]

    acc = copy.deepcopy(identity)
    for partial in partials:
        acc = merge(acc, partial)
    return acc
