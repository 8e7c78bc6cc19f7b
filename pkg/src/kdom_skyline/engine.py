"""Event pipeline: evict, departure pass, arrival pass, calculate, insert."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .baseline import CIScheme, NaiveScheme
from .core import (
    ConfigError,
    NormalizationSpec,
    ScanRecord,
    Scheme,
    SlidingWindow,
    UncertainItem,
    UsageError,
    WindowEntry,
    ksky_probability,
    make_entry,
)
from .indexing_ai import AIScheme
from .indexing_mi import MIScheme

SCHEMES = ("naive", "ci", "mi", "ai")
STATS_HEADER = ("event_id", "scheme", "window_size", "compared", "pruned", "wall_nanos")


@dataclass(frozen=True)
class StreamEvent:
    item: UncertainItem
    kind: str = "arrival"


@dataclass
class EventStats:
    event_id: int
    scheme: str
    window_size: int
    compared_count: int
    pruned_count: int
    wall_nanos: int
    passes: int = 2

    def row(self) -> tuple:
        return (self.event_id, self.scheme, self.window_size, self.compared_count,
                self.pruned_count, self.wall_nanos)


@dataclass
class EngineConfig:
    d: int
    k: int
    window_capacity: int
    scheme: str = "mi"
    u_min_pos: int | None = None
    tau: float = 0.0
    normalization: NormalizationSpec | None = None
    update_limit: int = 10_000
    underflow_floor: float = 1e-300
    seed: int | None = None
    ai_single_pair: bool = False
    ci_eps: float = 1e-6

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if not 1 <= self.k <= self.d:
            raise ConfigError(f"k={self.k} must satisfy 1 <= k <= d={self.d}")
        if self.window_capacity < 1:
            raise ConfigError(f"window capacity must be >= 1, got {self.window_capacity}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.u_min_pos is not None and not 0 <= self.u_min_pos <= self.k - 1:
            raise ConfigError(f"u_min_pos={self.u_min_pos} outside 0..{self.k - 1}")
        if self.normalization is not None and self.normalization.d != self.d:
            raise ConfigError("normalization bounds do not match d")
        if self.update_limit < 1:
            raise ConfigError("update_limit must be >= 1")


def make_scheme(config: EngineConfig) -> Scheme:
    if config.scheme == "naive":
        return NaiveScheme(config.k, config.d)
    if config.scheme == "ci":
        return CIScheme(config.k, config.d, eps=config.ci_eps)
    if config.scheme == "mi":
        return MIScheme(config.k, config.d, config.u_min_pos)
    return AIScheme(config.k, config.d, single_pair=config.ai_single_pair, u_min_pos=config.u_min_pos)


@dataclass
class EventTrace:
    """Scan records of the most recent event, for inspection and tests."""

    departed: int | None = None
    departure: ScanRecord | None = None
    arrival: ScanRecord | None = None
    calculate: ScanRecord | None = None
    recomputed: list[int] = field(default_factory=list)


def count_checks(*records: ScanRecord | None) -> tuple[int, int]:
    """(exact tests, passes) over the records that ran."""
    ran = [rec for rec in records if rec is not None]
    return sum(len(rec.checked) for rec in ran), len(ran)


class StreamEngine:
    """Single-node maintenance of k-dominant skyline probabilities.

    Per event, ``compared_count`` is the number of exact k-dominance tests
    summed over the departure, arrival and calculate passes. Each pass could
    have tested every resident, so ``compared + pruned == passes * window_size``.
    """

    def __init__(self, config: EngineConfig):
        self.config = config
        self.window = SlidingWindow(config.window_capacity)
        self.scheme = make_scheme(config)
        self.last_id: int | None = None
        self.trace = EventTrace()
        self.recompute_count = 0

    @property
    def k(self) -> int:
        return self.config.k

    def reset(self) -> None:
        self.window = SlidingWindow(self.config.window_capacity)
        self.scheme.reset()
        self.last_id = None
        self.trace = EventTrace()
        self.recompute_count = 0

    def _admit(self, item: UncertainItem) -> WindowEntry:
        if item.d != self.config.d:
            raise UsageError(f"item {item.id} has {item.d} values, engine expects {self.config.d}")
        if self.last_id is not None and item.id <= self.last_id:
            raise UsageError(f"out-of-order event id {item.id} (last was {self.last_id})")
        return make_entry(item, self.config.normalization)

    def process_event(self, event: StreamEvent | UncertainItem) -> EventStats:
        item = event.item if isinstance(event, StreamEvent) else event
        start = time.perf_counter_ns()
        new = self._admit(item)
        entries = self.window.entries
        trace = EventTrace()

        if self.window.is_full:
            old = self.window.pop_oldest()
            self.scheme.remove(old)
            trace.departed = old.id
            trace.departure = self.scheme.depart(entries, old)
        window_size = len(entries)
        trace.arrival = self.scheme.arrive(entries, new)
        new.ksky_prob, trace.calculate = self.scheme.calculate(entries, new)
        self.window.push(new)
        self.scheme.insert(new)
        self.last_id = item.id

        trace.recomputed = self._guard_drift(trace)
        compared, passes = count_checks(trace.departure, trace.arrival, trace.calculate)
        self.trace = trace
        wall = time.perf_counter_ns() - start
        return EventStats(item.id, self.scheme.name, window_size, compared,
                          passes * window_size - compared, wall, passes)

    def _guard_drift(self, trace: EventTrace) -> list[int]:
        touched = []
        for rec in (trace.departure, trace.arrival):
            if rec is not None:
                touched.extend(rec.updated)
        if not touched:
            return []
        limit = self.config.update_limit
        floor = self.config.underflow_floor
        redo = []
        entries = self.window.entries
        for item_id in dict.fromkeys(touched):
            e = entries[item_id]
            if e.update_count > limit or e.ksky_prob < floor:
                e.ksky_prob = ksky_probability(e.item, self.window, self.k)
                e.update_count = 0
                redo.append(item_id)
        self.recompute_count += len(redo)
        return redo

    def run(self, items: Iterable[UncertainItem]) -> Iterator[EventStats]:
        for item in items:
            yield self.process_event(item)

    def probabilities(self) -> dict[int, float]:
        return {e.id: e.ksky_prob for e in self.window}

    def query_skyline(self, tau: float | None = None) -> list[tuple[int, float]]:
        """Entries with probability >= ``tau``, most probable first, ties by id."""
        if tau is None:
            tau = self.config.tau
        hits = [(e.id, e.ksky_prob) for e in self.window if e.ksky_prob >= tau]
        hits.sort(key=lambda t: (-t[1], t[0]))
        return hits


class StatsWriter:
    """Append-only CSV sink for :class:`EventStats`."""

    def __init__(self, fh: TextIO, header: bool = True):
        self._w = csv.writer(fh)
        if header:
            self._w.writerow(STATS_HEADER)

    def write(self, stats: EventStats) -> None:
        self._w.writerow(stats.row())
