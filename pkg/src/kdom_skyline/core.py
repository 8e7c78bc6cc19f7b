"""Domain types, dominance predicates and probability formulas.

All attributes are smaller-is-better. Occurrence probabilities live in the
open interval (0, 1) so that a departure update can always divide by
``1 - P(u_old)``.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np


class UsageError(ValueError):
    """Bad arguments: mismatched dimensions, k out of range, bad ids."""


class ConfigError(ValueError):
    """Invalid configuration (normalization bounds, ranges, sweep specs)."""


@dataclass(frozen=True, slots=True)
class UncertainItem:
    id: int
    values: tuple[float, ...]
    prob: float

    def __post_init__(self):
        if not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise UsageError("item needs at least one attribute")
        if not all(math.isfinite(v) for v in self.values):
            raise UsageError(f"item {self.id}: non-finite attribute value")
        if not 0.0 < self.prob < 1.0:
            raise UsageError(f"item {self.id}: probability {self.prob!r} not in (0, 1)")

    @property
    def d(self) -> int:
        return len(self.values)


@dataclass(frozen=True, slots=True)
class SortedProfile:
    item_id: int
    sorted_values: tuple[float, ...]


@dataclass(slots=True)
class WindowEntry:
    item: UncertainItem
    profile: SortedProfile
    ksky_prob: float
    # multiplicative updates applied since the last from-scratch computation
    update_count: int = 0

    @property
    def id(self) -> int:
        return self.item.id


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-dimension min-max bounds; values map to ``(x - lo) / (hi - lo)``
    clamped to [0, 1]."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for j, (lo, hi) in enumerate(bounds):
            if not lo < hi:
                raise ConfigError(f"dimension {j}: lo={lo} must be < hi={hi}")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def uniform(cls, d: int, lo: float = 0.0, hi: float = 1.0) -> "NormalizationSpec":
        return cls(tuple((lo, hi) for _ in range(d)))

    @property
    def d(self) -> int:
        return len(self.bounds)

    def scale(self, values: Sequence[float]) -> tuple[float, ...]:
        if len(values) != len(self.bounds):
            raise UsageError(f"expected {len(self.bounds)} values, got {len(values)}")
        out = []
        for x, (lo, hi) in zip(values, self.bounds):
            v = (x - lo) / (hi - lo)
            out.append(0.0 if v < 0.0 else 1.0 if v > 1.0 else v)
        return tuple(out)


def _check_pair(a: UncertainItem, b: UncertainItem) -> None:
    if len(a.values) != len(b.values):
        raise UsageError(f"dimension mismatch: {len(a.values)} vs {len(b.values)}")


def _check_k(k: int, d: int) -> None:
    if not 1 <= k <= d:
        raise UsageError(f"k={k} outside 1..{d}")


def dominates(a: UncertainItem, b: UncertainItem) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    _check_pair(a, b)
    strict = False
    for x, y in zip(a.values, b.values):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def k_dominates_values(a: Sequence[float], b: Sequence[float], k: int) -> bool:
    """Unchecked k-dominance on raw value vectors (hot path)."""
    not_worse = 0
    strict = False
    for x, y in zip(a, b):
        if x <= y:
            not_worse += 1
            if x < y:
                strict = True
    return strict and not_worse >= k


def k_dominates(a: UncertainItem, b: UncertainItem, k: int) -> bool:
    """True iff ``a`` is no worse than ``b`` in at least ``k`` dimensions and
    strictly better in at least one."""
    _check_pair(a, b)
    _check_k(k, len(a.values))
    return k_dominates_values(a.values, b.values, k)


def ksky_probability(u: UncertainItem, window: "SlidingWindow | Iterable[WindowEntry]", k: int) -> float:
    """P(u) times the product of ``1 - P(u')`` over window items that k-dominate u."""
    _check_k(k, u.d)
    survive = 1.0
    for e in window:
        other = e.item
        if other.id == u.id:
            continue
        _check_pair(other, u)
        if k_dominates_values(other.values, u.values, k):
            survive *= 1.0 - other.prob
    return u.prob * survive


def apply_departure(entry: WindowEntry, departed: UncertainItem, k: int) -> float:
    """Undo the factor contributed by an evicted k-dominator."""
    if k_dominates_values(departed.values, entry.item.values, k):
        entry.ksky_prob /= 1.0 - departed.prob
        entry.update_count += 1
    return entry.ksky_prob


def apply_arrival(entry: WindowEntry, arrived: UncertainItem, k: int) -> float:
    """Fold in the factor of a newly arrived k-dominator."""
    if k_dominates_values(arrived.values, entry.item.values, k):
        entry.ksky_prob *= 1.0 - arrived.prob
        entry.update_count += 1
    return entry.ksky_prob


def normalize_and_sort(u: UncertainItem, spec: NormalizationSpec | None) -> SortedProfile:
    """Scale ``u`` per ``spec`` and sort ascending.

    ``spec=None`` keeps raw magnitudes; thresholds only depend on order, so
    any per-dimension monotone map yields the same pruning decisions.
    """
    scaled = u.values if spec is None else spec.scale(u.values)
    return SortedProfile(u.id, tuple(sorted(scaled)))


def make_entry(u: UncertainItem, spec: NormalizationSpec | None, ksky_prob: float | None = None) -> WindowEntry:
    return WindowEntry(u, normalize_and_sort(u, spec), u.prob if ksky_prob is None else ksky_prob)


class SlidingWindow:
    """Count-based FIFO window of :class:`WindowEntry` keyed by item id."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError(f"window capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.entries: OrderedDict[int, WindowEntry] = OrderedDict()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[WindowEntry]:
        return iter(self.entries.values())

    def __contains__(self, item_id: int) -> bool:
        return item_id in self.entries

    def __getitem__(self, item_id: int) -> WindowEntry:
        return self.entries[item_id]

    @property
    def is_full(self) -> bool:
        return len(self.entries) >= self.capacity

    def ids(self) -> list[int]:
        return list(self.entries)

    def push(self, entry: WindowEntry) -> None:
        if self.is_full:
            raise UsageError("window is full; evict before pushing")
        if entry.id in self.entries:
            raise UsageError(f"duplicate item id {entry.id}")
        self.entries[entry.id] = entry

    def pop_oldest(self) -> WindowEntry:
        _, entry = self.entries.popitem(last=False)
        return entry


def oracle_window_probabilities(window: SlidingWindow | Iterable[WindowEntry], k: int) -> dict[int, float]:
    """Recompute every entry's k-dominant skyline probability from scratch.

    Vectorized pairwise check; independent of any incremental state.
    """
    items = [e.item for e in window]
    if not items:
        return {}
    vals = np.array([u.values for u in items], dtype=float)
    probs = np.array([u.prob for u in items], dtype=float)
    return dict(zip((u.id for u in items), _oracle_array(vals, probs, k).tolist()))


def _oracle_array(vals: np.ndarray, probs: np.ndarray, k: int) -> np.ndarray:
    n, d = vals.shape
    _check_k(k, d)
    # dom[i, j]: item i k-dominates item j
    a = vals[:, None, :]
    b = vals[None, :, :]
    dom = ((a <= b).sum(axis=2) >= k) & (a < b).any(axis=2)
    np.fill_diagonal(dom, False)
    factors = np.where(dom, (1.0 - probs)[:, None], 1.0)
    return probs * factors.prod(axis=0)


def format_item(u: UncertainItem) -> str:
    """One CSV line: id, values..., prob (round-trip precision)."""
    return ",".join([str(u.id), *(repr(float(v)) for v in u.values), repr(float(u.prob))])


def parse_item(line: str, d: int | None = None) -> UncertainItem:
    parts = [p.strip() for p in line.strip().split(",")]
    if len(parts) < 3:
        raise UsageError(f"malformed item line: {line!r}")
    values = tuple(float(p) for p in parts[1:-1])
    if d is not None and len(values) != d:
        raise UsageError(f"expected {d} values, got {len(values)}: {line!r}")
    return UncertainItem(int(parts[0]), values, float(parts[-1]))


def read_items(lines: Iterable[str], d: int | None = None) -> Iterator[UncertainItem]:
    for line in lines:
        if line.strip() and not line.lstrip().startswith("#"):
            yield parse_item(line, d)


def write_items(items: Iterable[UncertainItem], fh) -> None:
    for u in items:
        fh.write(format_item(u) + "\n")


@dataclass
class ScanRecord:
    """What one pass over the window looked at.

    ``checked`` lists entries that got an exact k-dominance test, in scan
    order; ``stopped_at`` is the entry whose threshold test ended a sorted
    scan early (None if the scan ran to the end or was unsorted).
    """

    checked: list[int] = field(default_factory=list)
    updated: list[int] = field(default_factory=list)
    stopped_at: int | None = None
    candidates: list[int] | None = None


class Scheme:
    """Maintenance strategy for the entries of one window or partition.

    Subclasses only change which entries are tested exactly; the math of the
    three passes is shared. ``entries`` maps item id to entry and never
    contains the probe.
    """

    name = "base"

    def __init__(self, k: int, d: int):
        _check_k(k, d)
        self.k = k
        self.d = d

    def insert(self, entry: WindowEntry) -> None:
        pass

    def remove(self, entry: WindowEntry) -> None:
        pass

    def reset(self) -> None:
        pass

    def depart(self, entries: Mapping[int, WindowEntry], old: WindowEntry) -> ScanRecord:
        raise NotImplementedError

    def arrive(self, entries: Mapping[int, WindowEntry], new: WindowEntry) -> ScanRecord:
        raise NotImplementedError

    def dominator_product(self, entries: Mapping[int, WindowEntry], new: WindowEntry) -> tuple[float, ScanRecord]:
        """Product of ``1 - P(e)`` over entries that k-dominate ``new``."""
        raise NotImplementedError

    def calculate(self, entries: Mapping[int, WindowEntry], new: WindowEntry) -> tuple[float, ScanRecord]:
        survive, rec = self.dominator_product(entries, new)
        return new.item.prob * survive, rec
