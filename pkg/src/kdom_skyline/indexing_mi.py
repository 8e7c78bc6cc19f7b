"""Middle Indexing: one fixed threshold-position pair and two sorted tables.

For a pair ``(lo, hi = lo + d - k)`` each item gets two thresholds read off
its sorted profile, ``MI_min = sorted[lo]`` and ``MI_max = sorted[hi]``.
If ``MI_max(p) < MI_min(q)`` then ``q`` is worse than ``p`` in at least
``d - k + 1`` dimensions and so cannot k-dominate ``p``. Keeping the window
sorted on both thresholds turns that test into an early ``break``.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass
from typing import Mapping

from .core import (
    ScanRecord,
    Scheme,
    SortedProfile,
    UsageError,
    WindowEntry,
    k_dominates_values,
)


@dataclass(frozen=True)
class ThresholdPositions:
    u_min_pos: int
    u_max_pos: int

    @classmethod
    def for_k(cls, d: int, k: int, u_min_pos: int | None = None) -> "ThresholdPositions":
        if not 1 <= k <= d:
            raise UsageError(f"k={k} outside 1..{d}")
        if u_min_pos is None:
            u_min_pos = k - 1
        if not 0 <= u_min_pos <= k - 1:
            raise UsageError(f"u_min_pos={u_min_pos} outside 0..{k - 1}")
        return cls(u_min_pos, u_min_pos + (d - k))


def mi_thresholds(profile: SortedProfile, pos: ThresholdPositions) -> tuple[float, float]:
    s = profile.sorted_values
    return s[pos.u_min_pos], s[pos.u_max_pos]


def cannot_k_dominate(q: SortedProfile, p: SortedProfile, pos: ThresholdPositions) -> bool:
    """Sound filter: True proves ``q`` does not k-dominate ``p``."""
    return p.sorted_values[pos.u_max_pos] < q.sorted_values[pos.u_min_pos]


class MiddleIndexTables:
    """``mit_max``: ids by MI_max descending; ``mit_min``: ids by MI_min
    ascending. Ties go to the smaller id in both tables."""

    def __init__(self, pos: ThresholdPositions):
        self.pos = pos
        self._max_keys: list[tuple[float, int]] = []  # (-MI_max, id)
        self._min_keys: list[tuple[float, int]] = []  # (MI_min, id)
        self._thresholds: dict[int, tuple[float, float]] = {}

    def __len__(self) -> int:
        return len(self._thresholds)

    def __contains__(self, item_id: int) -> bool:
        return item_id in self._thresholds

    @property
    def mit_max(self) -> list[int]:
        return [i for _, i in self._max_keys]

    @property
    def mit_min(self) -> list[int]:
        return [i for _, i in self._min_keys]

    def thresholds(self, item_id: int) -> tuple[float, float]:
        return self._thresholds[item_id]

    def iter_max(self):
        """Yield ``(id, MI_max)`` in table order."""
        for neg, i in self._max_keys:
            yield i, -neg

    def iter_min(self):
        """Yield ``(id, MI_min)`` in table order."""
        return iter((i, key) for key, i in self._min_keys)

    def insert(self, profile: SortedProfile) -> None:
        item_id = profile.item_id
        if item_id in self._thresholds:
            raise UsageError(f"id {item_id} already indexed")
        lo, hi = mi_thresholds(profile, self.pos)
        self._thresholds[item_id] = (lo, hi)
        insort(self._max_keys, (-hi, item_id))
        insort(self._min_keys, (lo, item_id))

    def remove(self, item_id: int) -> None:
        lo, hi = self._thresholds.pop(item_id)
        del self._max_keys[bisect_left(self._max_keys, (-hi, item_id))]
        del self._min_keys[bisect_left(self._min_keys, (lo, item_id))]

    def clear(self) -> None:
        self._max_keys.clear()
        self._min_keys.clear()
        self._thresholds.clear()

    def check(self, ids=None) -> None:
        """Raise AssertionError if either ordering or the id set is off."""
        assert self._max_keys == sorted(self._max_keys)
        assert self._min_keys == sorted(self._min_keys)
        assert len(self._max_keys) == len(self._min_keys) == len(self._thresholds)
        if ids is not None:
            assert set(self._thresholds) == set(ids)


def _scan_max(entries: Mapping[int, WindowEntry], tables: MiddleIndexTables,
              probe: WindowEntry, k: int, departing: bool) -> ScanRecord:
    rec = ScanRecord()
    probe_min = probe.profile.sorted_values[tables.pos.u_min_pos]
    pv = probe.item.values
    factor = 1.0 - probe.item.prob
    for item_id, mi_max in tables.iter_max():
        if probe_min > mi_max:
            rec.stopped_at = item_id
            break
        try:
            e = entries[item_id]
        except KeyError:
            raise AssertionError(f"index table holds id {item_id} that is not in the window") from None
        rec.checked.append(item_id)
        if k_dominates_values(pv, e.item.values, k):
            if departing:
                e.ksky_prob /= factor
            else:
                e.ksky_prob *= factor
            e.update_count += 1
            rec.updated.append(item_id)
    return rec


def mi_update(entries: Mapping[int, WindowEntry], tables: MiddleIndexTables, u_new: WindowEntry,
              u_old: WindowEntry | None, k: int) -> tuple[ScanRecord | None, ScanRecord]:
    """Departure pass (if ``u_old``) then arrival pass, both over ``mit_max``.

    ``u_old`` must already be gone from ``entries`` and ``tables``.
    """
    dep = None
    if u_old is not None:
        dep = _scan_max(entries, tables, u_old, k, departing=True)
    arr = _scan_max(entries, tables, u_new, k, departing=False)
    return dep, arr


def mi_calculate(entries: Mapping[int, WindowEntry], tables: MiddleIndexTables, u_new: WindowEntry,
                 k: int) -> tuple[float, ScanRecord]:
    """Survival product of ``u_new`` over its k-dominators, scanning ``mit_min``.

    Returns ``(prod(1 - P(e)), record)``; multiply by ``P(u_new)`` for the
    skyline probability.
    """
    rec = ScanRecord()
    new_max = u_new.profile.sorted_values[tables.pos.u_max_pos]
    nv = u_new.item.values
    survive = 1.0
    for item_id, mi_min in tables.iter_min():
        if new_max < mi_min:
            rec.stopped_at = item_id
            break
        e = entries[item_id]
        rec.checked.append(item_id)
        if k_dominates_values(e.item.values, nv, k):
            survive *= 1.0 - e.item.prob
    return survive, rec


def mi_sort(tables: MiddleIndexTables, u_new: WindowEntry) -> MiddleIndexTables:
    tables.insert(u_new.profile)
    return tables


class MIScheme(Scheme):
    name = "mi"

    def __init__(self, k: int, d: int, u_min_pos: int | None = None):
        super().__init__(k, d)
        self.pos = ThresholdPositions.for_k(d, k, u_min_pos)
        self.tables = MiddleIndexTables(self.pos)

    def insert(self, entry):
        mi_sort(self.tables, entry)

    def remove(self, entry):
        self.tables.remove(entry.id)

    def reset(self):
        self.tables.clear()

    def depart(self, entries, old):
        return _scan_max(entries, self.tables, old, self.k, departing=True)

    def arrive(self, entries, new):
        return _scan_max(entries, self.tables, new, self.k, departing=False)

    def dominator_product(self, entries, new):
        return mi_calculate(entries, self.tables, new, self.k)
