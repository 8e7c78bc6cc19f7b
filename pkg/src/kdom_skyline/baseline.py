"""Reference schemes: unfiltered pairwise scan and a CI-style product-key filter.

The CI-style scheme keys each item on the product of its k smallest and k
largest normalized values. If ``q`` k-dominates ``p`` there are k dimensions
where ``q <= p``; sorting those k values of each and multiplying gives
``key_min(q) <= key_max(p)``. So ``key_min(q) > key_max(p)`` excludes the
pair. Products are taken over ascending-sorted factors, which keeps the
argument valid under monotone float rounding.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass
from typing import Mapping

from .core import ScanRecord, Scheme, SortedProfile, WindowEntry, k_dominates_values

CI_EPSILON = 1e-6


def naive_update(entries: Mapping[int, WindowEntry], u_new: WindowEntry, u_old: WindowEntry | None,
                 k: int) -> tuple[ScanRecord | None, ScanRecord]:
    dep = _scan_all(entries, u_old, k, departing=True) if u_old is not None else None
    return dep, _scan_all(entries, u_new, k, departing=False)


def _scan_all(entries, probe: WindowEntry, k: int, departing: bool, order=None) -> ScanRecord:
    rec = ScanRecord()
    pv = probe.item.values
    factor = 1.0 - probe.item.prob
    for item_id in (entries if order is None else order):
        e = entries[item_id]
        rec.checked.append(item_id)
        if k_dominates_values(pv, e.item.values, k):
            if departing:
                e.ksky_prob /= factor
            else:
                e.ksky_prob *= factor
            e.update_count += 1
            rec.updated.append(item_id)
    return rec


def naive_calculate(entries: Mapping[int, WindowEntry], u_new: WindowEntry, k: int) -> tuple[float, ScanRecord]:
    rec = ScanRecord()
    nv = u_new.item.values
    survive = 1.0
    for item_id, e in entries.items():
        rec.checked.append(item_id)
        if k_dominates_values(e.item.values, nv, k):
            survive *= 1.0 - e.item.prob
    return survive, rec


class NaiveScheme(Scheme):
    name = "naive"

    def depart(self, entries, old):
        return _scan_all(entries, old, self.k, departing=True)

    def arrive(self, entries, new):
        return _scan_all(entries, new, self.k, departing=False)

    def dominator_product(self, entries, new):
        return naive_calculate(entries, new, self.k)


@dataclass(frozen=True)
class CiKeyRecord:
    item_id: int
    key_min: float
    key_max: float

    @classmethod
    def from_profile(cls, profile: SortedProfile, k: int, eps: float = CI_EPSILON) -> "CiKeyRecord":
        s = [v if v > eps else eps for v in profile.sorted_values]
        d = len(s)
        key_min = 1.0
        for v in s[:k]:
            key_min *= v
        key_max = 1.0
        for v in s[d - k:]:
            key_max *= v
        return cls(profile.item_id, key_min, key_max)


def ci_filter(probe: WindowEntry, entries: Mapping[int, WindowEntry] | list[WindowEntry], k: int,
              eps: float = CI_EPSILON) -> list[int]:
    """Ids of entries the probe might k-dominate (unsorted form of the CI scan)."""
    seq = entries.values() if isinstance(entries, Mapping) else entries
    pkey = CiKeyRecord.from_profile(probe.profile, k, eps).key_min
    return [e.id for e in seq if not pkey > CiKeyRecord.from_profile(e.profile, k, eps).key_max]


class CIScheme(Scheme):
    """CI-style baseline: tables sorted on product keys, scanned like MI."""

    name = "ci"

    def __init__(self, k: int, d: int, eps: float = CI_EPSILON):
        super().__init__(k, d)
        self.eps = eps
        self._records: dict[int, CiKeyRecord] = {}
        self._max_keys: list[tuple[float, int]] = []  # (-key_max, id)
        self._min_keys: list[tuple[float, int]] = []  # (key_min, id)

    def record(self, entry: WindowEntry) -> CiKeyRecord:
        rec = self._records.get(entry.id)
        return rec if rec is not None else CiKeyRecord.from_profile(entry.profile, self.k, self.eps)

    def insert(self, entry):
        r = CiKeyRecord.from_profile(entry.profile, self.k, self.eps)
        self._records[entry.id] = r
        insort(self._max_keys, (-r.key_max, entry.id))
        insort(self._min_keys, (r.key_min, entry.id))

    def remove(self, entry):
        r = self._records.pop(entry.id)
        del self._max_keys[bisect_left(self._max_keys, (-r.key_max, entry.id))]
        del self._min_keys[bisect_left(self._min_keys, (r.key_min, entry.id))]

    def reset(self):
        self._records.clear()
        self._max_keys.clear()
        self._min_keys.clear()

    def _scan(self, entries, probe, departing):
        key_min = self.record(probe).key_min
        order = []
        stopped = None
        for neg, item_id in self._max_keys:
            if key_min > -neg:
                stopped = item_id
                break
            order.append(item_id)
        rec = _scan_all(entries, probe, self.k, departing, order)
        rec.stopped_at = stopped
        return rec

    def depart(self, entries, old):
        return self._scan(entries, old, departing=True)

    def arrive(self, entries, new):
        return self._scan(entries, new, departing=False)

    def dominator_product(self, entries, new):
        key_max = self.record(new).key_max
        rec = ScanRecord()
        nv = new.item.values
        survive = 1.0
        for key_min, item_id in self._min_keys:
            if key_max < key_min:
                rec.stopped_at = item_id
                break
            e = entries[item_id]
            rec.checked.append(item_id)
            if k_dominates_values(e.item.values, nv, self.k):
                survive *= 1.0 - e.item.prob
        return survive, rec
