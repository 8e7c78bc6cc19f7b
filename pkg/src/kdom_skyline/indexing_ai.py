"""All Indexing: apply the threshold filter at every admissible position pair.

No tables are kept. Each event walks the window once per pass, drops every
entry that some pair ``(i, i + d - k)``, ``i = 0..k-1``, proves irrelevant,
and runs the exact k-dominance test on the survivors.
"""

from __future__ import annotations

from typing import Mapping

from .core import ScanRecord, Scheme, UsageError, WindowEntry, k_dominates_values
from .indexing_mi import ThresholdPositions


def position_pairs(d: int, k: int) -> list[tuple[int, int]]:
    if not 1 <= k <= d:
        raise UsageError(f"k={k} outside 1..{d}")
    return [(i, i + d - k) for i in range(k)]


def _pairs_for(d: int, k: int, single_pair: ThresholdPositions | None) -> list[tuple[int, int]]:
    if single_pair is not None:
        return [(single_pair.u_min_pos, single_pair.u_max_pos)]
    return position_pairs(d, k)


def cal_ait_max(probe: WindowEntry, entries: Mapping[int, WindowEntry] | list[WindowEntry], k: int,
                single_pair: ThresholdPositions | None = None) -> list[int]:
    """Ids of entries that ``probe`` might k-dominate, in window order.

    An entry is dropped as soon as one pair has ``MI_min(probe) > MI_max(e)``.
    """
    seq = entries.values() if isinstance(entries, Mapping) else entries
    ps = probe.profile.sorted_values
    d = len(ps)
    pairs = _pairs_for(d, k, single_pair)
    probe_mins = [(ps[lo], hi) for lo, hi in pairs]
    out = []
    for e in seq:
        es = e.profile.sorted_values
        for lo_val, hi in probe_mins:
            if lo_val > es[hi]:
                break
        else:
            out.append(e.id)
    return out


def cal_ait_min(probe: WindowEntry, entries: Mapping[int, WindowEntry] | list[WindowEntry], k: int,
                single_pair: ThresholdPositions | None = None) -> list[int]:
    """Ids of entries that might k-dominate ``probe``, in window order.

    An entry is dropped as soon as one pair has ``MI_min(e) > MI_max(probe)``.
    """
    seq = entries.values() if isinstance(entries, Mapping) else entries
    ps = probe.profile.sorted_values
    d = len(ps)
    pairs = _pairs_for(d, k, single_pair)
    probe_maxs = [(lo, ps[hi]) for lo, hi in pairs]
    out = []
    for e in seq:
        es = e.profile.sorted_values
        for lo, hi_val in probe_maxs:
            if es[lo] > hi_val:
                break
        else:
            out.append(e.id)
    return out


def _apply(entries, candidates, probe: WindowEntry, k: int, departing: bool) -> ScanRecord:
    rec = ScanRecord(candidates=candidates)
    pv = probe.item.values
    factor = 1.0 - probe.item.prob
    for item_id in candidates:
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


def ai_update(entries: Mapping[int, WindowEntry], u_new: WindowEntry, u_old: WindowEntry | None, k: int,
              single_pair: ThresholdPositions | None = None) -> tuple[ScanRecord | None, ScanRecord]:
    dep = None
    if u_old is not None:
        dep = _apply(entries, cal_ait_max(u_old, entries, k, single_pair), u_old, k, departing=True)
    arr = _apply(entries, cal_ait_max(u_new, entries, k, single_pair), u_new, k, departing=False)
    return dep, arr


def ai_calculate(u_new: WindowEntry, entries: Mapping[int, WindowEntry], k: int,
                 single_pair: ThresholdPositions | None = None) -> tuple[float, ScanRecord]:
    """Survival product of ``u_new`` over its k-dominators among the AIT_min survivors."""
    cands = cal_ait_min(u_new, entries, k, single_pair)
    rec = ScanRecord(candidates=cands)
    nv = u_new.item.values
    survive = 1.0
    for item_id in cands:
        e = entries[item_id]
        rec.checked.append(item_id)
        if k_dominates_values(e.item.values, nv, k):
            survive *= 1.0 - e.item.prob
    return survive, rec


class AIScheme(Scheme):
    """``single_pair=True`` restricts filtering to the MI position pair, which
    is what the per-entry pseudocode literally compares."""

    name = "ai"

    def __init__(self, k: int, d: int, single_pair: bool = False, u_min_pos: int | None = None):
        super().__init__(k, d)
        self.single_pair = ThresholdPositions.for_k(d, k, u_min_pos) if single_pair else None

    def depart(self, entries, old):
        return _apply(entries, cal_ait_max(old, entries, self.k, self.single_pair), old, self.k, True)

    def arrive(self, entries, new):
        return _apply(entries, cal_ait_max(new, entries, self.k, self.single_pair), new, self.k, False)

    def dominator_product(self, entries, new):
        return ai_calculate(new, entries, self.k, self.single_pair)
