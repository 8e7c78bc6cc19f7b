"""In-process simulation of a header node coordinating ``m`` edge workers.

The coordinator owns the global FIFO order; workers own disjoint partitions
of the window (round-robin by arrival). The survival product of a new item
factorizes over any partition of the window, so each worker returns the
product over its own k-dominators and the coordinator multiplies them.
Every broadcast waits for all ``m`` replies before the next step.
"""

from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FuturesTimeout
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .core import UncertainItem, UsageError, WindowEntry, k_dominates_values, make_entry
from .engine import EngineConfig, EventStats, make_scheme

ARRIVAL = "ArrivalBroadcast"
DEPARTURE = "DepartureBroadcast"
RECOMPUTE = "RecomputeBroadcast"
ASSIGN = "Assign"
PARTIAL = "PartialResult"
ACK = "Ack"
KINDS = (ARRIVAL, DEPARTURE, RECOMPUTE, ASSIGN, PARTIAL, ACK)
COORDINATOR = -1


class ClusterError(RuntimeError):
    """A worker failed to answer; the event was aborted."""


@dataclass
class NodeMessage:
    kind: str
    event_id: int
    worker_id: int
    items: tuple[UncertainItem, ...] = ()
    reals: tuple[float, ...] = ()
    ints: tuple[int, ...] = ()

    def to_line(self) -> str:
        """``kind,event_id,worker_id,items=..,reals=..,ints=..``; items are
        ``id;v1;..;vd;prob`` joined by ``|``; reals use repr precision."""
        items = "|".join(";".join([str(u.id), *(repr(v) for v in u.values), repr(u.prob)]) for u in self.items)
        reals = ";".join(repr(float(x)) for x in self.reals)
        ints = ";".join(str(int(x)) for x in self.ints)
        return f"{self.kind},{self.event_id},{self.worker_id},items={items},reals={reals},ints={ints}"

    @classmethod
    def from_line(cls, line: str) -> "NodeMessage":
        parts = line.rstrip("\n").split(",")
        if len(parts) != 6 or parts[0] not in KINDS:
            raise ValueError(f"malformed message line: {line!r}")
        fields = {}
        for p in parts[3:]:
            key, _, val = p.partition("=")
            fields[key] = val
        items = []
        for rec in filter(None, fields["items"].split("|")):
            toks = rec.split(";")
            items.append(UncertainItem(int(toks[0]), tuple(float(t) for t in toks[1:-1]), float(toks[-1])))
        reals = tuple(float(t) for t in filter(None, fields["reals"].split(";")))
        ints = tuple(int(t) for t in filter(None, fields["ints"].split(";")))
        return cls(parts[0], int(parts[1]), int(parts[2]), tuple(items), reals, ints)


class Worker:
    """One edge node: a window partition plus its own scheme index.

    Replies carry ``ints = (compared, local_size, *flagged_ids)`` where
    flagged ids need a from-scratch recompute (drift guard).
    """

    def __init__(self, worker_id: int, config: EngineConfig):
        self.worker_id = worker_id
        self.config = config
        self.scheme = make_scheme(config)
        self.entries: dict[int, WindowEntry] = {}
        self._touched: list[int] = []

    def __len__(self) -> int:
        return len(self.entries)

    def handle(self, msg: NodeMessage) -> NodeMessage | None:
        if msg.kind == DEPARTURE:
            return self._depart(msg)
        if msg.kind == ARRIVAL:
            return self._arrive(msg)
        if msg.kind == RECOMPUTE:
            return self._recompute(msg)
        if msg.kind == ASSIGN:
            return self._assign(msg)
        raise UsageError(f"worker cannot handle {msg.kind}")

    def _entry(self, u: UncertainItem) -> WindowEntry:
        return make_entry(u, self.config.normalization)

    def _reply(self, kind, msg, reals=(), ints=()):
        return NodeMessage(kind, msg.event_id, self.worker_id, reals=tuple(reals), ints=tuple(ints))

    def _depart(self, msg):
        (u_old,) = msg.items
        own = self.entries.pop(u_old.id, None)
        if own is not None:
            self.scheme.remove(own)
        rec = self.scheme.depart(self.entries, self._entry(u_old))
        self._touched = list(rec.updated)
        return self._reply(ACK, msg, ints=(len(rec.checked), len(self.entries)))

    def _arrive(self, msg):
        (u_new,) = msg.items
        new = self._entry(u_new)
        arr = self.scheme.arrive(self.entries, new)
        survive, calc = self.scheme.dominator_product(self.entries, new)
        touched = dict.fromkeys(self._touched + arr.updated)
        self._touched = []
        limit, floor = self.config.update_limit, self.config.underflow_floor
        flagged = [i for i in touched
                   if self.entries[i].update_count > limit or self.entries[i].ksky_prob < floor]
        return self._reply(PARTIAL, msg, reals=(survive,),
                           ints=(len(arr.checked) + len(calc.checked), len(self.entries), *flagged))

    def _recompute(self, msg):
        k = self.config.k
        products = []
        for u in msg.items:
            survive = 1.0
            for e in self.entries.values():
                if e.id != u.id and k_dominates_values(e.item.values, u.values, k):
                    survive *= 1.0 - e.item.prob
            products.append(survive)
        return self._reply(PARTIAL, msg, reals=products, ints=(0, len(self.entries)))

    def _assign(self, msg):
        for u, p in zip(msg.items, msg.reals):
            existing = self.entries.get(u.id)
            if existing is None:
                e = self._entry(u)
                e.ksky_prob = p
                self.entries[u.id] = e
                self.scheme.insert(e)
            else:
                existing.ksky_prob = p
                existing.update_count = 0
        return self._reply(ACK, msg, ints=(0, len(self.entries)))


class Transport:
    """Direct calls; ``wire=True`` pushes every message through its text form."""

    def __init__(self, wire: bool = False):
        self.wire = wire

    def _pass(self, msg):
        return NodeMessage.from_line(msg.to_line()) if self.wire and msg is not None else msg

    def send(self, workers, targets, msgs):
        return [self._pass(workers[t].handle(self._pass(m))) for t, m in zip(targets, msgs)]

    def close(self):
        pass


class ThreadedTransport(Transport):
    """One single-thread executor per worker; a missing reply within
    ``timeout`` seconds raises :class:`ClusterError`."""

    def __init__(self, m: int, timeout: float = 10.0, wire: bool = False):
        super().__init__(wire)
        self.timeout = timeout
        self._pools = [ThreadPoolExecutor(max_workers=1) for _ in range(m)]

    def send(self, workers, targets, msgs):
        futs = [self._pools[t].submit(workers[t].handle, self._pass(m)) for t, m in zip(targets, msgs)]
        out = []
        for t, f in zip(targets, futs):
            try:
                out.append(self._pass(f.result(timeout=self.timeout)))
            except FuturesTimeout:
                raise ClusterError(f"worker {t} timed out") from None
        return out

    def close(self):
        for p in self._pools:
            p.shutdown(wait=False, cancel_futures=True)


@dataclass
class EventRecord:
    """Per-event coordinator bookkeeping kept for checks."""

    event_id: int
    partials: list[float] = field(default_factory=list)
    ksky_prob: float = 0.0


class Cluster:
    """Coordinator plus ``m`` workers running one scheme."""

    def __init__(self, config: EngineConfig, m: int, transport: Transport | None = None, record_trace: bool = False):
        if m < 1:
            raise UsageError(f"need at least one worker, got m={m}")
        self.config = config
        self.m = m
        self.workers = [Worker(w, config) for w in range(m)]
        self.transport = transport or Transport()
        self.fifo: deque[tuple[UncertainItem, int]] = deque()
        self.last_id: int | None = None
        self._rr = 0
        self.record_trace = record_trace
        self.trace: list[str] = []
        self.last_event: EventRecord | None = None
        self.recompute_count = 0

    def close(self) -> None:
        self.transport.close()

    def _exchange(self, targets, msgs) -> list[NodeMessage]:
        replies = self.transport.send(self.workers, targets, msgs)
        for t, msg, rep in zip(targets, msgs, replies):
            if rep is None:
                raise ClusterError(f"worker {t} sent no reply to {msg.kind} for event {msg.event_id}")
            if rep.event_id != msg.event_id or rep.worker_id != t:
                raise ClusterError(f"stray reply from worker {rep.worker_id}")
        if self.record_trace:
            self.trace.extend(m.to_line() for m in msgs)
            self.trace.extend(r.to_line() for r in replies)
        return replies

    def _broadcast(self, kind, event_id, items) -> list[NodeMessage]:
        msg = NodeMessage(kind, event_id, COORDINATOR, items=tuple(items))
        return self._exchange(range(self.m), [msg] * self.m)

    def coordinate_event(self, item: UncertainItem) -> EventStats:
        cfg = self.config
        if item.d != cfg.d:
            raise UsageError(f"item {item.id} has {item.d} values, cluster expects {cfg.d}")
        if self.last_id is not None and item.id <= self.last_id:
            raise UsageError(f"out-of-order event id {item.id} (last was {self.last_id})")
        start = time.perf_counter_ns()
        eid = item.id
        compared = 0
        passes = 0
        flagged: list[int] = []

        if len(self.fifo) >= cfg.window_capacity:
            old, _ = self.fifo.popleft()
            acks = self._broadcast(DEPARTURE, eid, [old])
            compared += sum(a.ints[0] for a in acks)
            passes += 1
        window_size = len(self.fifo)

        partials = self._broadcast(ARRIVAL, eid, [item])
        passes += 2
        survive = 1.0
        for rep in partials:
            survive *= rep.reals[0]
            compared += rep.ints[0]
            flagged.extend(rep.ints[2:])
        prob = item.prob * survive

        owner = self._rr % self.m
        self._rr += 1
        self._exchange([owner], [NodeMessage(ASSIGN, eid, COORDINATOR, items=(item,), reals=(prob,))])
        self.fifo.append((item, owner))
        self.last_id = eid
        self.last_event = EventRecord(eid, [r.reals[0] for r in partials], prob)

        if flagged:
            self._recompute(eid, flagged)

        wall = time.perf_counter_ns() - start
        return EventStats(eid, cfg.scheme, window_size, compared, passes * window_size - compared, wall, passes)

    def _recompute(self, eid: int, ids: list[int]) -> None:
        wanted = set(ids)
        located = [(u, w) for u, w in self.fifo if u.id in wanted]
        replies = self._broadcast(RECOMPUTE, eid, [u for u, _ in located])
        by_owner: dict[int, tuple[list, list]] = {}
        for i, (u, w) in enumerate(located):
            survive = 1.0
            for rep in replies:
                survive *= rep.reals[i]
            items, probs = by_owner.setdefault(w, ([], []))
            items.append(u)
            probs.append(u.prob * survive)
        owners = sorted(by_owner)
        self._exchange(owners, [NodeMessage(ASSIGN, eid, COORDINATOR, items=tuple(by_owner[w][0]),
                                            reals=tuple(by_owner[w][1])) for w in owners])
        self.recompute_count += len(located)

    def run(self, items: Iterable[UncertainItem]) -> Iterator[EventStats]:
        for item in items:
            yield self.coordinate_event(item)

    def probabilities(self) -> dict[int, float]:
        out = {}
        for w in self.workers:
            for e in w.entries.values():
                out[e.id] = e.ksky_prob
        return out

    def partition_sizes(self) -> list[int]:
        return [len(w) for w in self.workers]

    def check_partitions(self) -> None:
        """Partitions must tile the window: disjoint, covering, and balanced."""
        seen: set[int] = set()
        for w in self.workers:
            ids = set(w.entries)
            assert not (ids & seen), "partitions overlap"
            seen |= ids
        assert seen == {u.id for u, _ in self.fifo}, "partitions do not cover the window"
        cap = -(-self.config.window_capacity // self.m)
        assert max(self.partition_sizes()) <= cap, "partition exceeds ceil(capacity / m)"

    def query_skyline(self, tau: float | None = None) -> list[tuple[int, float]]:
        if tau is None:
            tau = self.config.tau
        hits = [(i, p) for i, p in self.probabilities().items() if p >= tau]
        hits.sort(key=lambda t: (-t[1], t[0]))
        return hits
