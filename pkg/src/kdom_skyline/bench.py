"""Synthetic streams, parameter sweeps and per-figure plot data."""

from __future__ import annotations

import csv
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ConfigError, UncertainItem
from .distributed import Cluster
from .engine import SCHEMES, EngineConfig, StreamEngine

DISTRIBUTIONS = ("uniform", "correlated", "anticorrelated")
RESULT_HEADER = ("scheme", "k", "d", "window", "m", "distribution", "reps",
                 "mean_wall_ms", "mean_compared", "prune_ratio")


def generate_stream(n: int, d: int, distribution: str = "uniform",
                    prob_range: tuple[float, float] = (0.01, 0.99), seed: int | None = 0,
                    start_id: int = 0) -> list[UncertainItem]:
    """``n`` items with values in [0, 1] and probabilities uniform in ``prob_range``.

    ``correlated`` scatters points around the main diagonal; ``anticorrelated``
    puts each point near the hyperplane ``sum(x) = d * c`` with ``c`` close to
    0.5, so good values in one dimension are paid for in others.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    lo, hi = prob_range
    if not 0.0 < lo < hi < 1.0:
        raise ConfigError(f"prob_range {prob_range} must satisfy 0 < lo < hi < 1")
    if distribution not in DISTRIBUTIONS:
        raise ConfigError(f"unknown distribution {distribution!r}")
    rng = np.random.default_rng(seed)

    if distribution == "uniform":
        vals = rng.random((n, d))
    elif distribution == "correlated":
        centre = np.clip(rng.normal(0.5, 0.2, size=(n, 1)), 0.0, 1.0)
        vals = np.clip(centre + rng.normal(0.0, 0.05, size=(n, d)), 0.0, 1.0)
    else:
        centre = np.clip(rng.normal(0.5, 0.05, size=(n, 1)), 0.05, 0.95)
        noise = rng.uniform(-0.5, 0.5, size=(n, d))
        noise -= noise.mean(axis=1, keepdims=True)
        # shrink the zero-sum noise so every coordinate stays in [0, 1]
        room = np.where(noise > 0, (1.0 - centre) / np.maximum(noise, 1e-300),
                        centre / np.maximum(-noise, 1e-300))
        scale = np.minimum(1.0, room.min(axis=1, keepdims=True))
        vals = np.clip(centre + noise * scale, 0.0, 1.0)

    probs = rng.uniform(lo, hi, size=n)
    return [UncertainItem(start_id + i, tuple(row), float(p)) for i, (row, p) in enumerate(zip(vals.tolist(), probs))]


@dataclass
class SweepSpec:
    schemes: Sequence[str] = SCHEMES
    ks: Sequence[int] = (11,)
    windows: Sequence[int] = (500,)
    d: int = 12
    items: int = 10_000
    nodes: Sequence[int] = (1,)
    distribution: str = "uniform"
    seed: int = 0
    reps: int = 10
    u_min_pos: int | None = None
    jobs: int = 1

    def __post_init__(self):
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}")
        for k in self.ks:
            if not 1 <= k <= self.d:
                raise ConfigError(f"k={k} must satisfy 1 <= k <= d={self.d}")
        if any(w < 1 for w in self.windows):
            raise ConfigError("window capacities must be >= 1")
        if any(m < 1 for m in self.nodes):
            raise ConfigError("node counts must be >= 1")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.items < 1:
            raise ConfigError("items must be >= 1")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"unknown distribution {self.distribution!r}")

    def cells(self):
        return list(itertools.product(self.schemes, self.ks, self.windows, self.nodes))


@dataclass
class CellResult:
    scheme: str
    k: int
    d: int
    window: int
    m: int
    distribution: str
    reps: int
    mean_wall_ms: float
    mean_compared: float
    prune_ratio: float

    def row(self) -> tuple:
        return (self.scheme, self.k, self.d, self.window, self.m, self.distribution, self.reps,
                self.mean_wall_ms, self.mean_compared, self.prune_ratio)


def run_cell(spec: SweepSpec, scheme: str, k: int, window: int, m: int) -> CellResult:
    """Average per-event wall time and comparisons over ``spec.reps`` streams.

    Repetition ``r`` uses seed ``spec.seed + r``, so every cell of a sweep
    sees the same data.
    """
    walls, compared, slots = [], [], []
    for r in range(spec.reps):
        items = generate_stream(spec.items, spec.d, spec.distribution, seed=spec.seed + r)
        cfg = EngineConfig(spec.d, k, window, scheme=scheme, u_min_pos=spec.u_min_pos, seed=spec.seed + r)
        runner = StreamEngine(cfg) if m == 1 else Cluster(cfg, m)
        w = c = s = 0
        for stats in runner.run(items):
            w += stats.wall_nanos
            c += stats.compared_count
            s += stats.compared_count + stats.pruned_count
        walls.append(w / len(items) / 1e6)
        compared.append(c / len(items))
        slots.append(s / len(items))
    mean_slots = float(np.mean(slots))
    mean_compared = float(np.mean(compared))
    prune = 0.0 if mean_slots == 0 else 1.0 - mean_compared / mean_slots
    return CellResult(scheme, k, spec.d, window, m, spec.distribution, spec.reps,
                      float(np.mean(walls)), mean_compared, prune)


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(spec: SweepSpec) -> list[CellResult]:
    cells = spec.cells()
    if spec.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            return list(pool.map(_run_cell_args, [(spec, *c) for c in cells]))
    return [run_cell(spec, *c) for c in cells]


def write_results(results: Sequence[CellResult], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_HEADER)
        for r in results:
            w.writerow(r.row())


def read_results(path: str | os.PathLike) -> list[CellResult]:
    types = (str, int, int, int, int, str, int, float, float, float)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != RESULT_HEADER:
        raise ValueError(f"unexpected header in {path}: {rows[0]}")
    return [CellResult(*(t(v) for t, v in zip(types, row))) for row in rows[1:]]


def _pivot(results, x_attr, metric):
    schemes = list(dict.fromkeys(r.scheme for r in results))
    xs = sorted({getattr(r, x_attr) for r in results})
    table = {(getattr(r, x_attr), r.scheme): getattr(r, metric) for r in results}
    rows = [[x, *(table.get((x, s), "") for s in schemes)] for x in xs]
    return [x_attr, *schemes], rows


def emit_plotdata(results: Sequence[CellResult], out_dir: str | os.PathLike,
                  metrics: Sequence[str] = ("mean_wall_ms", "mean_compared")) -> list[Path]:
    """One CSV per figure analogue and metric: x = k or window, one column per scheme.

    Centralized runs (m=1) feed the ``fig5``/``fig6`` files, runs at the
    largest m > 1 the ``fig7``/``fig8`` files. A sweep axis with a single
    value is skipped.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    max_m = max((r.m for r in results), default=1)
    groups = {
        "centralized": [r for r in results if r.m == 1],
        "distributed": [r for r in results if r.m == max_m > 1],
    }
    names = {("centralized", "k"): "fig5_k", ("centralized", "window"): "fig6_window",
             ("distributed", "k"): "fig7_k", ("distributed", "window"): "fig8_window"}
    for group, rows in groups.items():
        if not rows:
            continue
        for axis, other in (("k", "window"), ("window", "k")):
            if len({getattr(r, axis) for r in rows}) < 2:
                continue
            # hold the other axis at its most common value
            counts: dict = {}
            for r in rows:
                counts[getattr(r, other)] = counts.get(getattr(r, other), 0) + 1
            fixed = max(sorted(counts), key=lambda v: counts[v])
            sel = [r for r in rows if getattr(r, other) == fixed]
            for metric in metrics:
                header, body = _pivot(sel, axis, metric)
                path = out / f"{names[group, axis]}_{metric}.csv"
                with open(path, "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(header)
                    w.writerows(body)
                written.append(path)
    return written
