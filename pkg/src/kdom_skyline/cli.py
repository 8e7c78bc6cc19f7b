"""``kdom`` command line: generate streams, run one engine, sweep parameters.

Settings resolve as built-in defaults < ``--config`` file (``key=value``
lines) < command-line flags < ``KDOM_<KEY>`` environment variables.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bench import DISTRIBUTIONS, SweepSpec, emit_plotdata, generate_stream, run_sweep, write_results
from .core import ConfigError, UsageError, read_items, write_items
from .distributed import Cluster, ClusterError
from .engine import SCHEMES, EngineConfig, StatsWriter, StreamEngine

DEFAULTS = {
    "scheme": "mi",
    "k": "11",
    "dim": "12",
    "window": "500",
    "items": "10000",
    "nodes": "1",
    "dist": "uniform",
    "seed": "0",
    "reps": "10",
    "tau": "0.0",
    "mi_pos": "",
    "out": "",
    "input": "",
    "jobs": "1",
}
ENV_PREFIX = "KDOM_"


def load_config_file(path: str | os.PathLike) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key=value, got {raw!r}")
        key = key.strip().lower().replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = val.strip()
    return out


def resolve_settings(args: argparse.Namespace, environ=None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(load_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = str(val)
    for key in DEFAULTS:
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            settings[key] = env
    return settings


def parse_int_list(text: str) -> list[int]:
    """``"7,8,9"`` or ``"7-11"`` or a mix like ``"100-300:100,500"``."""
    out = []
    try:
        for part in filter(None, (p.strip() for p in text.split(","))):
            rng, _, step = part.partition(":")
            if "-" in rng:
                lo, hi = rng.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
            else:
                out.append(int(rng))
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None
    if not out:
        raise ConfigError(f"empty integer list {text!r}")
    return out


def _int(settings, key) -> int:
    try:
        return int(settings[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {settings[key]!r}") from None


def _mi_pos(settings) -> int | None:
    return int(settings["mi_pos"]) if settings["mi_pos"] != "" else None


def cmd_generate(settings) -> int:
    items = generate_stream(_int(settings, "items"), _int(settings, "dim"), settings["dist"],
                            seed=_int(settings, "seed"))
    if settings["out"]:
        with open(settings["out"], "w") as fh:
            write_items(items, fh)
    else:
        write_items(items, sys.stdout)
    return 0


def cmd_run(settings) -> int:
    d = _int(settings, "dim")
    cfg = EngineConfig(d, _int(settings, "k"), _int(settings, "window"), scheme=settings["scheme"],
                       u_min_pos=_mi_pos(settings), tau=float(settings["tau"]), seed=_int(settings, "seed"))
    if settings["input"]:
        with open(settings["input"]) as fh:
            items = list(read_items(fh, d))
    else:
        items = generate_stream(_int(settings, "items"), d, settings["dist"], seed=_int(settings, "seed"))
    m = _int(settings, "nodes")
    runner = StreamEngine(cfg) if m == 1 else Cluster(cfg, m)
    out_fh = open(settings["out"], "w", newline="") if settings["out"] else None
    try:
        writer = StatsWriter(out_fh) if out_fh else None
        for stats in runner.run(items):
            if writer:
                writer.write(stats)
    finally:
        if out_fh:
            out_fh.close()
    print("item_id,ksky_prob")
    for item_id, p in runner.query_skyline(cfg.tau):
        print(f"{item_id},{p!r}")
    return 0


def cmd_sweep(settings) -> int:
    spec = SweepSpec(
        schemes=[s.strip() for s in settings["scheme"].split(",") if s.strip()],
        ks=parse_int_list(settings["k"]),
        windows=parse_int_list(settings["window"]),
        d=_int(settings, "dim"),
        items=_int(settings, "items"),
        nodes=parse_int_list(settings["nodes"]),
        distribution=settings["dist"],
        seed=_int(settings, "seed"),
        reps=_int(settings, "reps"),
        u_min_pos=_mi_pos(settings),
        jobs=_int(settings, "jobs"),
    )
    out = Path(settings["out"] or "sweep_out")
    out.mkdir(parents=True, exist_ok=True)
    results = run_sweep(spec)
    write_results(results, out / "results.csv")
    emit_plotdata(results, out / "plotdata")
    print(f"wrote {len(results)} rows to {out / 'results.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kdom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value settings file")
        sp.add_argument("--scheme", help=f"one of {', '.join(SCHEMES)} (sweep: comma list)")
        sp.add_argument("--k", help="k (sweep: list such as 7-11)")
        sp.add_argument("--dim", help="dimensionality d")
        sp.add_argument("--window", help="window capacity (sweep: list such as 100-1000:100)")
        sp.add_argument("--items", help="number of generated items")
        sp.add_argument("--nodes", help="worker count m (sweep: list)")
        sp.add_argument("--dist", choices=DISTRIBUTIONS)
        sp.add_argument("--seed")
        sp.add_argument("--reps", help="repetitions per sweep cell")
        sp.add_argument("--tau", help="skyline probability threshold")
        sp.add_argument("--mi-pos", dest="mi_pos", help="MI threshold position u_min in 0..k-1")
        sp.add_argument("--out", help="output file or directory")

    common(sub.add_parser("generate", help="write a synthetic stream in the item line format"))
    run = sub.add_parser("run", help="stream items through one engine; stats CSV to --out")
    common(run)
    run.add_argument("--input", help="item file (id,values...,prob per line)")
    sweep = sub.add_parser("sweep", help="parameter sweep; results.csv and plotdata/ under --out")
    common(sweep)
    sweep.add_argument("--jobs", help="parallel sweep cells")
    return p


def main(argv=None, environ=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args, environ)
        handler = {"generate": cmd_generate, "run": cmd_run, "sweep": cmd_sweep}[args.command]
        return handler(settings)
    except (ConfigError, UsageError, ClusterError, OSError, ValueError) as exc:
        print(f"kdom: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
