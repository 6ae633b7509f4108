"""Command-line harness: ``mcmesh run | reproduce | sweep | tables``.

Exit codes: 0 ok, 1 tolerance failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, describe, load_scenario
from .core import Band, TopologyError
from .radio import Protocol
from .report import run_reps, write_outputs
from .sim import ScenarioError

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE = 0, 1, 2


def cmd_run(args: argparse.Namespace) -> int:
    try:
        sc = load_scenario(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.dry_run:
        print(describe(sc))
        return EXIT_OK
    try:
        runs = run_reps(sc, reps=args.reps, seed=args.seed, trace=args.trace, workers=args.workers)
    except (ScenarioError, TopologyError) as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    for p in write_outputs(runs, out, trace=args.trace):
        print(f"wrote {p}")
    for fr in runs[0].flows:
        print(f"{fr.flow.label} {fr.flow.protocol.value}: {fr.mbps:.4f} Mbps, {fr.latency_ms:.3f} ms")
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    from . import scenarios

    target = args.table
    if target == "acceptance":
        from .acceptance import run_all

        results = run_all()
        for r in results:
            print(r.line())
        failed = sum(not r.passed for r in results)
        print(f"{len(results) - failed}/{len(results)} criteria passed")
        return EXIT_OK if failed == 0 else EXIT_TOLERANCE
    if target == "all":
        ids = scenarios.table_ids()
    elif target in scenarios.TABLES:
        ids = [target]
    else:
        print(f"error: unknown table id {target!r}; known: {', '.join(scenarios.table_ids())}, all, acceptance",
              file=sys.stderr)
        return EXIT_USAGE
    failed = 0
    for tid in ids:
        table = scenarios.TABLES[tid]
        print(f"Table {tid}: {table.title}")
        for check in table.checks:
            res = check.evaluate(args.tolerance)
            failed += not res.passed
            print("  " + res.line())
    return EXIT_OK if failed == 0 else EXIT_TOLERANCE


def cmd_sweep(args: argparse.Namespace) -> int:
    from .scenarios import sweep_coupling, sweep_orthogonality

    band = Band.parse(args.band)
    proto = Protocol.parse(args.protocol) if args.protocol else (
        Protocol.UDP if args.kind == "orthogonality" else Protocol.TCP)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.kind}_{band.value}_{proto.value}"
    if args.kind == "orthogonality":
        header = ("channel", "separation_mhz", "mbps")
        rows = [(c, s, f"{v:.6f}") for c, s, v in sweep_orthogonality(band, proto)]
        xy = [(float(r[1]), float(r[2])) for r in rows]
        xlabel = "channel separation (MHz)"
    else:
        header = ("distance_cm", "mbps", "ratio")
        rows = [(f"{d:g}", f"{v:.6f}", f"{r:.6f}") for d, v, r in sweep_coupling(band, proto)]
        xy = [(float(r[0]), float(r[1])) for r in rows]
        xlabel = "relay antenna distance (cm)"
    csv_path = out / f"{stem}.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {csv_path}")
    for r in rows:
        print("  " + "  ".join(str(x) for x in r))
    png = _plot(xy, xlabel, f"{args.kind} sweep, {band.value}, {proto.value}", out / f"{stem}.png")
    if png:
        print(f"wrote {png}")
    return EXIT_OK


def _plot(xy: Sequence[tuple[float, float]], xlabel: str, title: str, path: Path) -> Path | None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logging.getLogger(__name__).info("matplotlib not installed; skipping plot")
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([p[0] for p in xy], [p[1] for p in xy], marker="o")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("throughput (Mbps)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def cmd_tables(args: argparse.Namespace) -> int:
    from .scenarios import TABLES, table_ids

    for tid in table_ids():
        print(f"{tid:<6} {TABLES[tid].title}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcmesh", description="Multi-channel wireless mesh simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--reps", type=int, default=None)
    r.add_argument("--out", default="out")
    r.add_argument("--trace", action="store_true", help="write a JSON-lines event trace per repetition")
    r.add_argument("--dry-run", action="store_true", help="validate and print the resolved config")
    r.add_argument("--workers", type=int, default=4)
    r.set_defaults(func=cmd_run)

    q = sub.add_parser("reproduce", help="compare a built-in table with the model")
    q.add_argument("table", help="table id such as 6.5, 'all', or 'acceptance'")
    q.add_argument("--tolerance", type=float, default=None, metavar="PCT",
                   help="override every check's tolerance (percent)")
    q.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("sweep", help="orthogonality or antenna coupling sweep")
    s.add_argument("kind", choices=("orthogonality", "coupling"))
    s.add_argument("--band", required=True, choices=("b24", "b5"))
    s.add_argument("--protocol", choices=("tcp", "udp"), default=None)
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("tables", help="list built-in table ids")
    t.set_defaults(func=cmd_tables)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "reps", None) is not None and args.reps < 1:
        parser.error("--reps must be >= 1")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
