"""CSV output for run statistics.

``results.csv``: one row per repetition per flow::

    scenario,rep,flow,protocol,mbps,latency_ms,switches

``summary.csv``: one row per flow::

    scenario,flow,protocol,reps,mbps_mean,mbps_std,latency_ms_mean,latency_ms_std,switches_mean

Floats are written with six decimals so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .sim import RunStats, Scenario, run

RESULT_FIELDS = ("scenario", "rep", "flow", "protocol", "mbps", "latency_ms", "switches")
SUMMARY_FIELDS = ("scenario", "flow", "protocol", "reps", "mbps_mean", "mbps_std",
                  "latency_ms_mean", "latency_ms_std", "switches_mean")


def fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.6f}"


def run_reps(scenario: Scenario, reps: int | None = None, seed: int | None = None,
             trace: bool = False, workers: int = 4) -> list[RunStats]:
    """Run ``reps`` repetitions with seeds ``seed, seed+1, ...`` in worker threads."""
    reps = scenario.reps if reps is None else reps
    base = scenario.seed if seed is None else seed
    scenario = replace(scenario, reps=reps)
    seeds = [base + k for k in range(reps)]
    if workers <= 1 or reps == 1:
        return [run(scenario, seed=s, trace=trace) for s in seeds]
    with ThreadPoolExecutor(max_workers=min(workers, reps)) as pool:
        return list(pool.map(lambda s: run(scenario, seed=s, trace=trace), seeds))


def result_rows(runs: Sequence[RunStats]) -> list[list[str]]:
    rows = []
    for rep, st in enumerate(runs):
        for fr in st.flows:
            rows.append([st.scenario, str(rep), fr.flow.label, fr.flow.protocol.value,
                         fmt(fr.mbps), fmt(fr.latency_ms), str(fr.switches)])
    return rows


def summary_rows(runs: Sequence[RunStats]) -> list[list[str]]:
    if not runs:
        return []
    rows = []
    for i, fr0 in enumerate(runs[0].flows):
        mbps = [st.flows[i].mbps for st in runs]
        lat = [st.flows[i].latency_ms for st in runs]
        sw = [st.flows[i].switches for st in runs]
        std = (lambda xs: statistics.stdev(xs) if len(xs) > 1 else 0.0)
        rows.append([runs[0].scenario, fr0.flow.label, fr0.flow.protocol.value, str(len(runs)),
                     fmt(statistics.fmean(mbps)), fmt(std(mbps)),
                     fmt(statistics.fmean(lat)), fmt(std(lat)), fmt(statistics.fmean(sw))])
    return rows


def to_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def results_csv(runs: Sequence[RunStats]) -> str:
    return to_csv(RESULT_FIELDS, result_rows(runs))


def summary_csv(runs: Sequence[RunStats]) -> str:
    return to_csv(SUMMARY_FIELDS, summary_rows(runs))


def write_outputs(runs: Sequence[RunStats], out_dir: str | Path, trace: bool = False) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "results.csv", out / "summary.csv"]
    written[0].write_text(results_csv(runs))
    written[1].write_text(summary_csv(runs))
    if trace:
        for rep, st in enumerate(runs):
            p = out / f"trace_rep{rep}.jsonl"
            p.write_text("".join(line + "\n" for line in st.trace))
            written.append(p)
    return written
