import csv
import io
from pathlib import Path

import pytest

from mcmesh.cli import main
from mcmesh.report import SUMMARY_FIELDS, fmt, results_csv, run_reps, summary_csv
from mcmesh.config import load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
CHAIN = str(SCENARIOS / "chain3_2ch.yaml")

# Two orthogonal channels with 30 cm antenna spacing keep the full 5 GHz UDP
# baseline; latency is two hops of 0.9 ms plus the 1 ms full-stack overhead.
GOLDEN_RESULTS = """\
scenario,rep,flow,protocol,mbps,latency_ms,switches
chain3_2ch,0,0->2,udp,9.930000,2.800000,0
chain3_2ch,1,0->2,udp,9.930000,2.800000,0
"""
GOLDEN_SUMMARY = """\
scenario,flow,protocol,reps,mbps_mean,mbps_std,latency_ms_mean,latency_ms_std,switches_mean
chain3_2ch,0->2,udp,2,9.930000,0.000000,2.800000,0.000000,0.000000
"""


def test_run_writes_golden_csv(tmp_path, capsys):
    assert main(["run", CHAIN, "--reps", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "results.csv").read_text() == GOLDEN_RESULTS
    assert (tmp_path / "summary.csv").read_text() == GOLDEN_SUMMARY
    assert "9.9300 Mbps" in capsys.readouterr().out


def test_run_default_reps_from_file(tmp_path):
    assert main(["run", CHAIN, "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "results.csv").read_text())))
    assert len(rows) == 10
    assert [r["rep"] for r in rows] == [str(k) for k in range(10)]


def test_run_is_byte_identical_across_invocations(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = str(SCENARIOS / "negotiation_b24.yaml")
    assert main(["run", cfg, "--out", str(a), "--trace"]) == 0
    assert main(["run", cfg, "--out", str(b), "--trace", "--workers", "1"]) == 0
    for name in ("results.csv", "summary.csv", "trace_rep0.jsonl", "trace_rep1.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_dry_run_prints_config_without_simulating(tmp_path, capsys):
    assert main(["run", CHAIN, "--dry-run", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "scenario: chain3_2ch" in out
    assert not (tmp_path / "results.csv").exists()


def test_missing_file_exits_2(capsys):
    assert main(["run", "/nonexistent.yaml"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("band: b24\ntopology: {chain: {n: 2, channels: [14]}}\n")
    assert main(["run", str(bad)]) == 2
    assert "bad.yaml:" in capsys.readouterr().err


def test_bad_reps_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["run", CHAIN, "--reps", "0"])
    assert info.value.code == 2


def test_reproduce_table_passes(capsys):
    assert main(["reproduce", "6.5"]) == 0
    out = capsys.readouterr().out
    assert "model=  2.4825" in out and "PASS" in out


def test_reproduce_two_channel_chain(capsys):
    assert main(["reproduce", "6.10"]) == 0


def test_reproduce_unknown_table_exits_2(capsys):
    assert main(["reproduce", "9.9"]) == 2
    assert "unknown table id" in capsys.readouterr().err


def test_reproduce_tolerance_override_fails_tight_check(capsys):
    assert main(["reproduce", "6.5", "--tolerance", "0.1"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_tables_lists_ids(capsys):
    assert main(["tables"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("6.1 ")


@pytest.mark.parametrize("kind, band, first", [
    ("orthogonality", "b5", "channel,separation_mhz,mbps"),
    ("coupling", "b24", "distance_cm,mbps,ratio"),
])
def test_sweep_writes_csv(tmp_path, kind, band, first):
    assert main(["sweep", kind, "--band", band, "--out", str(tmp_path)]) == 0
    files = list(tmp_path.glob("*.csv"))
    assert len(files) == 1
    lines = files[0].read_text().splitlines()
    assert lines[0] == first and len(lines) > 3


def test_orthogonality_sweep_b5_is_non_decreasing(tmp_path):
    main(["sweep", "orthogonality", "--band", "b5", "--out", str(tmp_path)])
    rows = list(csv.DictReader(open(next(tmp_path.glob("*.csv")))))
    values = [float(r["mbps"]) for r in rows if 20 <= int(r["separation_mhz"]) <= 120]
    assert values == sorted(values)


def test_coupling_sweep_b24_crosses_threshold_at_25cm(tmp_path):
    main(["sweep", "coupling", "--band", "b24", "--out", str(tmp_path)])
    rows = {float(r["distance_cm"]): float(r["ratio"])
            for r in csv.DictReader(open(next(tmp_path.glob("*.csv"))))}
    assert rows[20] < 0.9 <= rows[25]


# -- report helpers -------------------------------------------------------------------------


def test_fmt():
    assert fmt(1.0) == "1.000000"
    assert fmt(float("nan")) == "nan"


def test_summary_statistics():
    runs = run_reps(load_scenario(SCENARIOS / "negotiation_b24.yaml"), reps=3)
    assert [r.seed for r in runs] == [3, 4, 5]
    rows = list(csv.DictReader(io.StringIO(summary_csv(runs))))
    assert list(rows[0]) == list(SUMMARY_FIELDS)
    assert rows[0]["reps"] == "3"
    assert len(results_csv(runs).splitlines()) == 4
