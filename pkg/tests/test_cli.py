import json

import jsonschema
import pytest

from threehalves import selftest
from threehalves.checkpoint import Checkpoint
from threehalves.cli import main
from threehalves.histogram import Histogram
from threehalves.orchestrator import RunConfig, run_segment

HISTOGRAM_SCHEMA = {
    "type": "object",
    "required": ["k", "total", "j_start", "j_end", "counts"],
    "additionalProperties": False,
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "total": {"type": "integer", "minimum": 0},
        "j_start": {"type": "integer", "minimum": 1},
        "j_end": {"type": "integer", "minimum": 1},
        "counts": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    },
}

ANALYSIS_SCHEMA = {
    "type": "object",
    "required": ["n", "r", "tau", "df", "p_value", "method", "b_star", "rho_star", "posterior_lb", "psi0"],
    "properties": {
        "p_value": {"type": "number", "minimum": 0, "maximum": 1},
        "method": {"enum": ["exact-gamma", "wilson-hilferty"]},
        "b_finite": {"type": "number"},
        "c_star": {"type": "number"},
    },
}

TABLE_FIRST_12 = [512, 256, 384, 64, 608, 400, 88, 644, 454, 681, 509, 764]


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "729" in out and "1011011001" in out


def test_selftest_detects_corrupted_constant(monkeypatch, capsys):
    monkeypatch.setitem(selftest.TABLE_BINS, 7, 89)
    assert main(["selftest"]) == 3
    assert "FAIL" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert_exit(["run", "--n", "0", "--bins-log2", "10"], 1)
    assert_exit(["run", "--n", "10", "--bins-log2", "0"], 1)
    assert_exit(["run", "--n", "10", "--bins-log2", "10", "--psi0", "1.5"], 1)
    assert_exit(["frobnicate"], 1)


def assert_exit(argv, code):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == code


def test_run_table(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--n", "40", "--bins-log2", "10", "--out", str(out)]) == 0
    h = Histogram.from_csv((out / "histogram.csv").read_text())
    assert h.total == 40
    assert all(h.counts[b] >= 1 for b in TABLE_FIRST_12 + [901, 328])
    analysis = json.loads((out / "analysis.json").read_text())
    jsonschema.validate(analysis, ANALYSIS_SCHEMA)
    runtime = json.loads((out / "runtime.json").read_text())
    assert runtime["n"] == 40 and runtime["elapsed_seconds"] > 0
    assert "quadratic_coefficient" in runtime
    monitors = json.loads((out / "monitors.json").read_text())
    assert monitors["waring_candidates"] == []


def test_run_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--n", "500", "--bins-log2", "6", "--out", str(d)]) == 0
    assert (a / "histogram.csv").read_bytes() == (b / "histogram.csv").read_bytes()
    assert json.loads((a / "analysis.json").read_text()) == json.loads((b / "analysis.json").read_text())


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("THREEHALVES_OUT", str(tmp_path / "env"))
    assert main(["run", "--n", "20", "--bins-log2", "4"]) == 0
    assert (tmp_path / "env" / "analysis.json").exists()


def test_export_csv_round_trip(tmp_path):
    ck = tmp_path / "s.ckpt"
    res = run_segment(RunConfig(n_total=300, k=5), 1, 301, ck)
    out = tmp_path / "h.csv"
    assert main(["export", "--checkpoint", str(ck), "--format", "csv", "--output", str(out)]) == 0
    assert Histogram.from_csv(out.read_text()) == res.histogram


def test_export_json_schema(tmp_path, capsys):
    ck = tmp_path / "s.ckpt"
    run_segment(RunConfig(n_total=300, k=5), 1, 301, ck)
    assert main(["export", "--checkpoint", str(ck), "--format", "json"]) == 0
    jsonschema.validate(json.loads(capsys.readouterr().out), HISTOGRAM_SCHEMA)
    assert main(["export", "--checkpoint", str(ck), "--format", "json", "--analysis"]) == 0
    jsonschema.validate(json.loads(capsys.readouterr().out), ANALYSIS_SCHEMA)


def test_export_merged_equals_single(tmp_path):
    multi, single = tmp_path / "multi", tmp_path / "single"
    assert main(["run", "--n", "2000", "--bins-log2", "6", "--workers", "3", "--out", str(multi)]) == 0
    assert main(["run", "--n", "2000", "--bins-log2", "6", "--out", str(single)]) == 0
    assert (multi / "histogram.csv").read_bytes() == (single / "histogram.csv").read_bytes()
    merged = tmp_path / "merged"
    ckpts = sorted(str(p) for p in (multi / "checkpoints").glob("*.ckpt"))
    assert len(ckpts) == 3
    assert main(["merge", *ckpts, "--out", str(merged)]) == 0
    assert (merged / "histogram.csv").read_bytes() == (single / "histogram.csv").read_bytes()


def test_export_unreadable_input(tmp_path, capsys):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"PW32garbage")
    assert main(["export", "--checkpoint", str(bad), "--format", "csv"]) == 2
    assert main(["export", "--checkpoint", str(tmp_path / "missing"), "--format", "csv"]) == 2


def test_analyze_command(tmp_path, capsys):
    hj = tmp_path / "h.json"
    hj.write_text(Histogram(2, [5, 5, 5, 5], 1, 21).to_json())
    assert main(["analyze", str(hj), "--out", str(tmp_path)]) == 0
    analysis = json.loads((tmp_path / "analysis.json").read_text())
    assert analysis["tau"] == 0 and analysis["posterior_lb"] == 0.5


def test_resume_command(tmp_path):
    out = tmp_path / "run"
    ckdir = out / "checkpoints"
    ckdir.mkdir(parents=True)
    cfg = RunConfig(n_total=600, k=5, checkpoint_interval=100)

    class Stop(Exception):
        pass

    def hook(ck):
        if ck.exponent == 301:
            raise Stop

    with pytest.raises(Stop):
        run_segment(cfg, 1, 601, ckdir / "segment.ckpt", on_checkpoint=hook)
    assert not Checkpoint.load(ckdir / "segment.ckpt").done
    assert main(["resume", "--out", str(out), "--bins-log2", "6"]) == 2
    assert main(["resume", "--out", str(out), "--bins-log2", "5"]) == 0
    expected = run_segment(cfg, 1, 601).histogram
    assert Histogram.from_json((out / "histogram.json").read_text()) == expected


def test_resume_without_checkpoints(tmp_path):
    assert main(["resume", "--out", str(tmp_path)]) == 1
