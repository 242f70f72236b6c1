from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

import pytest

from affecta.cli import main

GOLDEN = Path(__file__).parent / "golden"


def _rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def sim_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("sim")
    dirs = {}
    for name in ("paper-points", "paper-emotions"):
        out = root / name
        assert main(["sim", "--scenario", name, "--seed", "42", "-o", str(out), "--duration", "12"]) == 0
        dirs[name] = out
    return dirs


def test_sim_writes_logs_and_manifest(sim_dirs):
    out = sim_dirs["paper-points"]
    logs = sorted(out.glob("*.jsonl"))
    assert len(logs) == 7
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 42 and manifest["condition"] == "points"
    assert [s["file"] for s in manifest["sessions"]] == [p.name for p in logs]


def test_sim_parallel_is_identical(sim_dirs, tmp_path):
    out = tmp_path / "par"
    assert main(["sim", "--scenario", "paper-points", "-o", str(out), "--duration", "12", "--jobs", "2"]) == 0
    for p in sim_dirs["paper-points"].glob("*.jsonl"):
        assert (out / p.name).read_bytes() == p.read_bytes()


def test_sim_unknown_scenario(tmp_path, capsys):
    assert main(["sim", "--scenario", "paper-banana", "-o", str(tmp_path / "x")]) != 0
    err = capsys.readouterr().err
    assert "paper-points" in err and "paper-emotions" in err


def test_sim_bad_params(tmp_path, capsys):
    assert main(["sim", "--scenario", "paper-points", "-o", str(tmp_path), "--params", "colour=red"]) != 0
    assert "colour" in capsys.readouterr().err


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_sim_unwritable_dir(tmp_path):
    out = tmp_path / "ro"
    out.mkdir()
    out.chmod(0o500)
    try:
        assert main(["sim", "--scenario", "paper-points", "-o", str(out), "--duration", "1"]) != 0
        assert not (out / "manifest.json").exists()
    finally:
        out.chmod(0o700)


def test_sim_output_path_is_a_file(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["sim", "--scenario", "paper-points", "-o", str(blocker / "sub"), "--duration", "1"]) != 0
    assert not (blocker.parent / "sub").exists()


def test_analyze_two_cohorts(sim_dirs, tmp_path, capsys):
    out = tmp_path / "report"
    code = main(["analyze", str(sim_dirs["paper-points"]), str(sim_dirs["paper-emotions"]), "-o", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "Between-condition tests" in text and "0-5 min" in text
    summary = json.loads((out / "summary.json").read_text())
    assert summary["statistics"]["task_accuracy"]["p_value"] < 0.05
    assert (out / "windows.csv").read_text().startswith("condition,window")


def test_analyze_single_log(sim_dirs, capsys):
    log = next(sim_dirs["paper-points"].glob("*.jsonl"))
    assert main(["analyze", str(log)]) == 0
    assert "not applicable" in capsys.readouterr().out


def test_analyze_csv_format_and_windows(sim_dirs, capsys):
    assert main(["analyze", str(sim_dirs["paper-points"]), "--format", "csv", "--windows", "0,6"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["window"] for r in rows] == ["0-6 min", "6+ min"]


def test_analyze_corrupted_log(sim_dirs, tmp_path, capsys):
    src = next(sim_dirs["paper-points"].glob("*.jsonl"))
    lines = src.read_text().splitlines(keepends=True)
    lines[3] = "{not json\n"
    bad = tmp_path / "bad.jsonl"
    bad.write_text("".join(lines))
    assert main(["analyze", str(bad)]) != 0
    assert f"{bad}:4:" in capsys.readouterr().err


def test_trace_empty_script(tmp_path, capsys):
    script = tmp_path / "empty.txt"
    script.write_text("")
    assert main(["trace", str(script)]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 60
    moods = [float(r["mood"]) for r in rows]
    assert all(b < a for a, b in zip(moods, moods[1:]))


def test_trace_single_interaction(tmp_path, capsys):
    script = tmp_path / "one.txt"
    script.write_text("1000\n")
    assert main(["trace", str(script)]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0]["event"] == "interaction"
    assert float(rows[0]["mood"]) == pytest.approx(87.4899, abs=1e-9)


@pytest.mark.parametrize("content", ["2000\n1000\n", "abc\n", "5 squeeze\n", "-4\n"])
def test_trace_bad_script(tmp_path, capsys, content):
    script = tmp_path / "bad.txt"
    script.write_text(content)
    assert main(["trace", str(script)]) != 0
    assert "bad.txt" in capsys.readouterr().err


def test_trace_golden_is_byte_stable(tmp_path):
    out = tmp_path / "trace.csv"
    assert main(["trace", str(GOLDEN / "trace_reference.txt"), "-o", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "trace_reference.csv").read_bytes()
