from __future__ import annotations

import json

import pytest

from affecta.affect import EngineParams
from affecta.analytics.log import LogParseError, dump_record, parse_log, serialize_log
from affecta.simulator import UserProfile, run_session


@pytest.fixture(scope="module")
def sample_bytes() -> bytes:
    log = run_session(UserProfile(3.0, 120.0, 0.5, 0.1, seed=11), "emotions", 6.0, session_id="s1")
    return serialize_log(log)


def _lines(data: bytes) -> list[str]:
    return data.decode().splitlines()


def _rebuild(lines: list[str]) -> bytes:
    return ("\n".join(lines) + "\n").encode()


def test_simulator_output_parses(sample_bytes):
    log = parse_log(sample_bytes)
    assert log.session_id == "s1"
    assert log.of_kind("attempt")


def test_fixed_point(sample_bytes):
    once = parse_log(sample_bytes)
    again = parse_log(serialize_log(once))
    assert again == once
    assert serialize_log(again) == sample_bytes


def test_timestamp_regression_names_line(sample_bytes):
    lines = _lines(sample_bytes)
    rec = json.loads(lines[5])
    rec["t"] = 0
    prev_t = json.loads(lines[4])["t"]
    assert prev_t > 0
    lines[5] = dump_record(rec)
    with pytest.raises(LogParseError) as err:
        parse_log(_rebuild(lines))
    assert err.value.line == 6
    assert "regression" in err.value.message


def test_truncated_final_line(sample_bytes):
    cut = sample_bytes.rstrip(b"\n")
    cut = cut[: len(cut) - 5]
    with pytest.raises(LogParseError) as err:
        parse_log(cut)
    assert err.value.message == "unterminated record"
    n_lines = len(_lines(cut))
    assert err.value.line == n_lines
    assert err.value.partial is not None
    assert len(err.value.partial.records) == n_lines - 2


def test_orphan_attempt_rejected(sample_bytes):
    lines = _lines(sample_bytes)
    scored = {json.loads(ln).get("round") for ln in lines if json.loads(ln)["kind"] == "attempt"}
    idx = next(
        i for i, ln in enumerate(lines) if json.loads(ln)["kind"] == "listen" and json.loads(ln)["round"] in scored
    )
    del lines[idx]
    with pytest.raises(LogParseError, match="orphan"):
        parse_log(_rebuild(lines))


def test_header_digest_must_match(sample_bytes):
    lines = _lines(sample_bytes)
    header = json.loads(lines[0])
    header["params"]["mood_gain_factor"] = 40.0
    lines[0] = dump_record(header)
    with pytest.raises(LogParseError, match="digest"):
        parse_log(_rebuild(lines))


@pytest.mark.parametrize(
    "mutation",
    [
        lambda r: r.update(kind="bogus"),
        lambda r: r.pop("t"),
        lambda r: r.update(t=-1),
        lambda r: r.update(t=True),
    ],
)
def test_schema_violations(sample_bytes, mutation):
    lines = _lines(sample_bytes)
    rec = json.loads(lines[1])
    mutation(rec)
    lines[1] = dump_record(rec)
    with pytest.raises(LogParseError) as err:
        parse_log(_rebuild(lines))
    assert err.value.line == 2


def test_attempt_accuracy_must_match_notes(sample_bytes):
    lines = _lines(sample_bytes)
    idx = next(i for i, ln in enumerate(lines) if json.loads(ln)["kind"] == "attempt")
    rec = json.loads(lines[idx])
    rec["accuracy"] = 0.5
    lines[idx] = dump_record(rec)
    with pytest.raises(LogParseError, match="accuracy"):
        parse_log(_rebuild(lines))


def test_feedback_needs_one_payload(sample_bytes):
    lines = _lines(sample_bytes)
    idx = next(i for i, ln in enumerate(lines) if json.loads(ln)["kind"] == "feedback")
    rec = json.loads(lines[idx])
    rec["coin"] = {"points": 1000, "animation": "coin-spin"}
    lines[idx] = dump_record(rec)
    with pytest.raises(LogParseError, match="exactly one"):
        parse_log(_rebuild(lines))


def test_empty_and_headerless():
    with pytest.raises(LogParseError):
        parse_log(b"")
    with pytest.raises(LogParseError, match="header"):
        parse_log(b'{"kind":"tick","t":0}\n')


def test_params_are_engine_params(sample_bytes):
    header = parse_log(sample_bytes).header
    assert EngineParams(**header["params"]) == EngineParams()
