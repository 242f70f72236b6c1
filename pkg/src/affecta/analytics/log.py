"""Session logs: one JSON object per line, header first.

Field names and enum spellings are documented in ``docs/session_log.md``.
Parsing is strict; any violation raises :class:`LogParseError` carrying the
1-based line number and the valid prefix read so far.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..affect import EngineParams, params_digest

__all__ = [
    "CONDITIONS",
    "RECORD_KINDS",
    "SCHEMA_ID",
    "LogParseError",
    "SessionLog",
    "dump_record",
    "parse_log",
    "read_log",
    "serialize_log",
    "write_log",
]

SCHEMA_ID = "affecta.session/1"
CONDITIONS = ("emotions", "points")

Record = dict[str, Any]

_HEADER_FIELDS: dict[str, type | tuple[type, ...]] = {
    "kind": str,
    "schema": str,
    "session_id": str,
    "condition": str,
    "seed": int,
    "start_ms": int,
    "duration_ms": int,
    "params": dict,
    "params_digest": str,
}

_NUM = (int, float)

# kind -> required fields besides "t" and "kind"
RECORD_KINDS: dict[str, dict[str, type | tuple[type, ...]]] = {
    "grasp": {"frame": list},
    "release": {"frame": list},
    "round_start": {"round": int, "onsets": list, "note_ms": int},
    "vibration": {"round": int, "note": int, "start_ms": int, "duration_ms": int},
    "star": {"round": int, "note": int, "start_ms": int},
    "listen": {"round": int},
    "squeeze": {},
    "attempt": {"round": int, "accuracy": _NUM, "matched": list, "squeezes": list},
    "abort": {"round": int, "reason": str},
    "feedback": {},
    "tick": {"mood": _NUM, "decay_rate": _NUM, "impact": _NUM},
}


class LogParseError(ValueError):
    def __init__(self, line: int, message: str, partial: SessionLog | None = None) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message
        self.partial = partial


@dataclass
class SessionLog:
    header: Record
    records: list[Record] = field(default_factory=list)

    @property
    def session_id(self) -> str:
        return self.header["session_id"]

    @property
    def condition(self) -> str:
        return self.header["condition"]

    @property
    def duration_ms(self) -> int:
        return self.header["duration_ms"]

    @property
    def start_ms(self) -> int:
        return self.header["start_ms"]

    def of_kind(self, kind: str) -> list[Record]:
        return [r for r in self.records if r["kind"] == kind]


def dump_record(record: Record) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def serialize_log(log: SessionLog) -> bytes:
    lines = [dump_record(log.header), *(dump_record(r) for r in log.records)]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _is(value: Any, kind: type | tuple[type, ...]) -> bool:
    # bool is an int subclass; never accept it where a number is expected
    if isinstance(value, bool):
        return kind is bool or (isinstance(kind, tuple) and bool in kind)
    return isinstance(value, kind)


def _check_fields(obj: Record, spec: dict[str, type | tuple[type, ...]], what: str) -> str | None:
    for name, kind in spec.items():
        if name not in obj:
            return f"{what} missing field {name!r}"
        if not _is(obj[name], kind):
            return f"{what} field {name!r} has wrong type {type(obj[name]).__name__}"
    return None


def _check_header(header: Record) -> str | None:
    problem = _check_fields(header, _HEADER_FIELDS, "header")
    if problem:
        return problem
    if header["kind"] != "header":
        return "first record must be the header"
    if header["schema"] != SCHEMA_ID:
        return f"unsupported schema {header['schema']!r}"
    if header["condition"] not in CONDITIONS:
        return f"unknown condition {header['condition']!r}"
    if header["duration_ms"] <= 0:
        return "duration_ms must be positive"
    try:
        params = EngineParams(**header["params"])
    except (TypeError, ValueError) as exc:
        return f"invalid engine params: {exc}"
    if params_digest(params) != header["params_digest"]:
        return "params_digest does not match params"
    return None


def _check_feedback(rec: Record) -> str | None:
    face, coin = rec.get("face"), rec.get("coin")
    if (face is None) == (coin is None):
        return "feedback needs exactly one of 'face' or 'coin'"
    if face is not None:
        if not isinstance(face, dict):
            return "feedback face must be an object"
        return _check_fields(face, {"mood": _NUM, "eyebrow_angle": _NUM, "eye_curvature": _NUM}, "face")
    if not isinstance(coin, dict):
        return "feedback coin must be an object"
    problem = _check_fields(coin, {"points": int, "animation": str}, "coin")
    if problem is None and coin["points"] <= 0:
        return "coin points must be positive"
    return problem


class _Validator:
    """Tracks round lifecycles so attempts can be checked against them."""

    def __init__(self) -> None:
        self.last_t: int | None = None
        self.rounds: dict[int, str] = {}  # round id -> "started" | "listening" | "closed"

    def check(self, rec: Record) -> str | None:
        kind = rec.get("kind")
        if kind not in RECORD_KINDS:
            return f"unknown record kind {kind!r}"
        t = rec.get("t")
        if not _is(t, int) or t < 0:
            return "record needs a non-negative integer 't'"
        if self.last_t is not None and t < self.last_t:
            return f"timestamp regression: {t} < {self.last_t}"
        problem = _check_fields(rec, RECORD_KINDS[kind], kind)
        if problem:
            return problem
        problem = getattr(self, f"_check_{kind}", lambda r: None)(rec)
        if problem:
            return problem
        self.last_t = t
        return None

    def _check_grasp(self, rec: Record) -> str | None:
        frame = rec["frame"]
        if len(frame) != 5 or not all(isinstance(x, bool) for x in frame):
            return "frame must be a list of 5 booleans"
        return None

    _check_release = _check_grasp

    def _check_round_start(self, rec: Record) -> str | None:
        rid = rec["round"]
        if rid in self.rounds:
            return f"round {rid} started twice"
        onsets = rec["onsets"]
        if len(onsets) != 3 or not all(_is(x, int) for x in onsets) or not onsets[0] < onsets[1] < onsets[2]:
            return "onsets must be three increasing integers"
        self.rounds[rid] = "started"
        return None

    def _check_listen(self, rec: Record) -> str | None:
        if self.rounds.get(rec["round"]) != "started":
            return f"listen for round {rec['round']} without a prompting round"
        self.rounds[rec["round"]] = "listening"
        return None

    def _check_attempt(self, rec: Record) -> str | None:
        rid = rec["round"]
        if self.rounds.get(rid) != "listening":
            return f"orphan attempt: round {rid} has no open prompt/listen lifecycle"
        matched = rec["matched"]
        if len(matched) != 3 or not all(isinstance(m, bool) for m in matched):
            return "matched must be a list of 3 booleans"
        if rec["accuracy"] != sum(matched) / 3:
            return "accuracy disagrees with matched notes"
        if not all(_is(s, int) for s in rec["squeezes"]):
            return "squeezes must be integers"
        self.rounds[rid] = "closed"
        return None

    def _check_abort(self, rec: Record) -> str | None:
        rid = rec["round"]
        if self.rounds.get(rid) not in ("started", "listening"):
            return f"abort for round {rid} that is not running"
        self.rounds[rid] = "closed"
        return None

    def _check_vibration(self, rec: Record) -> str | None:
        if rec["round"] not in self.rounds or not 0 <= rec["note"] <= 2:
            return "vibration must reference a started round and a note in 0..2"
        return None

    _check_star = _check_vibration

    def _check_feedback(self, rec: Record) -> str | None:
        return _check_feedback(rec)


def parse_log(data: bytes | str) -> SessionLog:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if not text:
        raise LogParseError(1, "empty log")
    lines = text.split("\n")
    terminated = lines[-1] == ""
    if terminated:
        lines.pop()

    log: SessionLog | None = None
    validator = _Validator()
    for number, line in enumerate(lines, start=1):
        if not terminated and number == len(lines):
            raise LogParseError(number, "unterminated record", log)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(number, f"malformed JSON: {exc.msg}", log) from None
        if not isinstance(obj, dict):
            raise LogParseError(number, "record is not a JSON object", log)
        if log is None:
            problem = _check_header(obj)
            if problem:
                raise LogParseError(number, problem)
            log = SessionLog(obj)
            continue
        problem = validator.check(obj)
        if problem:
            raise LogParseError(number, problem, log)
        log.records.append(obj)
    if log is None:
        raise LogParseError(1, "missing header")
    return log


def read_log(path: str | Path) -> SessionLog:
    return parse_log(Path(path).read_bytes())


def write_log(log: SessionLog, path: str | Path) -> None:
    Path(path).write_bytes(serialize_log(log))


def iter_logs(paths: Iterable[str | Path]) -> list[SessionLog]:
    return [read_log(p) for p in paths]
