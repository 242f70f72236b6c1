"""Command-line entry point: ``affecta sim | analyze | trace``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from .affect import EngineParams, TimeRegressionError, impact_at, new_state, on_interaction, params_digest, tick
from .analytics.log import LogParseError, SessionLog, read_log, serialize_log
from .analytics.metrics import DEFAULT_WINDOWS, windowed_metrics
from .analytics.report import format_table, study_report, summary_json, window_csv
from .simulator import PAPER_SCENARIOS, REFERENCE_SEED, Scenario, load_scenario, paper_scenario, run_session

log = logging.getLogger("affecta")


class CliError(Exception):
    pass


def _setup_logging() -> None:
    level = os.environ.get("AFFECTA_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _parse_overrides(pairs: Sequence[str]) -> EngineParams:
    overrides: dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise CliError(f"--params expects key=value, got {pair!r}")
        overrides[key.strip()] = value.strip()
    try:
        return EngineParams.from_overrides(overrides)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _parse_windows(text: str | None) -> tuple[float, ...]:
    if text is None:
        return DEFAULT_WINDOWS
    try:
        edges = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"--windows expects comma-separated minutes, got {text!r}") from None
    if not edges or edges[-1] != float("inf"):
        edges.append(float("inf"))
    return tuple(edges)


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# sim


def _resolve_scenario(name: str, seed: int) -> Scenario:
    if name in PAPER_SCENARIOS:
        return paper_scenario(name, seed)
    path = Path(name)
    if path.is_file():
        return load_scenario(path)
    raise CliError(f"unknown scenario {name!r}; available presets: {', '.join(PAPER_SCENARIOS)} (or a scenario file)")


def _simulate(job: tuple) -> bytes:
    profile, condition, duration, params, session_id = job
    return serialize_log(run_session(profile, condition, duration, params, session_id=session_id))


def cmd_sim(args: argparse.Namespace) -> int:
    scenario = _resolve_scenario(args.scenario, args.seed)
    params = _parse_overrides(args.params)
    duration = args.duration if args.duration is not None else scenario.duration_minutes
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise CliError(f"output directory {out} is not writable")

    jobs = [
        (profile, scenario.condition, duration, params, f"{scenario.name}-{i + 1:02d}")
        for i, profile in enumerate(scenario.cohort)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            blobs = list(pool.map(_simulate, jobs))
    else:
        blobs = [_simulate(job) for job in jobs]

    files = []
    try:
        for job, blob in zip(jobs, blobs):
            name = f"{job[4]}.jsonl"
            _atomic_write(out / name, blob)
            files.append({"file": name, "session_id": job[4], "sha256": hashlib.sha256(blob).hexdigest()})
        manifest = {
            "scenario": scenario.name,
            "condition": scenario.condition.value,
            "seed": args.seed,
            "duration_minutes": duration,
            "params_digest": params_digest(params),
            "sessions": files,
        }
        _atomic_write(out / "manifest.json", (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())
    except OSError as exc:
        raise CliError(f"failed writing to {out}: {exc}") from None
    print(f"wrote {len(files)} session logs and manifest.json to {out}")
    return 0


# ---------------------------------------------------------------------------
# analyze


def _collect_logs(inputs: Sequence[str]) -> list[SessionLog]:
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.jsonl")))
        elif p.is_file():
            paths.append(p)
        else:
            raise CliError(f"no such file or directory: {item}")
    if not paths:
        raise CliError("no session logs found")
    logs = []
    for path in paths:
        try:
            logs.append(read_log(path))
        except LogParseError as exc:
            raise CliError(f"{path}:{exc.line}: {exc.message}") from None
    return logs


def cmd_analyze(args: argparse.Namespace) -> int:
    logs = _collect_logs(args.inputs)
    edges = _parse_windows(args.windows)
    try:
        metrics = windowed_metrics(logs, edges)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    emotions = [lg for lg in logs if lg.condition == "emotions"]
    points = [lg for lg in logs if lg.condition == "points"]
    report = study_report(emotions, points, edges) if len(emotions) >= 2 and len(points) >= 2 else None

    if args.format == "csv":
        sys.stdout.write(window_csv(metrics))
    else:
        sys.stdout.write(format_table(metrics, report))

    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            _atomic_write(out / "windows.csv", window_csv(metrics).encode())
            _atomic_write(out / "summary.json", summary_json(metrics, report).encode())
        except OSError as exc:
            raise CliError(f"failed writing report to {out}: {exc}") from None
    return 0


# ---------------------------------------------------------------------------
# trace


def read_trace_script(path: str | Path) -> list[int]:
    """Interaction timestamps (ms), one per line; ``#`` starts a comment.

    A line may read ``<t_ms>`` or ``<t_ms> interaction``.
    """
    times: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) > 2 or (len(parts) == 2 and parts[1] != "interaction"):
                raise CliError(f"{path}:{number}: expected '<t_ms> [interaction]', got {raw.strip()!r}")
            try:
                t = int(parts[0])
            except ValueError:
                raise CliError(f"{path}:{number}: bad timestamp {parts[0]!r}") from None
            if t < 0 or (times and t < times[-1]):
                raise CliError(f"{path}:{number}: timestamps must be non-negative and in order")
            times.append(t)
    return times


def trace_csv(interactions: Sequence[int], horizon_ms: int, params: EngineParams) -> str:
    """Mood, decay rate and impact at every decay tick and every interaction."""
    state = new_state(params, 0)
    tick_times = range(params.tick_interval_ms, horizon_ms + 1, params.tick_interval_ms)
    events = sorted({*tick_times, *(t for t in interactions if t <= horizon_ms)})
    pending = set(interactions)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_ms", "event", "mood", "decay_rate", "impact_stored", "impact_now"])
    for t in events:
        if t in pending:
            state = on_interaction(state, params, t)
            event = "interaction"
        else:
            state = tick(state, params, t)
            event = "tick"
        writer.writerow([t, event, repr(state.mood), repr(state.decay_rate), repr(state.impact), repr(impact_at(state, params, t))])
    return buf.getvalue()


def cmd_trace(args: argparse.Namespace) -> int:
    interactions = read_trace_script(args.script)
    params = _parse_overrides(args.params)
    try:
        text = trace_csv(interactions, int(round(args.horizon * 1000)), params)
    except TimeRegressionError as exc:
        raise CliError(str(exc)) from None
    if args.out:
        try:
            _atomic_write(Path(args.out), text.encode())
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affecta", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="simulate a cohort of sessions")
    sim.add_argument("--scenario", required=True, help=f"preset ({', '.join(PAPER_SCENARIOS)}) or scenario .ini file")
    sim.add_argument("--seed", type=int, default=REFERENCE_SEED, help=f"random seed (default {REFERENCE_SEED})")
    sim.add_argument("-o", "--out", required=True, help="output directory")
    sim.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE", help="engine parameter overrides")
    sim.add_argument("--duration", type=float, default=None, help="session length in minutes")
    sim.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sim.set_defaults(func=cmd_sim)

    analyze = sub.add_parser("analyze", help="compute metrics and between-condition tests")
    analyze.add_argument("inputs", nargs="+", help="session log files or directories of *.jsonl logs")
    analyze.add_argument("-o", "--out", default=None, help="directory for summary.json and windows.csv")
    analyze.add_argument("--windows", default=None, help="window edges in minutes, e.g. 0,5,10,20")
    analyze.add_argument("--format", choices=("table", "csv"), default="table")
    analyze.set_defaults(func=cmd_analyze)

    trace = sub.add_parser("trace", help="replay interactions through the mood model")
    trace.add_argument("script", help="interaction script: one timestamp (ms) per line")
    trace.add_argument("--horizon", type=float, default=60.0, help="seconds to simulate (default 60)")
    trace.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE", help="engine parameter overrides")
    trace.add_argument("-o", "--out", default=None, help="write CSV here instead of stdout")
    trace.set_defaults(func=cmd_trace)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"affecta: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:  # config validation from library layers
        print(f"affecta: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
