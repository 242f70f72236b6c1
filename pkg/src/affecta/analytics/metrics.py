"""Engagement metrics over session time windows."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .log import SessionLog

__all__ = [
    "DEFAULT_WINDOWS",
    "ConditionMetrics",
    "MetricsReport",
    "SessionMetrics",
    "Window",
    "make_windows",
    "session_metrics",
    "windowed_metrics",
]

DEFAULT_WINDOWS: tuple[float, ...] = (0.0, 5.0, 10.0, 20.0, math.inf)


@dataclass(frozen=True, slots=True)
class Window:
    start_min: float
    end_min: float

    @property
    def label(self) -> str:
        if math.isinf(self.end_min):
            return f"{self.start_min:g}+ min"
        return f"{self.start_min:g}-{self.end_min:g} min"

    def contains(self, minute: float) -> bool:
        return self.start_min <= minute < self.end_min


def make_windows(edges: Sequence[float] = DEFAULT_WINDOWS) -> tuple[Window, ...]:
    if len(edges) < 2:
        raise ValueError("need at least two window edges")
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError(f"window edges must be strictly increasing: {list(edges)}")
    if edges[0] < 0:
        raise ValueError("window edges must be non-negative")
    return tuple(Window(float(a), float(b)) for a, b in zip(edges, edges[1:]))


def _mean(xs: Sequence[float]) -> float | None:
    return math.fsum(xs) / len(xs) if xs else None


def _sd(xs: Sequence[float]) -> float | None:
    if len(xs) < 2:
        return None
    m = math.fsum(xs) / len(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


@dataclass(frozen=True)
class SessionMetrics:
    session_id: str
    condition: str
    duration_min: float
    accuracy_mean: float | None
    accuracy_sd: float | None
    window_accuracy: tuple[float | None, ...]  # None = no attempts in window
    window_attempts: tuple[int, ...]
    games_per_minute: tuple[float | None, ...]  # None = window lies past session end
    total_game_attempts: int
    total_physical_interactions: int

    @property
    def engagement_volume(self) -> int:
        return self.total_game_attempts + self.total_physical_interactions


@dataclass(frozen=True)
class ConditionMetrics:
    condition: str
    n_sessions: int
    accuracy_mean: float | None  # across session means
    accuracy_sd: float | None
    window_accuracy_mean: tuple[float | None, ...]  # across sessions with data in the window
    window_accuracy_sd: tuple[float | None, ...]
    window_accuracy_pooled: tuple[float | None, ...]  # over all attempts in the window
    window_attempts: tuple[int, ...]
    games_per_minute_mean: tuple[float | None, ...]
    total_game_attempts_mean: float
    total_physical_interactions_mean: float


@dataclass(frozen=True)
class MetricsReport:
    windows: tuple[Window, ...]
    sessions: tuple[SessionMetrics, ...]
    conditions: dict[str, ConditionMetrics] = field(default_factory=dict)


def session_metrics(log: SessionLog, windows: Sequence[Window]) -> SessionMetrics:
    start = log.start_ms
    duration_min = log.duration_ms / 60_000
    per_window: list[list[float]] = [[] for _ in windows]
    accuracies: list[float] = []
    for rec in log.records:
        if rec["kind"] != "attempt":
            continue
        minute = (rec["t"] - start) / 60_000
        accuracies.append(rec["accuracy"])
        for i, w in enumerate(windows):
            if w.contains(minute):
                per_window[i].append(rec["accuracy"])
                break

    rates: list[float | None] = []
    for w, accs in zip(windows, per_window):
        covered = min(w.end_min, duration_min) - w.start_min
        rates.append(len(accs) / covered if covered > 0 else None)

    return SessionMetrics(
        session_id=log.session_id,
        condition=log.condition,
        duration_min=duration_min,
        accuracy_mean=_mean(accuracies),
        accuracy_sd=_sd(accuracies),
        window_accuracy=tuple(_mean(a) for a in per_window),
        window_attempts=tuple(len(a) for a in per_window),
        games_per_minute=tuple(rates),
        total_game_attempts=len(accuracies),
        total_physical_interactions=sum(1 for r in log.records if r["kind"] == "grasp"),
    )


def _condition(name: str, sessions: Sequence[SessionMetrics], n_windows: int) -> ConditionMetrics:
    means = [s.accuracy_mean for s in sessions if s.accuracy_mean is not None]
    win_mean, win_sd, pooled, counts, rates = [], [], [], [], []
    for i in range(n_windows):
        vals = [s.window_accuracy[i] for s in sessions if s.window_accuracy[i] is not None]
        win_mean.append(_mean(vals))  # type: ignore[arg-type]
        win_sd.append(_sd(vals))  # type: ignore[arg-type]
        n = sum(s.window_attempts[i] for s in sessions)
        total = math.fsum(
            s.window_accuracy[i] * s.window_attempts[i]  # type: ignore[operator]
            for s in sessions
            if s.window_attempts[i]
        )
        pooled.append(total / n if n else None)
        counts.append(n)
        r = [s.games_per_minute[i] for s in sessions if s.games_per_minute[i] is not None]
        rates.append(_mean(r))  # type: ignore[arg-type]
    return ConditionMetrics(
        condition=name,
        n_sessions=len(sessions),
        accuracy_mean=_mean(means),
        accuracy_sd=_sd(means),
        window_accuracy_mean=tuple(win_mean),
        window_accuracy_sd=tuple(win_sd),
        window_accuracy_pooled=tuple(pooled),
        window_attempts=tuple(counts),
        games_per_minute_mean=tuple(rates),
        total_game_attempts_mean=math.fsum(s.total_game_attempts for s in sessions) / len(sessions),
        total_physical_interactions_mean=math.fsum(s.total_physical_interactions for s in sessions)
        / len(sessions),
    )


def windowed_metrics(
    logs: SessionLog | Sequence[SessionLog], edges: Sequence[float] = DEFAULT_WINDOWS
) -> MetricsReport:
    if isinstance(logs, SessionLog):
        logs = [logs]
    windows = make_windows(edges)
    sessions = tuple(session_metrics(log, windows) for log in logs)
    by_condition: dict[str, list[SessionMetrics]] = {}
    for s in sessions:
        by_condition.setdefault(s.condition, []).append(s)
    conditions = {name: _condition(name, group, len(windows)) for name, group in by_condition.items()}
    return MetricsReport(windows, sessions, conditions)
