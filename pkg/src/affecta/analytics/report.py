"""Between-condition study report.

Each outcome is gated by a Shapiro-Wilk check on both groups: if both look
normal (p >= .05) the groups are compared with a pooled t test and Cohen's d,
otherwise with a Mann-Whitney U test and rank-biserial r. Missing per-session
values are mean-imputed within their own condition first.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .log import SessionLog
from .metrics import DEFAULT_WINDOWS, MetricsReport, windowed_metrics
from .stats import ALPHA, TestResult, mann_whitney_u, mean_impute, shapiro_wilk, t_test

__all__ = [
    "MetricTest",
    "StudyReport",
    "format_table",
    "normality_gate",
    "study_report",
    "summary_dict",
    "window_csv",
]

GROUP_A = "emotions"
GROUP_B = "points"


@dataclass(frozen=True)
class MetricTest:
    metric: str
    normality: dict[str, TestResult | None]  # None = gate could not run
    routed_to: str  # "t-test" | "u-test"
    result: TestResult
    imputed: dict[str, int]  # number of filled gaps per condition


@dataclass(frozen=True)
class StudyReport:
    metrics: MetricsReport
    tests: dict[str, MetricTest] = field(default_factory=dict)


def normality_gate(values: Sequence[float]) -> TestResult | None:
    """Shapiro-Wilk result, or None when the sample cannot be tested."""
    if not 3 <= len(values) <= 50:
        return None
    try:
        return shapiro_wilk(values)
    except ValueError:  # constant sample
        return None


def _compare(metric: str, raw: dict[str, list[float | None]]) -> MetricTest:
    imputed_counts = {
        k: sum(1 for v in vs if v is None or (isinstance(v, float) and math.isnan(v)))
        for k, vs in raw.items()
    }
    values = mean_impute(raw)
    a, b = values[GROUP_A], values[GROUP_B]
    gate = {GROUP_A: normality_gate(a), GROUP_B: normality_gate(b)}
    normal = all(g is not None and g.p_value >= ALPHA for g in gate.values())
    result: TestResult | None = None
    if normal:
        try:
            result = t_test(a, b, "independent")
        except ValueError:  # both groups without variance
            result = None
    route = "t-test" if result is not None else "u-test"
    if result is None:
        result = mann_whitney_u(a, b)
    return MetricTest(metric, gate, route, result, imputed_counts)


def study_report(
    cohort_emotions: Sequence[SessionLog],
    cohort_points: Sequence[SessionLog],
    edges: Sequence[float] = DEFAULT_WINDOWS,
) -> StudyReport:
    if len(cohort_emotions) < 2 or len(cohort_points) < 2:
        raise ValueError("each cohort needs at least two sessions for between-group tests")
    for name, cohort in ((GROUP_A, cohort_emotions), (GROUP_B, cohort_points)):
        wrong = [log.session_id for log in cohort if log.condition != name]
        if wrong:
            raise ValueError(f"{name} cohort contains sessions from another condition: {wrong}")

    metrics = windowed_metrics([*cohort_emotions, *cohort_points], edges)
    groups = {
        GROUP_A: [s for s in metrics.sessions if s.condition == GROUP_A],
        GROUP_B: [s for s in metrics.sessions if s.condition == GROUP_B],
    }

    def collect(getter) -> dict[str, list[float | None]]:
        return {k: [getter(s) for s in sessions] for k, sessions in groups.items()}

    tests: dict[str, MetricTest] = {}
    outcomes: list[tuple[str, Any]] = [
        ("task_accuracy", lambda s: s.accuracy_mean),
        ("total_game_attempts", lambda s: float(s.total_game_attempts)),
        ("total_physical_interactions", lambda s: float(s.total_physical_interactions)),
        ("engagement_volume", lambda s: float(s.engagement_volume)),
    ]
    for i, w in enumerate(metrics.windows):
        outcomes.append((f"accuracy[{w.label}]", lambda s, i=i: s.window_accuracy[i]))
        outcomes.append((f"games_per_minute[{w.label}]", lambda s, i=i: s.games_per_minute[i]))

    for name, getter in outcomes:
        raw = collect(getter)
        if any(all(v is None for v in vs) for vs in raw.values()):
            continue  # nothing observed for one condition: metric not testable
        tests[name] = _compare(name, raw)
    return StudyReport(metrics, tests)


# ---------------------------------------------------------------------------
# Output


def _num(x: float | None) -> float | None:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def summary_dict(metrics: MetricsReport, report: StudyReport | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "windows": [w.label for w in metrics.windows],
        "sessions": [
            {
                "session_id": s.session_id,
                "condition": s.condition,
                "accuracy_mean": s.accuracy_mean,
                "accuracy_sd": s.accuracy_sd,
                "window_accuracy": list(s.window_accuracy),
                "games_per_minute": list(s.games_per_minute),
                "total_game_attempts": s.total_game_attempts,
                "total_physical_interactions": s.total_physical_interactions,
            }
            for s in metrics.sessions
        ],
        "conditions": {
            name: {
                "n_sessions": c.n_sessions,
                "accuracy_mean": c.accuracy_mean,
                "accuracy_sd": c.accuracy_sd,
                "window_accuracy_mean": list(c.window_accuracy_mean),
                "window_accuracy_sd": list(c.window_accuracy_sd),
                "window_accuracy_pooled": list(c.window_accuracy_pooled),
                "games_per_minute_mean": list(c.games_per_minute_mean),
                "total_game_attempts_mean": c.total_game_attempts_mean,
                "total_physical_interactions_mean": c.total_physical_interactions_mean,
            }
            for name, c in metrics.conditions.items()
        },
        "statistics": None,
    }
    if report is not None:
        out["statistics"] = {
            name: {
                "routed_to": t.routed_to,
                "normality": {k: (g.to_dict() if g else None) for k, g in t.normality.items()},
                "imputed": t.imputed,
                **t.result.to_dict(),
            }
            for name, t in report.tests.items()
        }
    return out


def summary_json(metrics: MetricsReport, report: StudyReport | None = None) -> str:
    return json.dumps(summary_dict(metrics, report), sort_keys=True, separators=(",", ":")) + "\n"


def window_csv(metrics: MetricsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["condition", "window", "n_sessions", "n_attempts", "accuracy_mean", "accuracy_sd", "accuracy_sem", "games_per_minute_mean"]
    )
    for name, c in sorted(metrics.conditions.items()):
        for i, w in enumerate(metrics.windows):
            sd = c.window_accuracy_sd[i]
            n_with = sum(1 for s in metrics.sessions if s.condition == name and s.window_accuracy[i] is not None)
            sem = sd / math.sqrt(n_with) if sd is not None and n_with else None
            writer.writerow(
                [
                    name,
                    w.label,
                    c.n_sessions,
                    c.window_attempts[i],
                    "" if c.window_accuracy_mean[i] is None else repr(c.window_accuracy_mean[i]),
                    "" if sd is None else repr(sd),
                    "" if sem is None else repr(sem),
                    "" if c.games_per_minute_mean[i] is None else repr(c.games_per_minute_mean[i]),
                ]
            )
    return buf.getvalue()


def _pct(x: float | None) -> str:
    return "   -  " if x is None else f"{100 * x:5.1f}%"


def _f(x: float | None, fmt: str = ".3f") -> str:
    return "-" if x is None else format(x, fmt)


def format_table(metrics: MetricsReport, report: StudyReport | None = None) -> str:
    lines = []
    labels = [w.label for w in metrics.windows]
    lines.append("Task accuracy by window (mean across sessions)")
    lines.append(f"{'condition':<10} {'n':>3} {'overall':>8} " + " ".join(f"{lab:>10}" for lab in labels))
    for name, c in sorted(metrics.conditions.items()):
        lines.append(
            f"{name:<10} {c.n_sessions:>3} {_pct(c.accuracy_mean):>8} "
            + " ".join(f"{_pct(v):>10}" for v in c.window_accuracy_mean)
        )
    lines.append("")
    lines.append("Games per minute by window")
    for name, c in sorted(metrics.conditions.items()):
        lines.append(f"{name:<10}     {'':>8} " + " ".join(f"{_f(v, '.2f'):>10}" for v in c.games_per_minute_mean))
    lines.append("")
    if report is None:
        lines.append("Statistics: not applicable (needs two cohorts of at least two sessions)")
        return "\n".join(lines) + "\n"

    lines.append("Between-condition tests (emotions vs points)")
    lines.append(f"{'metric':<34} {'test':<7} {'stat':>9} {'df':>5} {'p':>8} {'effect':>8} {'':<13}")
    for name, t in report.tests.items():
        r = t.result
        stat_name = "U" if r.kind == "mann-whitney-u" else "t"
        effect = "r" if r.effect_name == "rank-biserial" else "d"
        lines.append(
            f"{name:<34} {t.routed_to:<7} {stat_name}={r.statistic:>7.3f} {_f(r.df, '.0f'):>5} "
            f"{r.p_value:>8.4f} {effect}={_f(r.effect_size, '.3f'):>6} {'*' if r.significant else ''}"
        )
    return "\n".join(lines) + "\n"
