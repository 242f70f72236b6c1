"""Session-log parsing, engagement metrics and the statistics behind the study report."""

from .log import LogParseError, SessionLog, parse_log, read_log, serialize_log, write_log
from .metrics import DEFAULT_WINDOWS, MetricsReport, windowed_metrics
from .report import StudyReport, study_report
from .stats import (
    TestResult,
    cohens_d,
    cohens_d_from_summary,
    mann_whitney_u,
    mean_impute,
    rank_biserial,
    shapiro_wilk,
    t_test,
    t_test_from_summary,
)

__all__ = [
    "DEFAULT_WINDOWS",
    "LogParseError",
    "MetricsReport",
    "SessionLog",
    "StudyReport",
    "TestResult",
    "cohens_d",
    "cohens_d_from_summary",
    "mann_whitney_u",
    "mean_impute",
    "parse_log",
    "rank_biserial",
    "read_log",
    "serialize_log",
    "shapiro_wilk",
    "study_report",
    "t_test",
    "t_test_from_summary",
    "windowed_metrics",
    "write_log",
]
