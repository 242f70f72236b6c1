from __future__ import annotations

import json

import pytest

from affecta.analytics.report import format_table, normality_gate, study_report, summary_json, window_csv
from affecta.analytics.stats import ALPHA
from affecta.simulator import run_paper_scenario

from .synthetic import make_log


@pytest.fixture(scope="module")
def paper_cohorts():
    return run_paper_scenario("paper-emotions"), run_paper_scenario("paper-points")


def test_routing_follows_gate(paper_cohorts):
    report = study_report(*paper_cohorts)
    assert "task_accuracy" in report.tests
    for name, test in report.tests.items():
        gates = test.normality.values()
        normal = all(g is not None and g.p_value >= ALPHA for g in gates)
        if test.routed_to == "t-test":
            assert normal and test.result.kind == "t-independent" and test.result.effect_name == "cohens-d"
        else:
            assert test.result.kind == "mann-whitney-u" and test.result.effect_name == "rank-biserial"


def test_identical_cohorts_show_no_effect():
    logs = [make_log(f"s{i}", "points", [(m, (i + m) % 4) for m in range(0, 25, 2)]) for i in range(5)]
    twins = []
    for log in logs:
        header = dict(log.header, condition="emotions", session_id="e" + log.session_id)
        twins.append(type(log)(header, log.records))
    report = study_report(twins, logs)
    assert report.tests
    for test in report.tests.values():
        assert test.result.effect_size == pytest.approx(0.0, abs=1e-12)
        assert test.result.p_value > 0.05


def test_imputation_counted_for_empty_windows():
    emo = [make_log("e1", "emotions", [(1, 3), (12, 2)]), make_log("e2", "emotions", [(2, 1)]), make_log("e3", "emotions", [(3, 2), (15, 0)])]
    pts = [make_log(f"p{i}", "points", [(1, i % 4), (11, 3)]) for i in range(3)]
    report = study_report(emo, pts)
    assert report.tests["accuracy[10-20 min]"].imputed == {"emotions": 1, "points": 0}
    assert "accuracy[20+ min]" not in report.tests  # no data in either condition


def test_cohort_validation():
    one = [make_log("a", "points", [(1, 3)])]
    two = one + [make_log("b", "points", [(1, 2)])]
    with pytest.raises(ValueError):
        study_report([], two)
    with pytest.raises(ValueError):
        study_report(one, two)
    with pytest.raises(ValueError, match="another condition"):
        study_report(two, two)


def test_normality_gate_skips_untestable():
    assert normality_gate([1.0, 2.0]) is None
    assert normality_gate([2.0, 2.0, 2.0]) is None
    assert normality_gate([1.0, 2.0, 4.0]) is not None


def test_outputs(paper_cohorts):
    report = study_report(*paper_cohorts)
    summary = json.loads(summary_json(report.metrics, report))
    assert set(summary["conditions"]) == {"emotions", "points"}
    assert summary["statistics"]["task_accuracy"]["routed_to"] in ("t-test", "u-test")
    rows = window_csv(report.metrics).splitlines()
    assert rows[0].startswith("condition,window") and len(rows) == 1 + 2 * 4
    table = format_table(report.metrics, report)
    assert "Between-condition tests" in table and "task_accuracy" in table
    assert "not applicable" in format_table(report.metrics, None)
