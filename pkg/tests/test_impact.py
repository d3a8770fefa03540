import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alertminer.config import RunConfig
from alertminer.detectors import AlertKind
from alertminer.impact import (
    QuartileThresholds,
    aggregate_impact,
    ccp_diff,
    ccp_group,
    evaluate_feature,
    evaluate_features,
    feature_matrix,
    feature_names,
    fit_quartiles,
    group_table,
    impact_table,
    stratified_split,
)
from alertminer.labeling import lf_added_function
from events import make_event, window, with_diff


def test_ccp_diff_examples():
    assert ccp_diff(with_diff((3, 10), (1, 4))) == pytest.approx(-5.0)
    assert ccp_diff(with_diff((1, 5), (2, 10))) == 0.0
    assert ccp_diff(with_diff((0, 5), (5, 5))) == 100.0
    with pytest.raises(ValueError):
        ccp_diff(make_event())


@pytest.mark.parametrize("value, group", [
    (0.05, "low"), (0.0899, "low"), (0.09, "medium"), (0.20, "medium"),
    (0.39, "medium"), (0.3901, "high"), (0.50, "high")])
def test_ccp_group_boundaries(value, group):
    assert ccp_group(value) == group


def diff_event(d_pp: float, **kw):
    # before 0.5 over 100 commits, after shifted by d percentage points
    return make_event(windows=(window(50, 100), window(50 + int(d_pp), 100)), **kw)


def test_aggregate_mean_and_standard_error():
    row = aggregate_impact([diff_event(-2), diff_event(-4), diff_event(-6)])
    assert row.samples == 3
    assert row.mean_ccp_diff == pytest.approx(-4.0, abs=1e-9)
    assert row.std_error == pytest.approx(2 / math.sqrt(3), abs=1e-9)


def test_aggregate_filters_and_absent_rows():
    events = [diff_event(-2, new_function=True), diff_event(4, kind=AlertKind.WILDCARD_IMPORT)]
    row = aggregate_impact(events, lf_added_function, context="new function")
    assert row.samples == 1 and row.std_error is None and row.context == "new function"
    assert aggregate_impact(events, alert_filter="wildcard-import").mean_ccp_diff == pytest.approx(4.0)
    assert aggregate_impact(events, alert_filter=AlertKind.UNNECESSARY_PASS) is None
    assert aggregate_impact([make_event()]) is None


def test_tables():
    events = [diff_event(-2, new_function=True), diff_event(-4), diff_event(3, kind=AlertKind.WILDCARD_IMPORT)]
    rows = impact_table(events)
    assert rows[0].context == "all" and rows[0].alert_kind == "all" and rows[0].samples == 3
    groups = group_table(events, RunConfig())
    assert [g.context for g in groups] == ["high CCP"]


@given(st.floats(0, 1))
def test_groups_partition(value):
    assert ccp_group(value) in {"low", "medium", "high"}


def test_evaluate_oracle_and_constant_features():
    labels = np.array([1, 1, 0, 0, 0, 1, 0, 0, 0, 0], dtype=bool)
    base = labels.mean()
    oracle = evaluate_feature(labels, labels)
    assert (oracle.accuracy, oracle.precision, oracle.recall) == (1.0, 1.0, 1.0)
    assert oracle.precision_lift == 1 / base - 1
    never = evaluate_feature(np.zeros(10, dtype=bool), labels)
    assert never.hit_rate == 0 and never.recall == 0 and never.precision is None and never.precision_lift is None
    assert never.accuracy == pytest.approx(1 - base)
    always = evaluate_feature(np.ones(10, dtype=bool), labels)
    assert always.precision == base and always.precision_lift == 0.0


def test_lift_zero_for_precision_at_base_rate():
    labels = np.array([1, 0, 0, 0, 1, 0, 0, 0], dtype=bool)  # base 0.25
    column = np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=bool)  # precision 1/4
    assert evaluate_feature(column, labels).precision_lift == 0.0


def test_evaluate_rejects_empty():
    with pytest.raises(ValueError):
        evaluate_feature([], [])


@given(st.integers(0, 2**32 - 1))
def test_random_feature_lift_is_near_zero(seed):
    rng = np.random.default_rng(seed)
    labels = rng.random(20_000) < 0.4
    column = rng.random(20_000) < 0.5
    assert abs(evaluate_feature(column, labels).precision_lift) < 0.06


def test_quartile_flags_exclusive():
    q = QuartileThresholds({"x": (1.0, 3.0), "flat": (2.0, 2.0)})
    assert q.flags("x", 1.0) == (False, True)
    assert q.flags("x", 3.0) == (True, False)
    assert q.flags("x", 2.0) == (False, False)
    assert q.flags("flat", 2.0) == (False, False)
    assert q.flags("flat", 5.0) == (True, False)


def test_feature_matrix_shapes_and_label():
    events = [diff_event(-2, added=0, deleted=9, mccabe_max_diff=-3),
              diff_event(0, new_function=True),
              diff_event(5, refactor_message=True, mccabe_max_before=30),
              make_event()]
    thresholds = fit_quartiles(events[:3])
    names, X, y = feature_matrix(events, thresholds)
    assert X.shape == (3, len(names)) and names == feature_names()
    assert list(y) == [True, False, False]
    col = {n: X[:, j] for j, n in enumerate(names)}
    assert list(col["only_removal"]) == [True, False, False]
    assert list(col["mostly_delete"]) == [True, False, False]
    assert list(col["is_refactor"]) == [False, False, True]
    assert list(col["high_mccabe_max_before"]) == [False, False, True]
    assert list(col["kind=too-many-branches"]) == [True, True, True]
    assert not np.any(col["high_mccabe_max_diff"] & col["low_mccabe_max_diff"])


def test_features_sorted_by_lift():
    labels = np.array([1, 0, 1, 0], dtype=bool)
    X = np.array([[1, 1, 0], [1, 0, 0], [1, 1, 0], [1, 0, 0]], dtype=bool)
    rows = evaluate_features(["always", "oracle", "never"], X, labels)
    assert [r.name for r in rows] == ["oracle", "always", "never"]


def test_stratified_split():
    labels = np.array([True] * 30 + [False] * 60)
    train, test = stratified_split(labels, seed=7)
    assert len(test) == 30 and len(train) == 60
    assert labels[test].sum() == 10
    assert not set(train) & set(test)
    again = stratified_split(labels, seed=7)
    assert np.array_equal(again[0], train) and np.array_equal(again[1], test)


def test_control_baseline_on_upward_drift():
    # corrective share rises over time, so later windows score higher
    events = [with_diff((k, 20), (k + 1 + k % 2, 20)) for k in range(10)]
    assert aggregate_impact(events).mean_ccp_diff >= 0
