import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import BEDSIDE_WINDOW, DATA, TWO_EVENT_WINDOW, bedside_records, random_stream, two_event_records
from umetrics.errors import ConfigError, InputError
from umetrics.pipeline import evaluate
from umetrics.snooze import NONE, parse_snooze, time_snooze
from umetrics.sweep import (
    BurdenParams,
    Constraint,
    CurvePoint,
    PerformanceRow,
    PerformanceTable,
    SweepConfig,
    auc_uprc,
    best_per_snooze,
    burden,
    default_snooze_grid,
    nnb,
    run_sweep,
    select_operating_point,
    upr_curve,
)
from umetrics.timeline import PredictionRecord, build_event_windows
from umetrics.utility import SCENARIO_ALARM, SCENARIO_C


def _tradeoff_table():
    return PerformanceTable.from_csv((DATA / "tradeoff_table.csv").read_text())


def test_one_point_grid_matches_evaluate():
    preds, events = random_stream(11, n_entities=3)
    cfg = SweepConfig(SCENARIO_C, 1800.0, cutoff_grid=[0.4], snooze_grid=[time_snooze("10m")])
    (row,) = run_sweep(preds, events, cfg)
    ev = evaluate(preds, build_event_windows(events, 1800.0), SCENARIO_C, 0.4, time_snooze("10m"))
    assert row.u_recall == ev.u_metrics["u_recall"].value
    assert row.u_precision == ev.u_metrics["u_precision"].value
    assert row.adversity_ratio == ev.descriptive["adversity_ratio"].value
    assert row.count_ap == ev.descriptive["count_ap"].value
    assert row.alerts == ev.alerts


def test_two_event_fixed_labels_row():
    preds, events = two_event_records()
    labeled = [PredictionRecord(p.entity_id, p.timestamp, label=p.score >= 0.5) for p in preds]
    (row,) = run_sweep(labeled, events, SweepConfig(SCENARIO_C, TWO_EVENT_WINDOW))
    assert row.cutoff is None
    assert row.u_recall == 0.5
    assert row.u_precision == pytest.approx(0.45, abs=0.005)


def test_bedside_rows():
    preds, events = bedside_records()
    cfg = SweepConfig(SCENARIO_ALARM, BEDSIDE_WINDOW, snooze_grid=[NONE, time_snooze("40m")])
    plain, snoozed = run_sweep(preds, events, cfg)
    assert plain.u_recall == snoozed.u_recall == 1.0
    assert plain.u_precision == pytest.approx(1 / 3)
    assert snoozed.u_precision == pytest.approx(2 / 3)


def test_select_min_recall():
    op = select_operating_point(_tradeoff_table(), Constraint(min_u_recall=0.7))
    assert str(op.row.snooze) == "time:20m" and op.row.cutoff == 0.55
    assert op.row.adversity_ratio == 2.3


def test_select_infeasible_lists_nearest():
    op = select_operating_point(_tradeoff_table(), Constraint(min_u_recall=0.9))
    assert not op.feasible
    assert len(op.nearest) == 3
    assert op.nearest[0].u_recall == 0.72


def test_select_max_adversity():
    op = select_operating_point(_tradeoff_table(), Constraint(max_adversity_ratio=2.5))
    assert str(op.row.snooze) == "time:20m"


def test_select_single_row():
    row = PerformanceRow(NONE, 0.5, u_recall=0.8, adversity_ratio=1.0)
    assert select_operating_point([row], Constraint(min_u_recall=0.5)).row is row


def test_tie_breaks():
    rows = [
        PerformanceRow(time_snooze(60), 0.3, u_recall=0.8, adversity_ratio=1.0),
        PerformanceRow(time_snooze(120), 0.3, u_recall=0.8, adversity_ratio=1.0),
        PerformanceRow(time_snooze(120), 0.4, u_recall=0.8, adversity_ratio=1.0),
        PerformanceRow(NONE, 0.9, u_recall=0.9, adversity_ratio=1.0),
    ]
    op = select_operating_point(rows, Constraint(min_u_recall=0.5))
    assert op.row is rows[3]  # higher recall beats longer snooze
    op = select_operating_point(rows[:3], Constraint(min_u_recall=0.5))
    assert op.row is rows[2]  # longer snooze, then higher cutoff


def test_empty_table():
    with pytest.raises(InputError):
        select_operating_point([], Constraint(min_u_recall=0.5))


def test_constraint_validation():
    with pytest.raises(ConfigError):
        Constraint()
    with pytest.raises(ConfigError):
        Constraint(min_u_recall=0.5, max_adversity_ratio=1.0)


def test_best_per_snooze():
    ops = best_per_snooze(_tradeoff_table(), Constraint(min_u_recall=0.0))
    assert [str(o.row.snooze) for o in ops] == ["time:5m", "time:10m", "time:20m", "time:1h", "time:2h"]


def test_default_snooze_grid_contains_windows():
    grid = default_snooze_grid(3600.0, 1800.0)
    spans = [p.time_span for p in grid]
    assert grid[0] == NONE and 3600.0 in spans and 1800.0 in spans


def test_table_csv_roundtrip():
    preds, events = random_stream(5)
    table = run_sweep(preds, events, SweepConfig(SCENARIO_C, 1800.0, cutoff_grid=[0.2, 0.6], snooze_grid=[NONE, parse_snooze("while-positive")]))
    again = PerformanceTable.from_csv(table.to_csv())
    assert again.to_csv() == table.to_csv()


def test_sweep_deterministic_and_parallel_equal():
    preds, events = random_stream(21, n_entities=4)
    cfg = SweepConfig(SCENARIO_C, 1800.0, snooze_grid=[NONE, time_snooze("15m"), time_snooze("1h")])
    a = run_sweep(preds, events, cfg)
    b = run_sweep(preds, events, cfg)
    c = run_sweep(preds, events, cfg, workers=2)
    assert a.to_csv() == b.to_csv() == c.to_csv()
    assert len(a) == 3 * 21


def test_upr_curve_matches_per_cutoff_runs():
    preds, events = random_stream(33, n_entities=4)
    windows = build_event_windows(events, 1800.0)
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    curve = upr_curve(preds, windows, NONE, SCENARIO_C, grid)
    for p in curve.points:
        ev = evaluate(preds, windows, SCENARIO_C, p.cutoff, NONE)
        assert (p.u_recall, p.u_precision) == (ev.u_metrics["u_recall"].value, ev.u_metrics["u_precision"].value)
    assert len(curve.points) + len(curve.notes) == len(grid)


def test_upr_curve_above_max_score_drops_point():
    preds, events = two_event_records()
    curve = upr_curve(preds, build_event_windows(events, TWO_EVENT_WINDOW), NONE, SCENARIO_C, [0.5, 0.95])
    assert [p.cutoff for p in curve.points] == [0.5]
    assert curve.notes


def test_upr_curve_fixed_labels_single_point():
    preds, events = two_event_records()
    labeled = [PredictionRecord(p.entity_id, p.timestamp, label=p.score >= 0.5) for p in preds]
    curve = upr_curve(labeled, build_event_windows(events, TWO_EVENT_WINDOW), NONE, SCENARIO_C)
    (pt,) = curve.points
    assert pt.u_recall == 0.5 and pt.u_precision == pytest.approx(0.45, abs=0.005)


def test_auc_basic_cases():
    assert auc_uprc([(0, 1), (1, 1)]) == 1.0
    assert auc_uprc([(0, 1), (1, 0)]) == 0.5
    assert auc_uprc([CurvePoint(0.5, 0.5, 0.45)]) == 0.0
    with pytest.raises(InputError):
        auc_uprc([])


def _rectangle_oracle(points, steps=1_000_000):
    """Midpoint rectangles over linear interpolation of the sorted points."""
    pts = sorted(points)
    r = np.array([p[0] for p in pts])
    p = np.array([p[1] for p in pts])
    lo, hi = r[0], r[-1]
    if hi == lo:
        return 0.0
    width = (hi - lo) / steps
    mids = lo + (np.arange(steps) + 0.5) * width
    return float(np.interp(mids, r, p).sum() * width)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.randoms())
def test_auc_matches_oracle_and_order_invariant(seed, rnd):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    # distinct recalls so linear interpolation is single-valued
    recalls = rng.choice(np.linspace(0, 1, 1001), size=n, replace=False)
    points = list(zip(recalls.tolist(), rng.random(n).tolist()))
    area = auc_uprc(points)
    assert abs(area - _rectangle_oracle(points)) <= 1e-6
    shuffled = list(points)
    rnd.shuffle(shuffled)
    assert auc_uprc(shuffled) == area


def test_burden_examples():
    params = dict(period_length=30 * 86400, bed_count=200, patients_per_caregiver=8, shift_length=12 * 3600)
    assert burden(BurdenParams(300, **params)) == pytest.approx(0.2, abs=1e-9)
    assert burden(BurdenParams(0, **params)) == 0.0
    assert burden(BurdenParams(600, **params)) == pytest.approx(0.4, abs=1e-9)


def test_burden_zero_divisor():
    with pytest.raises(ConfigError):
        BurdenParams(300, 30 * 86400, 0, 8, 12 * 3600)


def test_nnb():
    assert nnb(0.5, 10) == 20
    assert nnb(0.45, 1) == pytest.approx(2.22, abs=0.01)
    assert nnb(1.0, 7.5) == 7.5
    assert nnb(None, 3) is None and nnb(0.0, 3) is None


@pytest.mark.parametrize("grid", [[], [0.5, 0.2], [1.5]])
def test_bad_cutoff_grid(grid):
    with pytest.raises(ConfigError):
        SweepConfig(SCENARIO_C, 60.0, cutoff_grid=grid)


def test_selected_row_is_from_table():
    preds, events = random_stream(8, n_entities=3)
    table = run_sweep(preds, events, SweepConfig(SCENARIO_C, 1800.0, snooze_grid=[NONE, time_snooze("30m")]))
    for bound in (0.0, 0.3, 0.6, 0.9):
        op = select_operating_point(table, Constraint(min_u_recall=bound))
        if op.feasible:
            assert op.row in table.rows and op.row.u_recall >= bound
        else:
            assert all(r.u_recall is None or r.u_recall < bound for r in table)
