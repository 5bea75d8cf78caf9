import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DATA, two_event_records
from umetrics.errors import ConfigError, InputError
from umetrics.files import read_events, read_predictions
from umetrics.timeline import (
    EventRecord,
    PredictionRecord,
    build_event_windows,
    label_predictions,
    parse_duration,
    parse_timestamp,
)


def _brute_force_owner(pred, windows):
    """Linear scan over every window: the owning event id, or None."""
    owners = [w.event_id for w in windows if w.entity_id == pred.entity_id and w.start <= pred.timestamp < w.end]
    assert len(owners) <= 1
    return owners[0] if owners else None


def test_single_window():
    (w,) = build_event_windows([EventRecord("a", 100.0)], 30.0)
    assert (w.start, w.end, w.event_id) == (70.0, 100.0, "e1")


def test_serialization_truncates_later_window():
    windows = build_event_windows([EventRecord("a", 110.0), EventRecord("a", 100.0)], 30.0)
    assert [(w.start, w.end) for w in windows] == [(70.0, 100.0), (100.0, 110.0)]


def test_empty_events():
    assert build_event_windows([], 30.0) == []


def test_duplicate_event_rejected():
    with pytest.raises(InputError):
        build_event_windows([EventRecord("a", 5.0), EventRecord("a", 5.0)], 10.0)


def test_same_time_different_entities_ok():
    windows = build_event_windows([EventRecord("a", 5.0), EventRecord("b", 5.0)], 10.0)
    assert len(windows) == 2


def test_nonpositive_window_rejected():
    with pytest.raises(ConfigError):
        build_event_windows([EventRecord("a", 5.0)], 0.0)


def test_auto_event_ids_follow_time_order():
    windows = build_event_windows([EventRecord("a", 50.0), EventRecord("a", 10.0, "x"), EventRecord("a", 90.0)], 5.0)
    assert [w.event_id for w in windows] == ["x", "e1", "e2"]


def test_two_event_classic_labels():
    preds, events = two_event_records()
    labeled = label_predictions(preds, build_event_windows(events, 35.0), cutoff=0.5)
    assert [p.classic for p in labeled] == ["FN", "TP", "TP", "FN", "FP", "TN", "FN", "FN"]
    assert [p.ordinal_in_window for p in labeled] == [0, 1, 2, 3, None, None, 0, 1]


def test_no_windows_all_actual_negative():
    preds, _ = two_event_records()
    assert not any(p.actual_positive for p in label_predictions(preds, [], 0.5))


def test_cutoff_zero_all_positive():
    preds, events = two_event_records()
    assert all(p.predicted_positive for p in label_predictions(preds, build_event_windows(events, 35.0), 0.0))


def test_score_at_cutoff_is_positive():
    (p,) = label_predictions([PredictionRecord("a", 1.0, 0.5)], [], 0.5)
    assert p.predicted_positive


def test_prediction_at_event_instant_is_outside():
    windows = build_event_windows([EventRecord("a", 100.0)], 30.0)
    labeled = label_predictions([PredictionRecord("a", 100.0, 0.9), PredictionRecord("a", 70.0, 0.9)], windows, 0.5)
    assert [p.actual_positive for p in labeled] == [True, False]


def test_score_out_of_range():
    with pytest.raises(InputError):
        PredictionRecord("a", 1.0, 1.5)


def test_cutoff_out_of_range():
    with pytest.raises(ConfigError):
        label_predictions([PredictionRecord("a", 1.0, 0.5)], [], 1.2)


def test_prethresholded_ignores_cutoff():
    (p,) = label_predictions([PredictionRecord("a", 1.0, label=True)], [], 0.99)
    assert p.predicted_positive


def test_addressable_bounds_annotate():
    windows = build_event_windows([EventRecord("a", 100.0)], 60.0, addressable_bounds=(10.0, 30.0))
    labeled = label_predictions([PredictionRecord("a", float(t), 0.9) for t in (50, 75, 95)], windows, 0.5)
    assert [p.addressable for p in labeled] == [False, True, False]


@pytest.mark.parametrize(
    "text, seconds",
    [("40m", 2400), ("12h", 43200), ("30d", 2592000), ("90s", 90), ("15", 15), ("1.5h", 5400)],
)
def test_parse_duration(text, seconds):
    assert parse_duration(text) == seconds


def test_parse_duration_bad():
    with pytest.raises(ConfigError):
        parse_duration("forty minutes")


def test_parse_timestamp_rfc3339():
    assert parse_timestamp("1970-01-01T00:01:40Z") == 100.0
    assert parse_timestamp("1970-01-01T01:01:40+01:00") == 100.0
    assert parse_timestamp("100") == 100.0


def test_read_files(tmp_path):
    preds = read_predictions(DATA / "two_event_predictions.csv")
    assert len(preds) == 8 and preds[1].score == 0.8
    events = read_events(DATA / "two_event_events.csv")
    assert [e.event_id for e in events] == ["event1", "event2"]
    jl = tmp_path / "p.jsonl"
    jl.write_text('{"entity_id": "a", "timestamp": "1970-01-01T00:00:10Z", "score": 0.3}\n'
                  '{"entity_id": "a", "timestamp": 20, "class": "pos"}\n')
    recs = read_predictions(jl)
    assert recs[0].timestamp == 10.0 and recs[1].label is True


def test_read_bad_score(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("entity_id,timestamp,score\na,1,1.7\n")
    with pytest.raises(InputError):
        read_predictions(f)


def test_read_empty(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("entity_id,timestamp,score\n")
    with pytest.raises(InputError):
        read_predictions(f)


event_sets = st.lists(
    st.tuples(st.sampled_from(["a", "b", "c"]), st.integers(0, 500)), max_size=25, unique=True
)


@settings(max_examples=200, deadline=None)
@given(event_sets, st.integers(1, 120))
def test_windows_disjoint_and_bounded(evs, w):
    windows = build_event_windows([EventRecord(e, float(t)) for e, t in evs], float(w))
    ends = {(e, float(t)) for e, t in evs}
    assert {(x.entity_id, x.end) for x in windows} == ends
    by_entity = {}
    for x in windows:
        assert x.start < x.end
        assert x.end - x.start <= w
        by_entity.setdefault(x.entity_id, []).append(x)
    for ws in by_entity.values():
        ws.sort(key=lambda x: x.start)
        for a, b in zip(ws, ws[1:]):
            assert a.end <= b.start


@settings(max_examples=100, deadline=None)
@given(event_sets, st.integers(1, 120), st.lists(st.tuples(st.sampled_from(["a", "b", "c"]), st.integers(0, 600), st.floats(0, 1)), max_size=40), st.randoms())
def test_labeling_matches_brute_force_and_is_order_independent(evs, w, raw, rnd):
    windows = build_event_windows([EventRecord(e, float(t)) for e, t in evs], float(w))
    preds = [PredictionRecord(e, float(t), s) for e, t, s in raw]
    labeled = label_predictions(preds, windows, 0.5)
    for p in labeled:
        owner = _brute_force_owner(p.record, windows)
        assert p.event_id == owner
        assert p.actual_positive == (owner is not None)
    shuffled = list(preds)
    rnd.shuffle(shuffled)
    assert label_predictions(shuffled, windows, 0.5) == labeled


def test_huge_window_covers_everything_before_single_event():
    preds = [PredictionRecord("a", float(t), random.Random(t).random()) for t in range(0, 1000, 7)]
    windows = build_event_windows([EventRecord("a", 1000.0)], 1e9)
    assert all(p.actual_positive for p in label_predictions(preds, windows, 0.5))
