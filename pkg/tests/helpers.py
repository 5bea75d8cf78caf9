"""Shared fixtures data and seeded random stream builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from umetrics.timeline import EventRecord, PredictionRecord

DATA = Path(__file__).parent / "data"

# Two-event stream: classes N P P N P N N N at cutoff 0.5; event1 window holds
# predictions 1-4, event2 window holds 7-8 (window length 35).
TWO_EVENT_SCORES = [0.20, 0.80, 0.90, 0.30, 0.70, 0.10, 0.40, 0.20]
TWO_EVENT_TIMES = [10, 20, 30, 40, 60, 70, 120, 130]
TWO_EVENT_WINDOW = 35.0

# Bedside stream: one prediction every 10 minutes, events A and B, 40 minute window.
BEDSIDE_CLASSES = "N N P P P P N N P N P P P".split()
BEDSIDE_WINDOW = 2400.0


def two_event_records() -> tuple[list[PredictionRecord], list[EventRecord]]:
    preds = [PredictionRecord("pt1", float(t), s) for t, s in zip(TWO_EVENT_TIMES, TWO_EVENT_SCORES)]
    events = [EventRecord("pt1", 45.0, "event1"), EventRecord("pt1", 140.0, "event2")]
    return preds, events


def bedside_records() -> tuple[list[PredictionRecord], list[EventRecord]]:
    preds = [PredictionRecord("bed7", float(600 * i), label=c == "P") for i, c in enumerate(BEDSIDE_CLASSES)]
    events = [EventRecord("bed7", 6600.0, "A"), EventRecord("bed7", 7800.0, "B")]
    return preds, events


def random_stream(
    seed: int,
    n_entities: int | None = None,
    irregular: bool = True,
) -> tuple[list[PredictionRecord], list[EventRecord]]:
    """Small irregular multi-entity stream with clustered scores and a few events."""
    rng = np.random.default_rng(seed)
    n_entities = n_entities or int(rng.integers(1, 5))
    preds: list[PredictionRecord] = []
    events: list[EventRecord] = []
    for e in range(n_entities):
        n = int(rng.integers(1, 40))
        if irregular:
            gaps = rng.integers(1, 900, size=n)
        else:
            gaps = np.full(n, 600)
        times = np.cumsum(gaps)
        base = rng.random()
        scores = np.clip(base + 0.3 * rng.standard_normal(n), 0, 1).round(3)
        for t, s in zip(times, scores):
            preds.append(PredictionRecord(f"e{e}", float(t), float(s)))
        n_events = int(rng.integers(0, 4))
        ev_times = np.unique(rng.integers(1, int(times[-1]) + 1200, size=n_events))
        for t in ev_times:
            events.append(EventRecord(f"e{e}", float(t)))
    return preds, events
