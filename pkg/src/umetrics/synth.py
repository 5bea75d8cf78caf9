"""Seeded synthetic prediction/event streams for tests and demos.

Uses numpy's PCG64 bit generator; each entity draws from its own child of
one ``SeedSequence``, so output is identical across platforms and does not
depend on generation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from umetrics.errors import ConfigError
from umetrics.files import events_csv, predictions_csv
from umetrics.timeline import EventRecord, PredictionRecord


@dataclass(frozen=True)
class ScoreModel:
    """How classifier scores are produced.

    Scores are ``baseline + noise * x_t`` where ``x_t`` is a unit-variance
    AR(1) process whose correlation time is ``persistence``; predictions
    within ``lift_window`` before an event get ``lift`` added. Sentinel
    events add ``sentinel_lift`` for ``sentinel_duration`` ending
    ``sentinel_lead`` before the event, then the signal resolves.
    """

    baseline: float = 0.2
    noise: float = 0.15
    lift: float = 0.4
    lift_window: float = 6 * 3600.0
    persistence: float = 1800.0
    sentinel_probability: float = 0.0
    sentinel_lift: float = 0.5
    sentinel_lead: float = 3 * 3600.0
    sentinel_duration: float = 600.0


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    entities: int = 10
    horizon: float = 48 * 3600.0
    prediction_cadence: float = 600.0
    event_rate: float = 0.5
    score_model: ScoreModel = field(default_factory=ScoreModel)
    start: int = 0

    def __post_init__(self) -> None:
        if self.prediction_cadence <= 0:
            raise ConfigError("prediction cadence must be positive")
        if self.horizon <= 0 or self.entities < 0 or self.event_rate < 0:
            raise ConfigError("horizon must be positive; entities and event rate non-negative")
        sm = self.score_model
        if sm.persistence <= 0 or not 0.0 <= sm.sentinel_probability <= 1.0:
            raise ConfigError("persistence must be positive and sentinel probability in [0, 1]")


def _entity_events(rng: np.random.Generator, spec: SynthSpec) -> np.ndarray:
    count = rng.poisson(spec.event_rate)
    times = np.unique(rng.integers(1, int(spec.horizon), size=count, endpoint=True))
    return times.astype(np.int64)


def _entity_scores(rng: np.random.Generator, spec: SynthSpec, times: np.ndarray, events: np.ndarray) -> np.ndarray:
    sm = spec.score_model
    phi = float(np.exp(-spec.prediction_cadence / sm.persistence))
    eps = rng.standard_normal(times.size)
    x = np.empty(times.size)
    if times.size:
        x[0] = eps[0]
        innov = np.sqrt(1.0 - phi * phi)
        for i in range(1, times.size):
            x[i] = phi * x[i - 1] + innov * eps[i]
    scores = sm.baseline + sm.noise * x
    sentinel = rng.random(events.size) < sm.sentinel_probability
    for t_event, is_sentinel in zip(events, sentinel):
        lead = t_event - times
        scores[(lead > 0) & (lead <= sm.lift_window)] += sm.lift
        if is_sentinel:
            on = (lead > sm.sentinel_lead) & (lead <= sm.sentinel_lead + sm.sentinel_duration)
            scores[on] += sm.sentinel_lift
    return np.clip(scores, 0.0, 1.0)


def generate_records(spec: SynthSpec) -> tuple[list[PredictionRecord], list[EventRecord]]:
    children = np.random.SeedSequence(spec.seed).spawn(spec.entities)
    width = len(str(max(spec.entities - 1, 0)))
    times = np.arange(0, int(spec.horizon), int(spec.prediction_cadence), dtype=np.int64)
    predictions: list[PredictionRecord] = []
    events: list[EventRecord] = []
    for i, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        entity = f"p{i:0{width}d}"
        ev_times = _entity_events(rng, spec)
        scores = _entity_scores(rng, spec, times, ev_times)
        for t, s in zip(times, scores):
            # round now so the written file and the in-memory records agree
            predictions.append(PredictionRecord(entity, float(spec.start + t), round(float(s), 6)))
        for j, t in enumerate(ev_times, start=1):
            events.append(EventRecord(entity, float(spec.start + t), f"e{j}"))
    return predictions, events


def generate(spec: SynthSpec) -> tuple[str, str]:
    """Predictions CSV and events CSV contents for ``spec``."""
    predictions, events = generate_records(spec)
    return predictions_csv(predictions), events_csv(events)
