"""Event windows and truth labeling of prediction streams.

Every event owns a backward-looking window ``[start, end)`` that ends at the
event instant. Windows of one entity are serialized: a window never reaches
back past the previous event of the same entity, so each prediction belongs
to at most one event.
"""

from __future__ import annotations

import bisect
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

from umetrics.errors import ConfigError, InputError

_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d*)?|\.\d+)\s*([smhd]?)\s*$")
_UNIT_SECONDS = {"": 1.0, "s": 1.0, "m": 60.0, "h": 3600.0, "d": 86400.0}


def parse_duration(text: str | float | int) -> float:
    """Parse ``"40m"``, ``"12h"``, ``"30d"``, ``"90s"`` or a bare number of seconds."""
    if isinstance(text, (int, float)):
        return float(text)
    match = _DURATION_RE.match(text)
    if match is None:
        raise ConfigError(f"invalid duration {text!r} (expected e.g. 90s, 40m, 12h, 30d)")
    return float(match.group(1)) * _UNIT_SECONDS[match.group(2)]


def format_duration(seconds: float) -> str:
    """Shortest exact suffix form, e.g. ``2400 -> "40m"``."""
    for unit, size in (("d", 86400), ("h", 3600), ("m", 60)):
        if seconds >= size and seconds % size == 0:
            return f"{int(seconds // size)}{unit}"
    if float(seconds).is_integer():
        return f"{int(seconds)}s"
    return f"{seconds:g}s"


def parse_timestamp(value: str | float | int) -> float:
    """Integer/float epoch seconds or an RFC3339 string -> epoch seconds."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        ts = float(value)
    else:
        text = str(value).strip()
        try:
            ts = float(text)
        except ValueError:
            if text.endswith(("Z", "z")):
                text = text[:-1] + "+00:00"
            try:
                parsed = datetime.fromisoformat(text)
            except ValueError:
                raise InputError(f"unparseable timestamp {value!r}") from None
            if parsed.tzinfo is None:
                parsed = parsed.replace(tzinfo=timezone.utc)
            ts = parsed.timestamp()
    if not math.isfinite(ts):
        raise InputError(f"non-finite timestamp {value!r}")
    return ts


@dataclass(frozen=True)
class PredictionRecord:
    """One classifier output.

    ``label`` set means the source was pre-thresholded and the cutoff does not
    apply; ``score`` may still be present as the certainty value.
    """

    entity_id: str
    timestamp: float
    score: Optional[float] = None
    label: Optional[bool] = None

    def __post_init__(self) -> None:
        if self.score is None and self.label is None:
            raise InputError(f"prediction for {self.entity_id!r} at {self.timestamp} has neither score nor class")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise InputError(
                f"score {self.score!r} outside [0, 1] for {self.entity_id!r} at {self.timestamp}"
            )


@dataclass(frozen=True)
class EventRecord:
    entity_id: str
    timestamp: float
    event_id: Optional[str] = None


@dataclass(frozen=True)
class EventWindow:
    event_id: str
    entity_id: str
    start: float
    end: float
    nominal_length: float
    addressable_bounds: Optional[tuple[float, float]] = None

    def contains(self, t: float) -> bool:
        return self.start <= t < self.end

    def is_addressable(self, t: float) -> bool:
        """Lead time ``end - t`` falls inside ``(min_lead, max_lead)`` bounds (inclusive)."""
        if self.addressable_bounds is None:
            return True
        min_lead, max_lead = self.addressable_bounds
        return min_lead <= self.end - t <= max_lead


@dataclass(frozen=True)
class LabeledPrediction:
    record: PredictionRecord
    predicted_positive: bool
    actual_positive: bool
    event_id: Optional[str] = None
    ordinal_in_window: Optional[int] = None
    addressable: bool = True
    suppressed: bool = False

    @property
    def entity_id(self) -> str:
        return self.record.entity_id

    @property
    def timestamp(self) -> float:
        return self.record.timestamp

    @property
    def score(self) -> Optional[float]:
        return self.record.score

    @property
    def effective_positive(self) -> bool:
        """Class as delivered to the user: suppressed predictions act as negatives."""
        return self.predicted_positive and not self.suppressed

    @property
    def classic(self) -> str:
        """Classic assessment of the raw prediction: TP, FP, TN or FN."""
        if self.predicted_positive:
            return "TP" if self.actual_positive else "FP"
        return "FN" if self.actual_positive else "TN"


def _record_sort_key(rec: PredictionRecord) -> tuple:
    return (
        rec.timestamp,
        -1.0 if rec.score is None else rec.score,
        -1 if rec.label is None else int(rec.label),
    )


def assign_event_ids(events: Iterable[EventRecord]) -> list[EventRecord]:
    """Fill in missing event ids as ``e1, e2, ...`` in timestamp order per entity."""
    by_entity: dict[str, list[EventRecord]] = defaultdict(list)
    for ev in events:
        by_entity[ev.entity_id].append(ev)
    out: list[EventRecord] = []
    for entity in sorted(by_entity):
        evs = sorted(by_entity[entity], key=lambda e: e.timestamp)
        taken = {e.event_id for e in evs if e.event_id is not None}
        counter = 0
        for ev in evs:
            if ev.event_id is None:
                counter += 1
                while f"e{counter}" in taken:
                    counter += 1
                ev = EventRecord(ev.entity_id, ev.timestamp, f"e{counter}")
            out.append(ev)
    return out


def build_event_windows(
    events: Sequence[EventRecord],
    window_length: float,
    addressable_bounds: Optional[tuple[float, float]] = None,
) -> list[EventWindow]:
    """Build serialized event windows, sorted by entity then time.

    Window *i* of an entity spans ``[max(t_i - W, t_{i-1}), t_i)``.

    Raises:
        ConfigError: non-positive window length or inverted addressable bounds.
        InputError: two events of one entity share a timestamp or an event id.
    """
    if not window_length > 0:
        raise ConfigError(f"window length must be positive, got {window_length!r}")
    if addressable_bounds is not None:
        lo, hi = addressable_bounds
        if lo < 0 or hi < lo:
            raise ConfigError(f"invalid addressable bounds {addressable_bounds!r}")

    windows: list[EventWindow] = []
    by_entity: dict[str, list[EventRecord]] = defaultdict(list)
    for ev in assign_event_ids(events):
        by_entity[ev.entity_id].append(ev)

    for entity in sorted(by_entity):
        evs = by_entity[entity]
        seen_ids: set[str] = set()
        prev_t: Optional[float] = None
        for ev in evs:
            if prev_t is not None and ev.timestamp == prev_t:
                raise InputError(f"duplicate event for entity {entity!r} at {ev.timestamp}")
            if ev.event_id in seen_ids:
                raise InputError(f"duplicate event id {ev.event_id!r} for entity {entity!r}")
            seen_ids.add(ev.event_id)
            start = ev.timestamp - window_length
            if prev_t is not None:
                start = max(start, prev_t)
            windows.append(
                EventWindow(
                    event_id=ev.event_id,
                    entity_id=entity,
                    start=start,
                    end=ev.timestamp,
                    nominal_length=window_length,
                    addressable_bounds=addressable_bounds,
                )
            )
            prev_t = ev.timestamp
    return windows


def label_predictions(
    predictions: Sequence[PredictionRecord],
    windows: Sequence[EventWindow],
    cutoff: Optional[float] = None,
) -> list[LabeledPrediction]:
    """Threshold and truth-label predictions against serialized windows.

    A prediction is positive iff ``score >= cutoff``; pre-thresholded records
    keep their class. Output is grouped by entity (sorted ids) and ordered by
    timestamp within each entity.
    """
    if cutoff is not None and not (0.0 <= cutoff <= 1.0):
        raise ConfigError(f"cutoff {cutoff!r} outside [0, 1]")

    starts: dict[str, list[float]] = defaultdict(list)
    wins: dict[str, list[EventWindow]] = defaultdict(list)
    for w in sorted(windows, key=lambda w: (w.entity_id, w.start)):
        starts[w.entity_id].append(w.start)
        wins[w.entity_id].append(w)

    by_entity: dict[str, list[PredictionRecord]] = defaultdict(list)
    for rec in predictions:
        by_entity[rec.entity_id].append(rec)

    out: list[LabeledPrediction] = []
    for entity in sorted(by_entity):
        ordinals: dict[str, int] = defaultdict(int)
        ent_starts = starts.get(entity, [])
        ent_wins = wins.get(entity, [])
        for rec in sorted(by_entity[entity], key=_record_sort_key):
            if rec.label is not None:
                positive = rec.label
            elif cutoff is None:
                raise ConfigError("score-bearing predictions need a cutoff")
            else:
                positive = rec.score >= cutoff
            window = None
            idx = bisect.bisect_right(ent_starts, rec.timestamp) - 1
            if idx >= 0 and ent_wins[idx].contains(rec.timestamp):
                window = ent_wins[idx]
            if window is None:
                out.append(LabeledPrediction(rec, positive, False))
                continue
            ordinal = ordinals[window.event_id]
            ordinals[window.event_id] += 1
            out.append(
                LabeledPrediction(
                    rec,
                    positive,
                    True,
                    event_id=window.event_id,
                    ordinal_in_window=ordinal,
                    addressable=window.is_addressable(rec.timestamp),
                )
            )
    return out


def has_scores(predictions: Iterable[PredictionRecord]) -> bool:
    """True when every record carries a certainty score."""
    return all(p.score is not None for p in predictions)


def is_prethresholded(predictions: Iterable[PredictionRecord]) -> bool:
    """True when every record carries a fixed class, making cutoffs moot."""
    return all(p.label is not None for p in predictions)
