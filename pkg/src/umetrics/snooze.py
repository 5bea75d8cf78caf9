"""Alert snoozing: suppress predictions after an emitted alert.

Suppressed predictions do not alert and are scored as negatives. Snooze
state is kept per entity, and only emitted alerts (non-suppressed positive
predictions) start or refresh a snooze.
"""

from __future__ import annotations

import dataclasses
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

from umetrics.errors import ConfigError
from umetrics.timeline import LabeledPrediction, format_duration, parse_duration

KINDS = ("none", "time", "while_positive", "until_more_certain", "combination")
_SYNTAX = {"none": "none", "while_positive": "while-positive", "until_more_certain": "until-more-certain"}


@dataclass(frozen=True)
class SnoozePolicy:
    kind: str = "none"
    duration: Optional[float] = None
    members: tuple["SnoozePolicy", ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown snooze kind {self.kind!r}")
        if self.kind == "time" and not (self.duration is not None and self.duration > 0):
            raise ConfigError("time snooze needs a positive duration")
        if self.kind == "combination":
            if not self.members:
                raise ConfigError("combination snooze needs at least one member")
            if any(m.kind in ("combination", "none") for m in self.members):
                raise ConfigError("combination members must be time, while_positive or until_more_certain")

    def __str__(self) -> str:
        if self.kind == "time":
            return f"time:{format_duration(self.duration)}"
        if self.kind == "combination":
            return "+".join(str(m) for m in self.members)
        return _SYNTAX[self.kind]

    @property
    def needs_scores(self) -> bool:
        return self.kind == "until_more_certain" or any(m.needs_scores for m in self.members)

    @property
    def time_span(self) -> float:
        """Longest time-based duration involved; 0 for purely event-driven policies."""
        if self.kind == "time":
            return self.duration
        return max((m.time_span for m in self.members), default=0.0)

    def sort_key(self) -> tuple:
        """Orders policies from 'shorter' to 'longer' snoozes."""
        return (self.time_span, self.kind != "none", str(self))


NONE = SnoozePolicy()


def time_snooze(duration: float | str) -> SnoozePolicy:
    return SnoozePolicy("time", parse_duration(duration))


def parse_snooze(text: str) -> SnoozePolicy:
    """Parse ``none``, ``time:40m``, ``while-positive``, ``until-more-certain``
    or a ``+``-joined combination such as ``time:40m+while-positive``."""
    parts = [p.strip() for p in text.strip().split("+")]
    policies = []
    for part in parts:
        key = part.lower().replace("_", "-")
        if key == "none":
            policies.append(NONE)
        elif key == "while-positive":
            policies.append(SnoozePolicy("while_positive"))
        elif key == "until-more-certain":
            policies.append(SnoozePolicy("until_more_certain"))
        elif key.startswith("time:"):
            policies.append(time_snooze(part.split(":", 1)[1]))
        else:
            raise ConfigError(f"invalid snooze policy {part!r}")
    if len(policies) == 1:
        return policies[0]
    if any(p.kind == "none" for p in policies):
        raise ConfigError("'none' cannot be combined with other snooze policies")
    return SnoozePolicy("combination", members=tuple(policies))


class _TimeState:
    def __init__(self, duration: float) -> None:
        self.duration = duration
        self.started: Optional[float] = None

    def suppresses(self, p: LabeledPrediction) -> bool:
        return self.started is not None and self.started < p.timestamp < self.started + self.duration

    def emitted(self, p: LabeledPrediction) -> None:
        self.started = p.timestamp


class _WhilePositiveState:
    def __init__(self) -> None:
        self.active = False

    def suppresses(self, p: LabeledPrediction) -> bool:
        if not p.predicted_positive:
            self.active = False
            return False
        return self.active

    def emitted(self, p: LabeledPrediction) -> None:
        self.active = True


class _UntilMoreCertainState:
    def __init__(self) -> None:
        self.reference: Optional[float] = None

    def suppresses(self, p: LabeledPrediction) -> bool:
        if not p.predicted_positive or self.reference is None:
            return False
        return p.score <= self.reference

    def emitted(self, p: LabeledPrediction) -> None:
        self.reference = p.score


def _states(policy: SnoozePolicy) -> list:
    if policy.kind == "time":
        return [_TimeState(policy.duration)]
    if policy.kind == "while_positive":
        return [_WhilePositiveState()]
    if policy.kind == "until_more_certain":
        return [_UntilMoreCertainState()]
    if policy.kind == "combination":
        return [s for m in policy.members for s in _states(m)]
    return []


def apply_snooze(labeled: Sequence[LabeledPrediction], policy: SnoozePolicy) -> list[LabeledPrediction]:
    """Mark suppressed predictions; input order is preserved.

    Within a time snooze every prediction (negatives too) is marked; the
    event-driven kinds only mark positives. For combinations, a prediction
    is suppressed when any member suppresses it, and every emitted alert
    updates all members.

    Raises:
        ConfigError: ``until_more_certain`` on records without scores.
    """
    if policy.needs_scores and any(p.score is None for p in labeled):
        raise ConfigError("until-more-certain snooze needs score-bearing predictions")
    if policy.kind == "none":
        return [dataclasses.replace(p, suppressed=False) if p.suppressed else p for p in labeled]

    by_entity: dict[str, list[int]] = defaultdict(list)
    for i, p in enumerate(labeled):
        by_entity[p.entity_id].append(i)

    out = list(labeled)
    for idxs in by_entity.values():
        idxs.sort(key=lambda i: labeled[i].timestamp)
        states = _states(policy)
        for i in idxs:
            p = labeled[i]
            # every member must observe every prediction, so no short-circuit
            suppressed = any([s.suppresses(p) for s in states])
            if suppressed != p.suppressed:
                out[i] = dataclasses.replace(p, suppressed=suppressed)
            if p.predicted_positive and not suppressed:
                for s in states:
                    s.emitted(p)
    return out


def emitted_alerts(labeled: Sequence[LabeledPrediction]) -> list[LabeledPrediction]:
    return [p for p in labeled if p.effective_positive]
