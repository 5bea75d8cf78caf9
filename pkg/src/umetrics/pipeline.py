"""One full evaluation: label -> snooze -> score -> matrices -> metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from umetrics.matrix import (
    CMatrix,
    MetricValue,
    UMatrix,
    accumulate,
    c_metrics,
    count_alerts,
    descriptive_metrics,
    u_metrics,
)
from umetrics.snooze import NONE, SnoozePolicy, apply_snooze
from umetrics.timeline import EventWindow, PredictionRecord, label_predictions
from umetrics.utility import Finding, ScenarioConfig, ScoredPrediction, degenerate_metrics, score_stream, validate_scenario


@dataclass
class Evaluation:
    scenario: ScenarioConfig
    snooze: SnoozePolicy
    cutoff: Optional[float]
    scored: list[ScoredPrediction]
    cmatrix: CMatrix
    cmatrix_snoozed: CMatrix
    umatrix: UMatrix
    c_metrics: dict[str, MetricValue]
    c_metrics_snoozed: dict[str, MetricValue]
    u_metrics: dict[str, MetricValue]
    descriptive: dict[str, MetricValue]
    findings: list[Finding] = field(default_factory=list)

    @property
    def alerts(self) -> int:
        return count_alerts(self.scored)


def evaluate(
    predictions: Sequence[PredictionRecord],
    windows: Sequence[EventWindow],
    scenario: ScenarioConfig,
    cutoff: Optional[float] = None,
    snooze: SnoozePolicy = NONE,
    k: int = 9,
) -> Evaluation:
    labeled = label_predictions(predictions, windows, cutoff)
    labeled = apply_snooze(labeled, snooze)
    scored = score_stream(labeled, scenario)
    cm, um = accumulate(scored)
    cm_snoozed, _ = accumulate(scored, suppressed_as_negative=True)
    findings = validate_scenario(
        scenario, {"addressable_bounds": any(w.addressable_bounds for w in windows)}
    )
    return Evaluation(
        scenario=scenario,
        snooze=snooze,
        cutoff=cutoff,
        scored=scored,
        cmatrix=cm,
        cmatrix_snoozed=cm_snoozed,
        umatrix=um,
        c_metrics=c_metrics(cm),
        c_metrics_snoozed=c_metrics(cm_snoozed),
        u_metrics=u_metrics(um, degenerate_metrics(scenario)),
        descriptive=descriptive_metrics(scored, um, k),
        findings=findings,
    )
