"""Utility scenarios and per-prediction utility scoring.

Each prediction receives two numbers in [-1, 1]: the utility it actually
delivered and the utility the opposite prediction would have delivered.
Its row in the u-matrix is the (effective) predicted class; its column is
the sign of the utility, or for zero utility the opposite sign of the
alternative.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

from umetrics.errors import ConfigError
from umetrics.timeline import LabeledPrediction

logger = logging.getLogger(__name__)


class Cell(str, enum.Enum):
    BP = "BP"
    AP = "AP"
    BN = "BN"
    AN = "AN"
    IRRELEVANT = "IRRELEVANT"


class AltColumn(str, enum.Enum):
    AIN = "AiN"
    AIP = "AiP"
    BIN = "BiN"
    BIP = "BiP"


_UTILITY_FIELDS = (
    "first_tp_utility",
    "redundant_tp_utility",
    "fp_utility",
    "fn_utility",
    "tn_utility",
    "first_tp_alt",
    "redundant_tp_alt",
    "first_missed_fn_alt",
    "redundant_fn_alt_captured",
    "redundant_fn_alt_uncaptured",
    "fp_alt",
    "tn_alt",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Utility rule set for one workflow.

    ``*_alt`` fields give the utility the opposite prediction would have had.
    ``changed_only`` models a results display: a prediction with the same
    delivered class as its predecessor is irrelevant.
    """

    name: str = "custom"
    first_tp_utility: float = 1.0
    redundant_tp_utility: float = 0.0
    fp_utility: float = -1.0
    fn_utility: float = 0.0
    tn_utility: float = 0.0
    first_tp_alt: float = 0.0
    redundant_tp_alt: float = 0.0
    first_missed_fn_alt: float = 1.0
    redundant_fn_alt_captured: float = 0.0
    redundant_fn_alt_uncaptured: float = 0.0
    fp_alt: float = 0.0
    tn_alt: float = -1.0
    changed_only: bool = False

    def __post_init__(self) -> None:
        for name in _UTILITY_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"scenario field {name} must be a number, got {value!r}")
            if not (-1.0 <= value <= 1.0):
                raise ConfigError(f"scenario field {name}={value} outside [-1, 1]")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        """Build from a mapping; an optional ``base`` key names a built-in to start from."""
        data = dict(data)
        base = data.pop("base", None)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown scenario fields: {', '.join(sorted(unknown))}")
        if base is not None:
            return dataclasses.replace(builtin_scenario(base), **data)
        return cls(**data)


SCENARIO_A = ScenarioConfig(
    name="A",
    first_tp_utility=1.0,
    redundant_tp_utility=1.0,
    fp_utility=-1.0,
    fn_utility=-1.0,
    tn_utility=1.0,
    first_tp_alt=-1.0,
    redundant_tp_alt=-1.0,
    first_missed_fn_alt=1.0,
    redundant_fn_alt_captured=1.0,
    redundant_fn_alt_uncaptured=1.0,
    fp_alt=1.0,
    tn_alt=-1.0,
)

SCENARIO_B = ScenarioConfig(
    name="B",
    redundant_tp_utility=0.1,
    redundant_fn_alt_captured=0.1,
    redundant_fn_alt_uncaptured=0.1,
    tn_alt=0.0,
)

SCENARIO_C = ScenarioConfig(
    name="C",
    redundant_tp_utility=-0.2,
    redundant_fn_alt_captured=-0.2,
    redundant_fn_alt_uncaptured=-0.2,
    tn_alt=-1.0,
)

# Alarm-centric time-snooze example: redundant TPs, excess FNs and TNs all score 0.
SCENARIO_ALARM = ScenarioConfig(name="alarm", tn_alt=0.0)

BUILTIN_SCENARIOS = {s.name: s for s in (SCENARIO_A, SCENARIO_B, SCENARIO_C, SCENARIO_ALARM)}
# historical name kept for command-line compatibility
BUILTIN_SCENARIOS["fig10"] = SCENARIO_ALARM


def builtin_scenario(name: str) -> ScenarioConfig:
    try:
        return BUILTIN_SCENARIOS[name]
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; built-ins are {', '.join(BUILTIN_SCENARIOS)}"
        ) from None


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """A built-in name (``A``, ``B``, ``C``, ``alarm``/``fig10``) or a path to a JSON file."""
    if name_or_path in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name_or_path]
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(f"unknown scenario {name_or_path!r}: not a built-in and no such file")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: bad JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: scenario must be a JSON object")
    data.setdefault("name", path.stem)
    return ScenarioConfig.from_dict(data)


def classify(positive: bool, utility: float, alt: float) -> tuple[Cell, Optional[AltColumn]]:
    """Place one prediction in the u-matrix.

    Returns the net-utility cell and the alternative column its ``alt``
    magnitude feeds, or None when the alternative has no column (zero, or
    the same sign as a nonzero utility).
    """
    if utility > 0:
        beneficial = True
    elif utility < 0:
        beneficial = False
    elif alt < 0:
        beneficial = True
    elif alt > 0:
        beneficial = False
    else:
        return Cell.IRRELEVANT, None

    if beneficial:
        cell = Cell.BP if positive else Cell.BN
        column = (AltColumn.AIN if positive else AltColumn.AIP) if alt < 0 else None
    else:
        cell = Cell.AP if positive else Cell.AN
        column = (AltColumn.BIN if positive else AltColumn.BIP) if alt > 0 else None
    return cell, column


@dataclass(frozen=True)
class ScoredPrediction:
    labeled: LabeledPrediction
    utility: float
    alt_utility: float
    cell: Cell
    alt_column: Optional[AltColumn]

    @property
    def entity_id(self) -> str:
        return self.labeled.entity_id

    @property
    def timestamp(self) -> float:
        return self.labeled.timestamp

    @property
    def suppressed(self) -> bool:
        return self.labeled.suppressed

    @property
    def effective_positive(self) -> bool:
        return self.labeled.effective_positive

    @property
    def alt_dropped(self) -> bool:
        """Nonzero alternative with the same sign as the utility: it has no column."""
        return self.alt_utility != 0 and self.alt_column is None


def _score_entity(rows: list[LabeledPrediction], sc: ScenarioConfig) -> list[tuple[float, float]]:
    captured: set[str] = set()
    for p in rows:
        if p.actual_positive and p.addressable and p.effective_positive:
            captured.add(p.event_id)

    values: list[tuple[float, float]] = []
    first_tp_done: set[str] = set()
    first_fn_done: set[str] = set()
    for p in rows:
        if p.actual_positive:
            if not p.addressable:
                values.append((0.0, 0.0))
            elif p.effective_positive:
                if p.event_id in first_tp_done:
                    values.append((sc.redundant_tp_utility, sc.redundant_tp_alt))
                else:
                    first_tp_done.add(p.event_id)
                    values.append((sc.first_tp_utility, sc.first_tp_alt))
            elif p.event_id in captured:
                values.append((sc.fn_utility, sc.redundant_fn_alt_captured))
            elif p.event_id in first_fn_done:
                values.append((sc.fn_utility, sc.redundant_fn_alt_uncaptured))
            else:
                first_fn_done.add(p.event_id)
                values.append((sc.fn_utility, sc.first_missed_fn_alt))
        elif p.effective_positive:
            values.append((sc.fp_utility, sc.fp_alt))
        else:
            values.append((sc.tn_utility, sc.tn_alt))

    if sc.changed_only:
        for i in range(1, len(rows)):
            if rows[i].effective_positive == rows[i - 1].effective_positive:
                values[i] = (0.0, 0.0)
    return values


def score_stream(labeled: Sequence[LabeledPrediction], scenario: ScenarioConfig) -> list[ScoredPrediction]:
    """Assign utilities and u-matrix cells to a labeled (possibly snoozed) stream.

    Suppressed predictions are scored as negatives. The first delivered
    positive inside an addressable part of a window captures its event.
    Output order follows the input order.
    """
    by_entity: dict[str, list[int]] = defaultdict(list)
    for i, p in enumerate(labeled):
        by_entity[p.entity_id].append(i)

    out: list[Optional[ScoredPrediction]] = [None] * len(labeled)
    dropped = 0
    for idxs in by_entity.values():
        idxs.sort(key=lambda i: labeled[i].timestamp)
        rows = [labeled[i] for i in idxs]
        for i, p, (u, alt) in zip(idxs, rows, _score_entity(rows, scenario)):
            cell, column = classify(p.effective_positive, u, alt)
            sp = ScoredPrediction(p, u, alt, cell, column)
            dropped += sp.alt_dropped
            out[i] = sp
    if dropped:
        logger.warning("%d alternative utilities share the sign of their utility and were dropped", dropped)
    return out  # type: ignore[return-value]


# --- scenario validation -------------------------------------------------

ALL_CELLS = ("BP", "AP", "BN", "AN", "AiN", "AiP", "BiN", "BiP")

METRIC_CELLS: dict[str, tuple[str, str]] = {
    "u_bpr": ("BP", "AN"),
    "u_bnr": ("BN", "AP"),
    "u_apr": ("AP", "BN"),
    "u_anr": ("AN", "BP"),
    "u_precision": ("BP", "AP"),
    "u_npv": ("BN", "AN"),
    "u_recall": ("BP", "BiP"),
    "u_specificity": ("BN", "BiN"),
    "u_adverse_positive_recall": ("AP", "AiP"),
    "u_adverse_negative_recall": ("AN", "AiN"),
    "u_recall_pos_preds": ("BP", "BiN"),
    "u_recall_neg_preds": ("BN", "BiP"),
}


@dataclass(frozen=True)
class Finding:
    level: str  # "warning" | "error"
    message: str
    cells: tuple[str, ...] = ()
    metrics: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {"level": self.level, "message": self.message, "cells": list(self.cells), "metrics": list(self.metrics)}


def scenario_cases(sc: ScenarioConfig) -> list[tuple[str, bool, float, float]]:
    """Every (situation, predicted positive, utility, alternative) the scenario can produce."""
    return [
        ("first true positive", True, sc.first_tp_utility, sc.first_tp_alt),
        ("redundant true positive", True, sc.redundant_tp_utility, sc.redundant_tp_alt),
        ("first false negative of a missed event", False, sc.fn_utility, sc.first_missed_fn_alt),
        ("later false negative of a missed event", False, sc.fn_utility, sc.redundant_fn_alt_uncaptured),
        ("false negative of a captured event", False, sc.fn_utility, sc.redundant_fn_alt_captured),
        ("false positive", True, sc.fp_utility, sc.fp_alt),
        ("true negative", False, sc.tn_utility, sc.tn_alt),
    ]


def reachable_cells(sc: ScenarioConfig) -> set[str]:
    """u-matrix cells (incl. alternative columns) that can receive nonzero mass."""
    cells: set[str] = set()
    for _, positive, u, alt in scenario_cases(sc):
        cell, column = classify(positive, u, alt)
        if cell is not Cell.IRRELEVANT and u != 0:
            cells.add(cell.value)
        if column is not None:
            cells.add(column.value)
    return cells


def degenerate_metrics(sc: ScenarioConfig) -> set[str]:
    zero = set(ALL_CELLS) - reachable_cells(sc)
    return {m for m, deps in METRIC_CELLS.items() if zero.intersection(deps)}


def validate_scenario(scenario: ScenarioConfig, dataset_summary: Optional[dict[str, Any]] = None) -> list[Finding]:
    """Check a scenario against the two validity rules for u-metrics.

    Warnings name cells that can never hold nonzero mass and the metrics that
    depend on them (those can only be 0, 1 or undefined). An error is raised
    as a finding when an event can be captured with zero positive utility.
    ``dataset_summary`` may carry ``{"addressable_bounds": bool}``.
    """
    findings: list[Finding] = []
    zero = tuple(c for c in ALL_CELLS if c not in reachable_cells(scenario))
    if zero:
        metrics = tuple(m for m in METRIC_CELLS if set(METRIC_CELLS[m]) & set(zero))
        findings.append(
            Finding(
                "warning",
                f"cells {', '.join(zero)} are always zero; metrics {', '.join(metrics)} "
                "can only be 0, 1 or undefined and should not be used",
                cells=zero,
                metrics=metrics,
            )
        )
    for situation, positive, u, alt in scenario_cases(scenario):
        if u != 0 and alt != 0 and (u > 0) == (alt > 0):
            findings.append(
                Finding(
                    "warning",
                    f"{situation}: alternative {alt:+g} has the same sign as utility {u:+g} and is dropped",
                )
            )
    if scenario.first_tp_utility == 0:
        findings.append(
            Finding(
                "error",
                "the first true positive of an event has zero utility: an event can be captured "
                "without any nonzero positive utility, so u-Recall can reach 100% while events are missed",
            )
        )
    if scenario.changed_only:
        findings.append(
            Finding(
                "warning",
                "changed_only forces repeated classes to zero utility; an event whose positives all "
                "continue an earlier positive run earns no positive utility",
            )
        )
    if dataset_summary and dataset_summary.get("addressable_bounds"):
        findings.append(
            Finding(
                "warning",
                "predictions outside the addressable bounds score zero; an event whose positives all "
                "fall outside them earns no positive utility",
            )
        )
    return findings
