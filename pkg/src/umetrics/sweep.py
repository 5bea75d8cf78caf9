"""Cutoff x snooze performance tables and what is derived from them:
operating-point selection, u-PR curves, AUC-uPRC, alarm burden and NNB."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, Optional, Sequence

from umetrics.errors import ConfigError, InputError
from umetrics.pipeline import evaluate
from umetrics.snooze import NONE, SnoozePolicy, parse_snooze, time_snooze
from umetrics.timeline import (
    EventRecord,
    EventWindow,
    PredictionRecord,
    build_event_windows,
    is_prethresholded,
)
from umetrics.utility import ScenarioConfig

logger = logging.getLogger(__name__)


def default_cutoff_grid() -> list[float]:
    return [round(0.05 * i, 2) for i in range(21)]


def default_snooze_grid(window_length: float, addressable_max_lead: Optional[float] = None) -> list[SnoozePolicy]:
    """No snooze, durations shorter and longer than the event window, the
    window length itself, and the addressable window length when known."""
    durations = {window_length / 4, window_length / 2, window_length, 2 * window_length}
    if addressable_max_lead:
        durations.add(addressable_max_lead)
    return [NONE] + [time_snooze(d) for d in sorted(durations)]


@dataclass(frozen=True)
class Constraint:
    """Exactly one of a u-Recall floor or an Adversity Ratio ceiling."""

    min_u_recall: Optional[float] = None
    max_adversity_ratio: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.min_u_recall is None) == (self.max_adversity_ratio is None):
            raise ConfigError("give exactly one of min_u_recall or max_adversity_ratio")
        bound = self.min_u_recall if self.min_u_recall is not None else self.max_adversity_ratio
        if bound < 0:
            raise ConfigError("constraint bound must be >= 0")

    def __str__(self) -> str:
        if self.min_u_recall is not None:
            return f"u_recall >= {self.min_u_recall:g}"
        return f"adversity_ratio <= {self.max_adversity_ratio:g}"


@dataclass
class SweepConfig:
    scenario: ScenarioConfig
    window_length: float
    cutoff_grid: list[float] = field(default_factory=default_cutoff_grid)
    snooze_grid: list[SnoozePolicy] = field(default_factory=lambda: [NONE])
    constraint: Optional[Constraint] = None
    addressable_bounds: Optional[tuple[float, float]] = None

    def __post_init__(self) -> None:
        if not self.cutoff_grid or not self.snooze_grid:
            raise ConfigError("cutoff and snooze grids must be non-empty")
        if any(not 0.0 <= c <= 1.0 for c in self.cutoff_grid):
            raise ConfigError("cutoffs must lie in [0, 1]")
        if list(self.cutoff_grid) != sorted(self.cutoff_grid):
            raise ConfigError("cutoff grid must be ascending")


@dataclass(frozen=True)
class PerformanceRow:
    snooze: SnoozePolicy
    cutoff: Optional[float]
    u_recall: Optional[float] = None
    u_precision: Optional[float] = None
    count_ap: Optional[float] = None
    total_ap: Optional[float] = None
    total_bp: Optional[float] = None
    adversity_ratio: Optional[float] = None
    pct_zero_ap: Optional[float] = None
    pct_k_plus_ap: Optional[float] = None
    alerts: Optional[int] = None


_METRIC_COLUMNS = [f.name for f in fields(PerformanceRow)][2:]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_opt(value: Optional[str], kind=float):
    if value is None or value.strip() == "" or value.strip().lower() in ("undef", "null", "none"):
        return None
    return kind(value)


@dataclass
class PerformanceTable:
    rows: list[PerformanceRow]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def snoozes(self) -> list[SnoozePolicy]:
        seen: dict[str, SnoozePolicy] = {}
        for r in self.rows:
            seen.setdefault(str(r.snooze), r.snooze)
        return list(seen.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["snooze", "cutoff"] + _METRIC_COLUMNS)
        for r in self.rows:
            writer.writerow([str(r.snooze), _fmt(r.cutoff)] + [_fmt(getattr(r, c)) for c in _METRIC_COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PerformanceTable":
        """Parse a table; any metric column may be absent (e.g. a hand-copied
        excerpt with just snooze, cutoff, u_recall and adversity_ratio)."""
        reader = csv.DictReader(io.StringIO(text))
        if not reader.fieldnames or "snooze" not in reader.fieldnames:
            raise InputError("performance table needs a 'snooze' column")
        rows = []
        for n, raw in enumerate(reader, start=2):
            try:
                values = {
                    c: _parse_opt(raw.get(c), int if c == "alerts" else float)
                    for c in _METRIC_COLUMNS
                }
                rows.append(PerformanceRow(parse_snooze(raw["snooze"]), _parse_opt(raw.get("cutoff")), **values))
            except ValueError as exc:
                raise InputError(f"performance table line {n}: {exc}") from None
        return cls(rows)


def _evaluate_cell(args) -> PerformanceRow:
    predictions, windows, scenario, cutoff, snooze = args
    ev = evaluate(predictions, windows, scenario, cutoff, snooze)
    u, d = ev.u_metrics, ev.descriptive
    return PerformanceRow(
        snooze=snooze,
        cutoff=cutoff,
        u_recall=u["u_recall"].value,
        u_precision=u["u_precision"].value,
        count_ap=d["count_ap"].value,
        total_ap=d["total_ap"].value,
        total_bp=d["total_bp"].value,
        adversity_ratio=d["adversity_ratio"].value,
        pct_zero_ap=d["pct_zero_ap"].value,
        pct_k_plus_ap=d["pct_k_plus_ap"].value,
        alerts=ev.alerts,
    )


def run_sweep(
    predictions: Sequence[PredictionRecord],
    events: Sequence[EventRecord],
    config: SweepConfig,
    workers: int = 1,
) -> PerformanceTable:
    """Evaluate every (snooze, cutoff) grid point.

    Rows come out snooze-major in grid order regardless of ``workers``.
    Pre-thresholded input ignores cutoffs and yields one row per snooze.
    """
    windows = build_event_windows(events, config.window_length, config.addressable_bounds)
    cutoffs: list[Optional[float]] = [None] if is_prethresholded(predictions) else list(config.cutoff_grid)
    cells = [
        (predictions, windows, config.scenario, c, s) for s in config.snooze_grid for c in cutoffs
    ]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_cell, cells))
    else:
        rows = [_evaluate_cell(c) for c in cells]
    return PerformanceTable(rows)


# --- operating point selection ---------------------------------------------


@dataclass
class OperatingPoint:
    constraint: Constraint
    row: Optional[PerformanceRow]
    nearest: list[PerformanceRow] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.row is not None


def _satisfies(row: PerformanceRow, con: Constraint) -> bool:
    if row.u_recall is None or row.adversity_ratio is None:
        return False
    if con.min_u_recall is not None:
        return row.u_recall >= con.min_u_recall
    return row.adversity_ratio <= con.max_adversity_ratio


def _cutoff_key(row: PerformanceRow) -> float:
    return -1.0 if row.cutoff is None else row.cutoff


def select_operating_point(table: PerformanceTable | Iterable[PerformanceRow], constraint: Constraint, n_nearest: int = 3) -> OperatingPoint:
    """Best row under the constraint.

    With a u-Recall floor the lowest Adversity Ratio wins; with an Adversity
    Ratio ceiling the highest u-Recall wins. Remaining ties prefer higher
    u-Recall (resp. lower Adversity Ratio), then the longer snooze, then the
    higher cutoff. When nothing qualifies, ``row`` is None and ``nearest``
    lists the rows closest to meeting the constraint.
    """
    rows = list(table)
    if not rows:
        raise InputError("empty performance table")
    ok = [r for r in rows if _satisfies(r, constraint)]
    if ok:
        if constraint.min_u_recall is not None:
            key = lambda r: (r.adversity_ratio, -r.u_recall)
        else:
            key = lambda r: (-r.u_recall, r.adversity_ratio)
        best = min(ok, key=lambda r: key(r) + (_neg_sort_key(r.snooze), -_cutoff_key(r)))
        return OperatingPoint(constraint, best)

    def gap(r: PerformanceRow) -> float:
        if constraint.min_u_recall is not None:
            return math.inf if r.u_recall is None else constraint.min_u_recall - r.u_recall
        return math.inf if r.adversity_ratio is None else r.adversity_ratio - constraint.max_adversity_ratio

    nearest = sorted(rows, key=gap)[:n_nearest]
    return OperatingPoint(constraint, None, nearest)


def _neg_sort_key(policy: SnoozePolicy) -> tuple:
    span, not_none, name = policy.sort_key()
    # lexicographic "descending" on (span, not_none); name kept ascending for determinism
    return (-span, -int(not_none), name)


def best_per_snooze(table: PerformanceTable, constraint: Constraint) -> list[OperatingPoint]:
    """One optimal cutoff per snooze policy (the condensed table view)."""
    out = []
    for policy in table.snoozes():
        rows = [r for r in table if str(r.snooze) == str(policy)]
        out.append(select_operating_point(rows, constraint))
    return out


# --- u-PR curve -------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    cutoff: Optional[float]
    u_recall: float
    u_precision: float


@dataclass
class Curve:
    points: list[CurvePoint]
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["cutoff", "u_recall", "u_precision"])
        for p in self.points:
            writer.writerow([_fmt(p.cutoff), repr(p.u_recall), repr(p.u_precision)])
        return buf.getvalue()


def upr_curve(
    predictions: Sequence[PredictionRecord],
    windows: Sequence[EventWindow],
    snooze: SnoozePolicy,
    scenario: ScenarioConfig,
    cutoff_grid: Sequence[float] | None = None,
) -> Curve:
    """(u-Recall, u-Precision) per cutoff; undefined points are dropped with a note."""
    grid: list[Optional[float]]
    if is_prethresholded(predictions):
        grid = [None]
    else:
        grid = list(cutoff_grid) if cutoff_grid is not None else default_cutoff_grid()
    points, notes = [], []
    for c in grid:
        ev = evaluate(predictions, windows, scenario, c, snooze)
        r, p = ev.u_metrics["u_recall"].value, ev.u_metrics["u_precision"].value
        if r is None or p is None:
            notes.append(f"cutoff {c}: u_recall={r} u_precision={p} undefined, point dropped")
            continue
        points.append(CurvePoint(c, r, p))
    if not points:
        raise InputError("every curve point is undefined")
    return Curve(points, notes)


def auc_uprc(points: Iterable[CurvePoint | tuple[float, float]]) -> float:
    """Trapezoidal area under u-Precision vs u-Recall over the achieved recall span.

    No extrapolation to recall 0 or 1; a single point has zero area.
    """
    pts = sorted(
        (p.u_recall, p.u_precision) if isinstance(p, CurvePoint) else (float(p[0]), float(p[1]))
        for p in points
    )
    if not pts:
        raise InputError("auc_uprc needs at least one point")
    if len(pts) == 1:
        logger.warning("single u-PR point: area is 0")
        return 0.0
    return math.fsum(
        (r1 - r0) * (p0 + p1) / 2.0 for (r0, p0), (r1, p1) in zip(pts, pts[1:])
    )


# --- alarm burden and NNB ---------------------------------------------------


@dataclass(frozen=True)
class BurdenParams:
    period_alarm_count: float
    period_length: float
    bed_count: float
    patients_per_caregiver: float
    shift_length: float

    def __post_init__(self) -> None:
        if self.period_alarm_count < 0:
            raise ConfigError("alarm count must be >= 0")
        for name in ("period_length", "bed_count", "patients_per_caregiver", "shift_length"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")


def burden(params: BurdenParams) -> float:
    """Expected alarms per caregiver per shift."""
    caregivers_per_shift = params.bed_count / params.patients_per_caregiver
    shifts_in_period = params.period_length / params.shift_length
    return params.period_alarm_count / (caregivers_per_shift * shifts_in_period)


def nnb(u_precision: Optional[float], nnt: float) -> Optional[float]:
    """Number needed to benefit: ``(1 / u_precision) * nnt``; None if undefined."""
    if nnt <= 0:
        raise ConfigError("nnt must be positive")
    if not u_precision:
        return None
    u_nns = 1.0 / u_precision
    return u_nns * nnt
