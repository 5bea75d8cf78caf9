"""Count (c-) and utility (u-) confusion matrices and their metrics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional, Sequence

from umetrics.utility import Cell, ScoredPrediction


@dataclass(frozen=True)
class MetricValue:
    """A ratio that may be undefined (zero denominator)."""

    value: Optional[float]
    degenerate: bool = False

    @property
    def defined(self) -> bool:
        return self.value is not None

    def __float__(self) -> float:
        return math.nan if self.value is None else self.value

    def display(self, digits: int = 2) -> str:
        return "Undef" if self.value is None else f"{self.value:.{digits}f}"


def ratio(num: float, den: float) -> MetricValue:
    return MetricValue(None if den == 0 else num / den)


@dataclass(frozen=True)
class CMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "CMatrix") -> "CMatrix":
        return CMatrix(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict[str, int]:
        return asdict(self)


@dataclass(frozen=True)
class UMatrix:
    """Summed utility magnitudes per cell plus the four alternative columns."""

    bp: float = 0.0
    ap: float = 0.0
    bn: float = 0.0
    an: float = 0.0
    ain: float = 0.0
    aip: float = 0.0
    bin: float = 0.0
    bip: float = 0.0

    def __add__(self, other: "UMatrix") -> "UMatrix":
        return UMatrix(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    def get(self, cell: str) -> float:
        """Look up by display name, e.g. ``"BiP"``."""
        return getattr(self, cell.lower())


def accumulate(
    scored: Iterable[ScoredPrediction], suppressed_as_negative: bool = False
) -> tuple[CMatrix, UMatrix]:
    """Build both matrices from a scored stream.

    The c-matrix uses the raw predicted class unless ``suppressed_as_negative``
    is set, in which case snoozed predictions count as negatives. Cell sums
    use ``math.fsum`` so the result does not depend on record order.
    """
    counts: Counter[str] = Counter()
    parts: dict[str, list[float]] = {f.name: [] for f in fields(UMatrix)}
    for sp in scored:
        p = sp.labeled
        predicted = p.effective_positive if suppressed_as_negative else p.predicted_positive
        if predicted:
            counts["tp" if p.actual_positive else "fp"] += 1
        else:
            counts["fn" if p.actual_positive else "tn"] += 1
        if sp.cell is Cell.IRRELEVANT:
            continue
        parts[sp.cell.value.lower()].append(abs(sp.utility))
        if sp.alt_column is not None:
            parts[sp.alt_column.value.lower()].append(abs(sp.alt_utility))
    cm = CMatrix(counts["tp"], counts["fp"], counts["tn"], counts["fn"])
    um = UMatrix(**{name: math.fsum(vals) for name, vals in parts.items()})
    return cm, um


def merge(parts: Iterable[tuple[CMatrix, UMatrix]]) -> tuple[CMatrix, UMatrix]:
    """Cellwise sum of partial matrices from independent shards."""
    cm, um = CMatrix(), UMatrix()
    for c, u in parts:
        cm, um = cm + c, um + u
    return cm, um


C_METRIC_NAMES = ("sensitivity", "specificity", "fpr", "fnr", "ppv", "npv", "accuracy", "f1")


def c_metrics(m: CMatrix) -> dict[str, MetricValue]:
    return {
        "sensitivity": ratio(m.tp, m.tp + m.fn),
        "specificity": ratio(m.tn, m.tn + m.fp),
        "fpr": ratio(m.fp, m.fp + m.tn),
        "fnr": ratio(m.fn, m.fn + m.tp),
        "ppv": ratio(m.tp, m.tp + m.fp),
        "npv": ratio(m.tn, m.tn + m.fn),
        "accuracy": ratio(m.tp + m.tn, m.total),
        "f1": ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn),
    }


REALIZED_METRICS = ("u_bpr", "u_bnr", "u_apr", "u_anr", "u_precision", "u_npv")
POTENTIAL_METRICS = (
    "u_recall",
    "u_specificity",
    "u_adverse_positive_recall",
    "u_adverse_negative_recall",
    "u_recall_pos_preds",
    "u_recall_neg_preds",
)


def u_metrics(m: UMatrix, degenerate: Iterable[str] = ()) -> dict[str, MetricValue]:
    """Realized-utility and captured-potential metrics.

    Names listed in ``degenerate`` (see ``utility.degenerate_metrics``) are
    flagged on the returned values.
    """
    values = {
        "u_bpr": ratio(m.bp, m.bp + m.an),
        "u_bnr": ratio(m.bn, m.bn + m.ap),
        "u_apr": ratio(m.ap, m.ap + m.bn),
        "u_anr": ratio(m.an, m.an + m.bp),
        "u_precision": ratio(m.bp, m.bp + m.ap),
        "u_npv": ratio(m.bn, m.bn + m.an),
        "u_recall": ratio(m.bp, m.bp + m.bip),
        "u_specificity": ratio(m.bn, m.bn + m.bin),
        "u_adverse_positive_recall": ratio(m.ap, m.ap + m.aip),
        "u_adverse_negative_recall": ratio(m.an, m.an + m.ain),
        # worked-example form: restricted to positive predictions
        "u_recall_pos_preds": ratio(m.bp, m.bp + m.bin),
        "u_recall_neg_preds": ratio(m.bn, m.bn + m.bip),
    }
    flagged = set(degenerate)
    return {k: MetricValue(v.value, k in flagged) for k, v in values.items()}


def descriptive_metrics(scored: Sequence[ScoredPrediction], m: UMatrix, k: int = 9) -> dict[str, MetricValue]:
    """Alarm-burden descriptors.

    ``pct_zero_ap`` and ``pct_k_plus_ap`` are percentages (0-100) of the
    entities present in ``scored``.
    """
    ap_per_entity: Counter[str] = Counter()
    entities: set[str] = set()
    for sp in scored:
        entities.add(sp.entity_id)
        if sp.cell is Cell.AP:
            ap_per_entity[sp.entity_id] += 1
    n = len(entities)
    zero = sum(1 for e in entities if ap_per_entity[e] == 0)
    heavy = sum(1 for e in entities if ap_per_entity[e] >= k)
    precision = ratio(m.bp, m.bp + m.ap).value
    return {
        "count_ap": MetricValue(float(sum(ap_per_entity.values()))),
        "total_ap": MetricValue(m.ap),
        "total_bp": MetricValue(m.bp),
        "pct_zero_ap": MetricValue(None if n == 0 else 100.0 * zero / n),
        "pct_k_plus_ap": MetricValue(None if n == 0 else 100.0 * heavy / n),
        "adversity_ratio": ratio(m.ap, m.bp),
        "u_nns": MetricValue(None if not precision else 1.0 / precision),
    }


def count_alerts(scored: Iterable[ScoredPrediction]) -> int:
    """Number of positive predictions actually delivered (not snoozed)."""
    return sum(1 for sp in scored if sp.effective_positive)

