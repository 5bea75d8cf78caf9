"""Report rendering (JSON document, plaintext tables, audit trail) and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

from umetrics import __version__
from umetrics.files import format_timestamp
from umetrics.matrix import MetricValue
from umetrics.pipeline import Evaluation
from umetrics.utility import Finding

NOTES = [
    "Alternative utilities are booked by the row of the prediction as made: beneficial "
    "positives feed AiN, beneficial negatives feed AiP, adverse positives feed BiN, "
    "adverse negatives feed BiP. Negatives of a captured event whose alternative is "
    "beneficial therefore land in AiP; tables that book part of that mass under AiN "
    "(e.g. 1.4/0.2 instead of 1.6/0.0) use a different convention with the same total.",
    "u_recall_pos_preds = BP/(BP+BiN); u_recall_neg_preds = BN/(BN+BiP).",
    "The first delivered (non-snoozed) positive inside an event window is the one credited "
    "as the first true positive.",
]

_C_LABELS = [
    ("sensitivity", "Sensitivity (TP/(TP+FN))"),
    ("specificity", "Specificity (TN/(TN+FP))"),
    ("ppv", "PPV (TP/(TP+FP))"),
    ("npv", "NPV (TN/(TN+FN))"),
    ("fpr", "FPR (FP/(FP+TN))"),
    ("fnr", "FNR (FN/(FN+TP))"),
]
_R_LABELS = [
    ("u_bpr", "u-BPR (BP/(BP+AN))"),
    ("u_bnr", "u-BNR (BN/(BN+AP))"),
    ("u_precision", "u-Precision (BP/(BP+AP))"),
    ("u_npv", "u-NPV (BN/(BN+AN))"),
    ("u_apr", "u-APR (AP/(AP+BN))"),
    ("u_anr", "u-ANR (AN/(AN+BP))"),
]
_P_LABELS = [
    ("u_recall", "u-Recall (BP/(BP+BiP))"),
    ("u_specificity", "u-Specificity (BN/(BN+BiN))"),
    ("u_recall_pos_preds", "u-Recall pos. preds (BP/(BP+BiN))"),
    ("u_recall_neg_preds", "u-Recall neg. preds (BN/(BN+BiP))"),
    ("u_adverse_positive_recall", "u-Adv. Pos. Recall (AP/(AP+AiP))"),
    ("u_adverse_negative_recall", "u-Adv. Neg. Recall (AN/(AN+AiN))"),
]


def metric_dict(metrics: Mapping[str, MetricValue]) -> dict[str, Optional[float]]:
    return {k: v.value for k, v in metrics.items()}


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_manifest(inputs: Mapping[str, Optional[str | Path]], config: Mapping[str, Any]) -> dict[str, Any]:
    """Run manifest with input digests. ``digest`` covers everything except
    ``created``, so reruns on the same inputs reproduce it."""
    manifest: dict[str, Any] = {
        "tool": "umetrics",
        "version": __version__,
        "inputs": {
            role: {"path": str(path), "sha256": sha256_file(path)}
            for role, path in inputs.items()
            if path is not None
        },
        "config": dict(config),
    }
    manifest["digest"] = hashlib.sha256(canonical_json(manifest).encode()).hexdigest()
    manifest["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return manifest


def evaluation_document(ev: Evaluation, manifest_digest: Optional[str] = None) -> dict[str, Any]:
    doc = {
        "scenario": ev.scenario.to_dict(),
        "cutoff": ev.cutoff,
        "snooze": str(ev.snooze),
        "c_matrix": ev.cmatrix.to_dict(),
        "c_matrix_snoozed": ev.cmatrix_snoozed.to_dict(),
        "u_matrix": ev.umatrix.to_dict(),
        "c_metrics": metric_dict(ev.c_metrics),
        "c_metrics_snoozed": metric_dict(ev.c_metrics_snoozed),
        "u_metrics": metric_dict(ev.u_metrics),
        "degenerate_metrics": sorted(k for k, v in ev.u_metrics.items() if v.degenerate),
        "descriptive": metric_dict(ev.descriptive),
        "alerts": ev.alerts,
        "findings": [f.to_dict() for f in ev.findings],
        "notes": NOTES,
    }
    if manifest_digest is not None:
        doc["manifest_digest"] = manifest_digest
    return doc


def _fmt_num(x: float) -> str:
    return f"{x:.1f}" if abs(x - round(x, 1)) < 1e-9 else f"{x:.3g}"


def _grid(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _flag(v: MetricValue) -> str:
    return v.display() + (" *" if v.degenerate else "")


def evaluation_table(ev: Evaluation) -> str:
    """Plaintext matrices and the three-family metric table."""
    cm, um = ev.cmatrix, ev.umatrix
    parts = [
        f"scenario={ev.scenario.name} cutoff={ev.cutoff} snooze={ev.snooze} alerts={ev.alerts}",
        "",
        "Count-based matrix",
        _grid(
            [
                ["", "Actual Positive", "Actual Negative"],
                ["Predict Positive", f"{cm.tp} (TP)", f"{cm.fp} (FP)"],
                ["Predict Negative", f"{cm.fn} (FN)", f"{cm.tn} (TN)"],
            ]
        ),
        "",
        "Utility-based matrix",
        _grid(
            [
                ["", "Alt. Adverse", "Beneficial", "Adverse", "Alt. Beneficial"],
                ["Predict Positive", f"{_fmt_num(um.ain)} (AiN)", f"{_fmt_num(um.bp)} (BP)", f"{_fmt_num(um.ap)} (AP)", f"{_fmt_num(um.bin)} (BiN)"],
                ["Predict Negative", f"{_fmt_num(um.aip)} (AiP)", f"{_fmt_num(um.bn)} (BN)", f"{_fmt_num(um.an)} (AN)", f"{_fmt_num(um.bip)} (BiP)"],
            ]
        ),
        "",
    ]
    rows = [["Count-based", "", "Realized utility", "", "Captured potential", ""]]
    for (ck, cl), (rk, rl), (pk, pl) in zip(_C_LABELS, _R_LABELS, _P_LABELS):
        rows.append([cl, ev.c_metrics[ck].display(), rl, _flag(ev.u_metrics[rk]), pl, _flag(ev.u_metrics[pk])])
    parts.append(_grid(rows))
    if any(v.degenerate for v in ev.u_metrics.values()):
        parts.append("* depends on a u-matrix cell this scenario never fills")
    parts.append("")
    d = ev.descriptive
    parts.append(
        "  ".join(
            f"{name}={d[key].display(3)}"
            for name, key in (
                ("#AP", "count_ap"),
                ("AP", "total_ap"),
                ("BP", "total_bp"),
                ("AP/BP", "adversity_ratio"),
                ("%0_AP", "pct_zero_ap"),
                ("%k+_AP", "pct_k_plus_ap"),
                ("u-NNS", "u_nns"),
            )
        )
    )
    for f in ev.findings:
        parts.append(f"{f.level}: {f.message}")
    return "\n".join(parts) + "\n"


AUDIT_COLUMNS = [
    "entity_id", "timestamp", "score", "predicted", "actual", "event_id", "classic",
    "suppressed", "delivered", "utility", "cell", "alt_utility", "alt_column",
]


def audit_rows(ev: Evaluation) -> list[dict[str, Any]]:
    rows = []
    for sp in ev.scored:
        p = sp.labeled
        rows.append(
            {
                "entity_id": p.entity_id,
                "timestamp": format_timestamp(p.timestamp),
                "score": "" if p.score is None else p.score,
                "predicted": "pos" if p.predicted_positive else "neg",
                "actual": "pos" if p.actual_positive else "neg",
                "event_id": p.event_id or "",
                "classic": p.classic,
                "suppressed": int(p.suppressed),
                "delivered": "pos" if p.effective_positive else "neg",
                "utility": sp.utility,
                "cell": sp.cell.value,
                "alt_utility": sp.alt_utility,
                "alt_column": sp.alt_column.value if sp.alt_column else ("dropped" if sp.alt_dropped else ""),
            }
        )
    return rows


def audit_csv(ev: Evaluation) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=AUDIT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(audit_rows(ev))
    return buf.getvalue()


def metrics_csv(ev: Evaluation) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["family", "metric", "value", "degenerate"])
    for family, metrics in (("count", ev.c_metrics), ("utility", ev.u_metrics), ("descriptive", ev.descriptive)):
        for name, v in metrics.items():
            writer.writerow([family, name, "" if v.value is None else repr(v.value), int(v.degenerate)])
    return buf.getvalue()


def findings_text(findings: Iterable[Finding]) -> str:
    lines = [f"{f.level}: {f.message}" for f in findings]
    return "\n".join(lines) + "\n" if lines else "ok: no findings\n"
