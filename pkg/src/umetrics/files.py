"""Readers and writers for prediction and event files (CSV or JSONL)."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from umetrics.errors import InputError
from umetrics.timeline import EventRecord, PredictionRecord, parse_timestamp

_CLASS_VALUES = {"pos": True, "neg": False}


def _rows(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if Path(path).suffix.lower() in (".jsonl", ".ndjson"):
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: bad JSON ({exc.msg})") from None
            if not isinstance(row, dict):
                raise InputError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, row
    else:
        reader = csv.DictReader(io.StringIO(text))
        for lineno, row in enumerate(reader, start=2):
            yield lineno, row


def _require(row: dict[str, Any], key: str, where: str) -> Any:
    value = row.get(key)
    if value is None or value == "":
        raise InputError(f"{where}: missing {key!r}")
    return value


def parse_prediction(row: dict[str, Any], where: str = "record") -> PredictionRecord:
    entity = str(_require(row, "entity_id", where))
    ts = parse_timestamp(_require(row, "timestamp", where))
    score = row.get("score")
    if score in ("", None):
        score = None
    else:
        try:
            score = float(score)
        except (TypeError, ValueError):
            raise InputError(f"{where}: non-numeric score {score!r}") from None
    label = row.get("class")
    if label in ("", None):
        label = None
    else:
        key = str(label).strip().lower()
        if key not in _CLASS_VALUES:
            raise InputError(f"{where}: class must be 'pos' or 'neg', got {label!r}")
        label = _CLASS_VALUES[key]
    try:
        return PredictionRecord(entity, ts, score, label)
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def read_predictions(path: str | Path) -> list[PredictionRecord]:
    """Load a predictions file; an empty file is an input error."""
    records = [parse_prediction(row, f"{path}:{n}") for n, row in _rows(Path(path))]
    if not records:
        raise InputError(f"{path}: no predictions")
    return records


def read_events(path: str | Path) -> list[EventRecord]:
    out = []
    for n, row in _rows(Path(path)):
        where = f"{path}:{n}"
        event_id = row.get("event_id")
        out.append(
            EventRecord(
                str(_require(row, "entity_id", where)),
                parse_timestamp(_require(row, "timestamp", where)),
                None if event_id in ("", None) else str(event_id),
            )
        )
    return out


def format_timestamp(ts: float) -> str:
    return str(int(ts)) if float(ts).is_integer() else repr(ts)


def predictions_csv(records: Iterable[PredictionRecord]) -> str:
    records = list(records)
    with_class = any(r.label is not None for r in records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["entity_id", "timestamp", "score"] + (["class"] if with_class else []))
    for r in records:
        row = [r.entity_id, format_timestamp(r.timestamp), "" if r.score is None else f"{r.score:.6f}"]
        if with_class:
            row.append("" if r.label is None else ("pos" if r.label else "neg"))
        writer.writerow(row)
    return buf.getvalue()


def events_csv(records: Iterable[EventRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["entity_id", "timestamp", "event_id"])
    for r in records:
        writer.writerow([r.entity_id, format_timestamp(r.timestamp), r.event_id or ""])
    return buf.getvalue()
