"""Command-line interface: ``umetrics {score,sweep,curve,burden,synth,validate}``.

Exit codes: 0 ok, 2 input error, 3 config error, 4 infeasible constraint.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from umetrics import report
from umetrics.errors import ConfigError, InfeasibleError, InputError, UMetricsError
from umetrics.files import read_events, read_predictions
from umetrics.pipeline import evaluate
from umetrics.snooze import parse_snooze
from umetrics.sweep import (
    BurdenParams,
    Constraint,
    OperatingPoint,
    PerformanceTable,
    SweepConfig,
    auc_uprc,
    best_per_snooze,
    burden,
    default_cutoff_grid,
    default_snooze_grid,
    run_sweep,
    select_operating_point,
    upr_curve,
)
from umetrics.synth import ScoreModel, SynthSpec, generate
from umetrics.timeline import build_event_windows, parse_duration
from umetrics.utility import load_scenario, validate_scenario

log = logging.getLogger("umetrics")


def _cutoff_grid(text: Optional[str]) -> list[float]:
    if not text:
        return default_cutoff_grid()
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ConfigError("cutoff step must be positive")
            n = int(round((hi - lo) / step))
            return [round(lo + i * step, 10) for i in range(n + 1)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"invalid cutoff grid {text!r} (use lo:hi:step or a,b,c)") from None


def _addressable(text: Optional[str]) -> Optional[tuple[float, float]]:
    if not text:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError("--addressable takes MIN_LEAD,MAX_LEAD, e.g. 15m,2h")
    return parse_duration(parts[0]), parse_duration(parts[1])


def _constraint(args) -> Optional[Constraint]:
    if args.min_u_recall is None and args.max_adversity_ratio is None:
        return None
    return Constraint(args.min_u_recall, args.max_adversity_ratio)


def _write(out_dir: Optional[str], name: str, text: str) -> None:
    if out_dir is None:
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text, encoding="utf-8")


def _base_config(args, **extra) -> dict:
    config = {"command": args.command}
    for key in ("window", "addressable", "cutoff", "cutoffs", "snooze", "snoozes"):
        if getattr(args, key, None) is not None:
            config[key] = getattr(args, key)
    if getattr(args, "scenario", None) is not None:
        config["scenario"] = load_scenario(args.scenario).to_dict()
    config.update(extra)
    return config


def _manifest(args, config: dict) -> dict:
    inputs = {
        "predictions": getattr(args, "predictions", None),
        "events": getattr(args, "events", None),
        "table": getattr(args, "table", None),
    }
    manifest = report.build_manifest(inputs, config)
    _write(args.out_dir, "manifest.json", report.canonical_json(manifest))
    return manifest


def _load_data(args):
    if not args.predictions or not args.events:
        raise InputError("--predictions and --events are required")
    predictions = read_predictions(args.predictions)
    events = read_events(args.events)
    return predictions, events


def cmd_score(args) -> int:
    scenario = load_scenario(args.scenario)
    snooze = parse_snooze(args.snooze)
    predictions, events = _load_data(args)
    windows = build_event_windows(events, parse_duration(args.window), _addressable(args.addressable))
    ev = evaluate(predictions, windows, scenario, args.cutoff, snooze, k=args.k)
    manifest = _manifest(args, _base_config(args))
    doc = report.evaluation_document(ev, manifest["digest"])
    table = report.evaluation_table(ev)
    _write(args.out_dir, "report.json", report.canonical_json(doc))
    _write(args.out_dir, "report.txt", table)
    _write(args.out_dir, "metrics.csv", report.metrics_csv(ev))
    _write(args.out_dir, "audit.csv", report.audit_csv(ev))
    if args.format == "json":
        sys.stdout.write(report.canonical_json(doc))
    elif args.format == "csv":
        sys.stdout.write(report.metrics_csv(ev))
    else:
        sys.stdout.write(table)
    if args.format != "table":
        for f in ev.findings:
            log.warning("%s: %s", f.level, f.message)
    return 0


def _point_dict(op: OperatingPoint) -> dict:
    def row(r):
        d = {k: getattr(r, k) for k in r.__dataclass_fields__}
        d["snooze"] = str(r.snooze)
        return d

    return {
        "constraint": str(op.constraint),
        "feasible": op.feasible,
        "row": row(op.row) if op.row else None,
        "nearest": [row(r) for r in op.nearest],
    }


def _table_text(table: PerformanceTable) -> str:
    cols = ["snooze", "cutoff", "u_recall", "u_precision", "count_ap", "total_ap", "total_bp",
            "adversity_ratio", "pct_zero_ap", "pct_k_plus_ap", "alerts"]
    rows = [cols]
    for r in table:
        cells = [str(r.snooze), "fixed" if r.cutoff is None else f"{r.cutoff:.2f}"]
        for c in cols[2:]:
            v = getattr(r, c)
            cells.append("Undef" if v is None else (f"{v:.3f}" if isinstance(v, float) else str(v)))
        rows.append(cells)
    return report._grid(rows) + "\n"


def cmd_sweep(args) -> int:
    constraint = _constraint(args)
    if args.table:
        try:
            table = PerformanceTable.from_csv(Path(args.table).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read {args.table}: {exc}") from None
    else:
        predictions, events = _load_data(args)
        window = parse_duration(args.window)
        bounds = _addressable(args.addressable)
        if args.snoozes:
            snoozes = [parse_snooze(s) for s in args.snoozes.split(",")]
        else:
            snoozes = default_snooze_grid(window, bounds[1] if bounds else None)
        config = SweepConfig(
            scenario=load_scenario(args.scenario),
            window_length=window,
            cutoff_grid=_cutoff_grid(args.cutoffs),
            snooze_grid=snoozes,
            constraint=constraint,
            addressable_bounds=bounds,
        )
        table = run_sweep(predictions, events, config, workers=args.workers)
    manifest = _manifest(args, _base_config(args, constraint=str(constraint) if constraint else None))
    summary: dict = {"manifest_digest": manifest["digest"], "rows": len(table)}
    op = None
    if constraint is not None:
        op = select_operating_point(table, constraint)
        summary["selected"] = _point_dict(op)
        summary["per_snooze"] = [_point_dict(p) for p in best_per_snooze(table, constraint)]
    _write(args.out_dir, "performance.csv", table.to_csv())
    _write(args.out_dir, "summary.json", report.canonical_json(summary))
    if args.format == "json":
        sys.stdout.write(report.canonical_json(summary))
    elif args.format == "csv":
        sys.stdout.write(table.to_csv())
    else:
        sys.stdout.write(_table_text(table))
        if op is not None:
            if op.feasible:
                sys.stdout.write(f"selected: snooze={op.row.snooze} cutoff={op.row.cutoff} ({op.constraint})\n")
            else:
                sys.stdout.write(f"infeasible: no row satisfies {op.constraint}\n")
    if op is not None and not op.feasible:
        nearest = ", ".join(f"{r.snooze}@{r.cutoff} u_recall={r.u_recall}" for r in op.nearest)
        raise InfeasibleError(f"no row satisfies {op.constraint}; nearest: {nearest}")
    return 0


def cmd_curve(args) -> int:
    predictions, events = _load_data(args)
    windows = build_event_windows(events, parse_duration(args.window), _addressable(args.addressable))
    curve = upr_curve(predictions, windows, parse_snooze(args.snooze), load_scenario(args.scenario), _cutoff_grid(args.cutoffs))
    area = auc_uprc(curve.points)
    manifest = _manifest(args, _base_config(args))
    doc = {
        "auc_uprc": area,
        "points": [{"cutoff": p.cutoff, "u_recall": p.u_recall, "u_precision": p.u_precision} for p in curve.points],
        "notes": curve.notes,
        "manifest_digest": manifest["digest"],
    }
    _write(args.out_dir, "curve.csv", curve.to_csv())
    _write(args.out_dir, "curve.json", report.canonical_json(doc))
    if args.plot:
        _plot(curve, area, args.plot)
    if args.format == "json":
        sys.stdout.write(report.canonical_json(doc))
    else:
        sys.stdout.write(curve.to_csv())
        if args.format == "table":
            sys.stdout.write(f"AUC-uPRC = {area:.4f}\n")
    return 0


def _plot(curve, area: float, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pts = sorted(curve.points, key=lambda p: p.u_recall)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot([p.u_recall for p in pts], [p.u_precision for p in pts], marker="o")
    ax.set_xlabel("u-Recall")
    ax.set_ylabel("u-Precision")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.05)
    ax.set_title(f"u-PR curve (AUC-uPRC {area:.3f})")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_burden(args) -> int:
    params = BurdenParams(
        period_alarm_count=args.alarms,
        period_length=parse_duration(args.period),
        bed_count=args.beds,
        patients_per_caregiver=args.ratio,
        shift_length=parse_duration(args.shift),
    )
    value = burden(params)
    manifest = _manifest(args, {"command": "burden", "alarms": args.alarms, "period": args.period,
                                "beds": args.beds, "ratio": args.ratio, "shift": args.shift})
    doc = {"alerts_per_caregiver_shift": value, "manifest_digest": manifest["digest"]}
    _write(args.out_dir, "burden.json", report.canonical_json(doc))
    if args.format == "json":
        sys.stdout.write(report.canonical_json(doc))
    elif args.format == "csv":
        sys.stdout.write(f"alerts_per_caregiver_shift\n{value!r}\n")
    else:
        sys.stdout.write(f"{value:.4f} alerts per caregiver per shift\n")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(
        seed=args.seed,
        entities=args.entities,
        horizon=parse_duration(args.horizon),
        prediction_cadence=parse_duration(args.cadence),
        event_rate=args.event_rate,
        score_model=ScoreModel(
            baseline=args.baseline,
            noise=args.noise,
            lift=args.lift,
            lift_window=parse_duration(args.lift_window),
            persistence=parse_duration(args.persistence),
            sentinel_probability=args.sentinel_probability,
            sentinel_lead=parse_duration(args.sentinel_lead),
            sentinel_duration=parse_duration(args.sentinel_duration),
        ),
    )
    predictions, events = generate(spec)
    out_dir = args.out_dir or "."
    args.out_dir = out_dir
    _write(out_dir, "predictions.csv", predictions)
    _write(out_dir, "events.csv", events)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out_dir", "format", "verbose")}
    _manifest(args, config)
    sys.stdout.write(f"wrote {Path(out_dir) / 'predictions.csv'} and {Path(out_dir) / 'events.csv'}\n")
    return 0


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    findings = validate_scenario(scenario, {"addressable_bounds": bool(args.addressable)})
    if args.format == "json":
        sys.stdout.write(report.canonical_json({"scenario": scenario.name, "findings": [f.to_dict() for f in findings]}))
    else:
        sys.stdout.write(report.findings_text(findings))
    if args.out_dir:
        _write(args.out_dir, "validate.json", report.canonical_json([f.to_dict() for f in findings]))
        _manifest(args, _base_config(args))
    if any(f.level == "error" for f in findings):
        raise ConfigError(f"scenario {scenario.name!r} violates the per-event nonzero utility rule")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="umetrics", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help="directory for report files and the run manifest")
    common.add_argument("--format", choices=("csv", "json", "table"), default="table")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--predictions", help="CSV/JSONL with entity_id,timestamp,score[,class]")
    data.add_argument("--events", help="CSV/JSONL with entity_id,timestamp[,event_id]")
    data.add_argument("--window", default="1h", help="event window length (s/m/h/d suffix)")
    data.add_argument("--addressable", help="addressable lead-time bounds MIN,MAX (e.g. 15m,2h)")
    data.add_argument("--scenario", default="C", help="A, B, C, alarm (alias fig10) or a scenario JSON file")

    p = sub.add_parser("score", parents=[common, data], help="evaluate one configuration")
    p.add_argument("--cutoff", type=float, default=0.5)
    p.add_argument("--snooze", default="none")
    p.add_argument("--k", type=int, default=9, help="threshold for the %%k+_AP descriptor")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", parents=[common, data], help="cutoff x snooze performance table")
    p.add_argument("--cutoffs", help="lo:hi:step or comma list (default 0:1:0.05)")
    p.add_argument("--snoozes", help="comma-separated snooze policies")
    p.add_argument("--table", help="select from an existing performance table CSV instead")
    p.add_argument("--min-u-recall", type=float)
    p.add_argument("--max-adversity-ratio", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("curve", parents=[common, data], help="u-PR curve and AUC-uPRC")
    p.add_argument("--cutoffs")
    p.add_argument("--snooze", default="none")
    p.add_argument("--plot", help="write a PNG of the curve")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("burden", parents=[common], help="alarms per caregiver per shift")
    p.add_argument("--alarms", type=float, required=True, help="adverse alarms per period")
    p.add_argument("--period", required=True, help="period length, e.g. 30d")
    p.add_argument("--beds", type=float, required=True)
    p.add_argument("--ratio", type=float, required=True, help="patients per caregiver")
    p.add_argument("--shift", required=True, help="shift length, e.g. 12h")
    p.set_defaults(func=cmd_burden)

    p = sub.add_parser("synth", parents=[common], help="generate a seeded synthetic workload")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--entities", type=int, default=10)
    p.add_argument("--horizon", default="48h")
    p.add_argument("--cadence", default="10m")
    p.add_argument("--event-rate", type=float, default=0.5, help="events per entity per horizon")
    p.add_argument("--baseline", type=float, default=0.2)
    p.add_argument("--noise", type=float, default=0.15)
    p.add_argument("--lift", type=float, default=0.4)
    p.add_argument("--lift-window", default="6h")
    p.add_argument("--persistence", default="30m")
    p.add_argument("--sentinel-probability", type=float, default=0.0)
    p.add_argument("--sentinel-lead", default="3h")
    p.add_argument("--sentinel-duration", default="10m")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", parents=[common], help="check a scenario for degenerate metrics")
    p.add_argument("--scenario", default="C")
    p.add_argument("--addressable", help="warn as if addressable bounds are in use")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UMetricsError as exc:
        print(f"umetrics: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
