"""Utility-based evaluation of Boolean prediction streams and alarm snoozing."""

__version__ = "0.1.0"

from umetrics.errors import ConfigError, InfeasibleError, InputError, UMetricsError  # noqa: E402
from umetrics.matrix import CMatrix, MetricValue, UMatrix, accumulate, c_metrics, descriptive_metrics, u_metrics  # noqa: E402
from umetrics.pipeline import Evaluation, evaluate  # noqa: E402
from umetrics.snooze import SnoozePolicy, apply_snooze, parse_snooze  # noqa: E402
from umetrics.timeline import (  # noqa: E402
    EventRecord,
    EventWindow,
    LabeledPrediction,
    PredictionRecord,
    build_event_windows,
    label_predictions,
)
from umetrics.utility import (  # noqa: E402
    SCENARIO_A,
    SCENARIO_ALARM,
    SCENARIO_B,
    SCENARIO_C,
    Cell,
    ScenarioConfig,
    ScoredPrediction,
    score_stream,
    validate_scenario,
)

__all__ = [
    "CMatrix", "Cell", "ConfigError", "EventRecord", "EventWindow", "Evaluation",
    "InfeasibleError", "InputError", "LabeledPrediction", "MetricValue", "PredictionRecord",
    "SCENARIO_A", "SCENARIO_ALARM", "SCENARIO_B", "SCENARIO_C", "ScenarioConfig",
    "ScoredPrediction", "SnoozePolicy", "UMatrix", "UMetricsError", "accumulate",
    "apply_snooze", "build_event_windows", "c_metrics", "descriptive_metrics", "evaluate",
    "label_predictions", "parse_snooze", "score_stream", "u_metrics", "validate_scenario",
]
