"""Exception types. Each maps to a CLI exit code."""

from __future__ import annotations


class UMetricsError(Exception):
    exit_code = 1


class InputError(UMetricsError):
    """Malformed or invalid prediction/event data."""

    exit_code = 2


class ConfigError(UMetricsError):
    """Invalid scenario, snooze policy, cutoff or sweep configuration."""

    exit_code = 3


class InfeasibleError(UMetricsError):
    """No performance-table row satisfies the requested constraint."""

    exit_code = 4
