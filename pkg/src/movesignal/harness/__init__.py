"""Building runs, monitoring them, exploring schedules, and trace files."""

from movesignal.harness.build import build_simulation, validate_setup
from movesignal.harness.explore import ExplorationResult, active_subsets, explore_schedules
from movesignal.harness.messages import MessageRecord, delivery_stats, message_records
from movesignal.harness.monitors import (
    ALL_PROPERTIES,
    MonitorSuite,
    Verdict,
    applicable_properties,
    monitor_suite,
)
from movesignal.harness.traceio import read_trace, write_trace


def send(sim, robot: int, recipient_label: int, bits) -> dict:
    """Queue ``bits`` at ``robot`` for the robot it calls ``recipient_label``."""
    return sim.send(robot, recipient_label, bits)


__all__ = [
    "ALL_PROPERTIES", "ExplorationResult", "MessageRecord", "MonitorSuite", "Verdict",
    "active_subsets", "applicable_properties", "build_simulation", "delivery_stats",
    "explore_schedules", "message_records", "monitor_suite", "read_trace", "send",
    "validate_setup", "write_trace",
]
