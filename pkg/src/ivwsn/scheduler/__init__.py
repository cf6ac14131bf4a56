"""
TDMA planning for multi-piconet sensor traffic.
"""

from .model import (
    SCHEDULE_COLUMNS,
    InfeasibilityIssue,
    InfeasibilityReport,
    Schedule,
    ScheduleEntry,
    SensorSpec,
)
from .planner import build_schedule, event_airtime_us, periodic_overlap, schedule_from_explicit
from .verify import (
    CAPACITY_BPS,
    Collision,
    ThroughputReport,
    aggregate_throughput,
    hyperperiod,
    verify_collision_free,
)

__all__ = [
    "CAPACITY_BPS",
    "Collision",
    "InfeasibilityIssue",
    "InfeasibilityReport",
    "SCHEDULE_COLUMNS",
    "Schedule",
    "ScheduleEntry",
    "SensorSpec",
    "ThroughputReport",
    "aggregate_throughput",
    "build_schedule",
    "event_airtime_us",
    "hyperperiod",
    "periodic_overlap",
    "schedule_from_explicit",
    "verify_collision_free",
]
