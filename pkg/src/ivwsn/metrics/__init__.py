"""
Delay decomposition, run-time collection and run reports.
"""

from .collector import MetricsCollector, RunLog
from .delay import DelayRecord, propagation_delay_ns, transmission_delay
from .report import (
    ENERGY_COLUMNS,
    METRICS_COLUMNS,
    ModelEnergy,
    RunReport,
    SensorStats,
    delivery_ratio,
    finalize_run,
    format_summary,
    metrics_rows,
    write_energy_csv,
    write_metrics_csv,
)

__all__ = [
    "DelayRecord",
    "ENERGY_COLUMNS",
    "METRICS_COLUMNS",
    "MetricsCollector",
    "ModelEnergy",
    "RunLog",
    "RunReport",
    "SensorStats",
    "delivery_ratio",
    "finalize_run",
    "format_summary",
    "metrics_rows",
    "propagation_delay_ns",
    "transmission_delay",
    "write_energy_csv",
    "write_metrics_csv",
]
