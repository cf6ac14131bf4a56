"""
IVWSN: discrete-event simulator of a BLE intra-vehicular wireless sensor
network, with TDMA scheduling, energy accounting and a passive keyless
entry application.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityExceeded,
    ConfigurationError,
    ConnectionRejected,
    FrameError,
    InvariantViolation,
    ScenarioError,
    ScheduleInfeasible,
    SchedulingError,
    SimulationError,
)
from .runner import RunResult, SimulationRun, run_scenario, sweep
from .scenario import Scenario, load_scenario

__all__ = [
    "CapacityExceeded",
    "ConfigurationError",
    "ConnectionRejected",
    "FrameError",
    "InvariantViolation",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "ScheduleInfeasible",
    "SchedulingError",
    "SimulationError",
    "SimulationRun",
    "__version__",
    "load_scenario",
    "run_scenario",
    "sweep",
]
