"""
Exception hierarchy for the IVWSN simulator.

Packet loss on the air is an outcome and never raises; everything here
signals a caller bug, a bad scenario, or a broken runtime invariant.
"""
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .scheduler.model import InfeasibilityReport


class SimulationError(Exception):
    """Base class for all simulator errors."""


class SchedulingError(SimulationError):
    """An event was scheduled in the past or the clock was asked to go back."""


class ConfigurationError(SimulationError):
    """Invalid parameters, unknown links or unusable channel maps."""


class ScenarioError(ConfigurationError):
    """
    A scenario file failed to parse or validate.

    Args:
        message: What went wrong
        key: Dotted path of the offending key, if known
        line: 1-based line number in the source file, if known
        source: File name or template name the scenario came from
    """

    def __init__(
        self,
        message: str,
        key: Optional[str] = None,
        line: Optional[int] = None,
        source: Optional[str] = None,
    ) -> None:
        self.message = message
        self.key = key
        self.line = line
        self.source = source
        super().__init__(self._format())

    def _format(self) -> str:
        where = self.source or "<scenario>"
        if self.line is not None:
            where = f"{where}:{self.line}"
        if self.key:
            return f"{where}: {self.key}: {self.message}"
        return f"{where}: {self.message}"


class FrameError(SimulationError):
    """A link-layer packet length fell outside the frame bounds."""


class ConnectionRejected(SimulationError):
    """The peripheral refused a connection request (wrong pass code)."""


class ScheduleInfeasible(SimulationError):
    """The scheduler could not place every sensor within its deadline."""

    def __init__(self, report: "InfeasibilityReport") -> None:
        self.report = report
        super().__init__(str(report))


class CapacityExceeded(SimulationError):
    """Aggregate on-air throughput exceeds the 37-channel bound."""


class InvariantViolation(SimulationError):
    """
    A runtime invariant was broken.

    Args:
        invariant: Short identity of the invariant (printed by the CLI)
        detail: Human-readable context
    """

    def __init__(self, invariant: str, detail: str = "") -> None:
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
