"""
Scheduler data types: sensor requirements, planned entries, schedules and
infeasibility reports.
"""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..errors import ConfigurationError, FrameError, ScheduleInfeasible
from ..link.hopping import FULL_CHANNEL_MAP, validate_channel_map, validate_hop_increment
from ..link.packet import MAX_DATA_PAYLOAD, data_packet_length
from ..phy.channels import DATA_CHANNEL_COUNT

SCHEDULE_COLUMNS = [
    "sensor_id",
    "master",
    "interval_us",
    "anchor_offset_us",
    "hop_increment",
    "worst_case_delay_us",
]


@dataclass(frozen=True)
class SensorSpec:
    """
    Timing requirements of one sensor.

    ``deadline_us`` defaults to the read period. ``total_bytes`` fixes the
    on-air packet length; otherwise it follows from the payload.
    """

    sensor_id: str
    master: str
    read_period_us: int
    read_phase_us: int = 0
    payload_bytes: int = 10
    priority: int = 0
    deadline_us: Optional[int] = None
    total_bytes: Optional[int] = None

    def __post_init__(self) -> None:
        if self.read_period_us <= 0:
            raise ConfigurationError(f"sensor {self.sensor_id}: read period must be > 0")
        if self.read_phase_us < 0:
            raise ConfigurationError(f"sensor {self.sensor_id}: read phase must be >= 0")
        if not 0 <= self.payload_bytes <= MAX_DATA_PAYLOAD:
            raise ConfigurationError(
                f"sensor {self.sensor_id}: payload {self.payload_bytes} B outside 0..{MAX_DATA_PAYLOAD}"
            )
        if self.deadline_us is not None and not 0 < self.deadline_us <= self.read_period_us:
            raise ConfigurationError(
                f"sensor {self.sensor_id}: deadline {self.deadline_us} us must be in (0, read period]"
            )
        try:
            data_packet_length(self.payload_bytes, self.total_bytes)
        except FrameError as e:
            raise ConfigurationError(f"sensor {self.sensor_id}: {e}") from e

    @property
    def deadline(self) -> int:
        return self.read_period_us if self.deadline_us is None else self.deadline_us

    @property
    def packet_bytes(self) -> int:
        return data_packet_length(self.payload_bytes, self.total_bytes)


@dataclass(frozen=True)
class ScheduleEntry:
    """Planned connection of one sensor."""

    sensor_id: str
    master: str
    interval_us: int
    anchor_offset_us: int
    hop_increment: int
    start_channel: int = 0
    channel_map: int = FULL_CHANNEL_MAP
    event_airtime_us: int = 0
    slot_shift_us: int = 0
    worst_case_queueing_us: int = 0
    packet_bytes: int = 20
    range_group: int = 0

    def __post_init__(self) -> None:
        if self.interval_us <= 0:
            raise ConfigurationError(f"{self.sensor_id}: connection interval must be > 0")
        if not 0 <= self.anchor_offset_us < self.interval_us:
            raise ConfigurationError(f"{self.sensor_id}: anchor offset outside [0, interval)")
        validate_hop_increment(self.hop_increment)
        validate_channel_map(self.channel_map)
        if not 0 <= self.start_channel < DATA_CHANNEL_COUNT:
            raise ConfigurationError(f"{self.sensor_id}: start channel outside 0..36")

    @property
    def worst_case_delay_us(self) -> int:
        return self.worst_case_queueing_us + self.event_airtime_us

    def window(self, k: int) -> Tuple[int, int]:
        """[start, end) of the k-th connection event."""
        start = self.anchor_offset_us + k * self.interval_us
        return start, start + self.event_airtime_us


@dataclass
class InfeasibilityIssue:
    master: str
    reason: str
    sensors: List[str]


@dataclass
class InfeasibilityReport:
    """Why a schedule could not satisfy every sensor."""

    issues: List[InfeasibilityIssue] = field(default_factory=list)

    def add(self, master: str, reason: str, sensors: List[str]) -> None:
        self.issues.append(InfeasibilityIssue(master, reason, list(sensors)))

    @property
    def bottleneck_master(self) -> Optional[str]:
        return self.issues[0].master if self.issues else None

    @property
    def sensors(self) -> List[str]:
        seen: List[str] = []
        for issue in self.issues:
            seen.extend(s for s in issue.sensors if s not in seen)
        return seen

    def __bool__(self) -> bool:
        return bool(self.issues)

    def __str__(self) -> str:
        lines = ["schedule infeasible:"]
        for issue in self.issues:
            lines.append(f"  master {issue.master}: {issue.reason} ({', '.join(issue.sensors)})")
        return "\n".join(lines)


@dataclass
class Schedule:
    entries: List[ScheduleEntry] = field(default_factory=list)
    infeasibility: Optional[InfeasibilityReport] = None

    @property
    def feasible(self) -> bool:
        return not self.infeasibility

    @property
    def utilization(self) -> float:
        """Share of the 37-channel air time taken by connection events."""
        busy = sum(e.event_airtime_us / e.interval_us for e in self.entries)
        return busy / DATA_CHANNEL_COUNT

    def entry(self, sensor_id: str) -> ScheduleEntry:
        for e in self.entries:
            if e.sensor_id == sensor_id:
                return e
        raise KeyError(sensor_id)

    def by_sensor(self) -> Dict[str, ScheduleEntry]:
        return {e.sensor_id: e for e in self.entries}

    def require_feasible(self) -> "Schedule":
        if self.infeasibility:
            raise ScheduleInfeasible(self.infeasibility)
        return self

    def to_rows(self) -> List[Dict[str, Union[str, int]]]:
        return [
            {
                "sensor_id": e.sensor_id,
                "master": e.master,
                "interval_us": e.interval_us,
                "anchor_offset_us": e.anchor_offset_us,
                "hop_increment": e.hop_increment,
                "worst_case_delay_us": e.worst_case_delay_us,
            }
            for e in self.entries
        ]

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=SCHEDULE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.to_rows())
        return path
