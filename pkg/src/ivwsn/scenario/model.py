"""
Validated, immutable scenario description.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from ..energy import EnergyParams
from ..phy.channel import COHERENCE_PROFILES, InterferenceSource
from ..pke.mobility import MobilityTrace
from ..pke.model import PkeConfig
from ..scheduler.model import SensorSpec
from ..sim.engine import US_PER_MS, US_PER_S


def ms_to_us(value: float) -> int:
    return int(round(value * US_PER_MS))


@dataclass(frozen=True)
class RunSettings:
    duration_s: float = 10.0
    seed: int = 1
    trace: bool = False

    @property
    def duration_us(self) -> int:
        return int(round(self.duration_s * US_PER_S))


@dataclass(frozen=True)
class ChannelSettings:
    noise_floor_dbm: float = -100.0
    sensitivity_dbm: float = -90.0
    ber: Any = "noncoherent-fsk"
    correlated_shadowing: bool = False
    packet_error_rate: float = 0.0
    coherence_profile: str = "highway"

    @property
    def coherence_time_s(self) -> float:
        return COHERENCE_PROFILES[self.coherence_profile]


@dataclass(frozen=True)
class LossRule:
    """Losses for node pairs without an explicit link entry."""

    same_compartment_db: float = 40.0
    cross_compartment_db: float = 80.0
    shadowing_sigma_db: float = 0.0
    coherence_time_s: Optional[float] = None


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    roles: Tuple[str, ...]
    compartment: str = "cabin"
    tx_power_dbm: float = 0.0
    distance_m: Optional[float] = None


@dataclass(frozen=True)
class LinkSpec:
    a: str
    b: str
    path_loss_db: float
    shadowing_sigma_db: Optional[float] = None
    coherence_time_s: Optional[float] = None
    relation: str = "same"


@dataclass(frozen=True)
class SensorConfig:
    sensor_id: str
    node: str
    read_period_ms: float
    read_phase_ms: float = 0.0
    payload_bytes: int = 10
    priority: int = 0
    deadline_ms: Optional[float] = None
    destination: Optional[str] = None
    packet_bytes: Optional[int] = None

    def to_spec(self, master: str) -> SensorSpec:
        return SensorSpec(
            sensor_id=self.sensor_id,
            master=master,
            read_period_us=ms_to_us(self.read_period_ms),
            read_phase_us=ms_to_us(self.read_phase_ms),
            payload_bytes=self.payload_bytes,
            priority=self.priority,
            deadline_us=None if self.deadline_ms is None else ms_to_us(self.deadline_ms),
            total_bytes=self.packet_bytes,
        )


@dataclass(frozen=True)
class PiconetSpec:
    master: str
    capacity: int = 8
    sensors: Tuple[SensorConfig, ...] = ()
    supervision_events: int = 6


@dataclass(frozen=True)
class ExplicitEntry:
    sensor: str
    anchor_offset_ms: float
    hop_increment: int
    start_channel: int = 0


@dataclass(frozen=True)
class ScheduleSettings:
    align: bool = True
    event_airtime_us: Optional[int] = None
    hop_increment_base: int = 5
    range_groups: Optional[Tuple[Tuple[str, ...], ...]] = None
    explicit: Tuple[ExplicitEntry, ...] = ()


@dataclass(frozen=True)
class AfhSettings:
    window: Optional[int] = None
    threshold: float = 0.5
    auto: bool = False


@dataclass(frozen=True)
class PkeKeySpec:
    node: str
    address: Optional[bytes] = None
    pass_code: bytes = b""
    device_pass_code: Optional[bytes] = None
    valid: bool = True


@dataclass(frozen=True)
class PkeSettings:
    central: str
    config: PkeConfig = field(default_factory=PkeConfig)
    keys: Tuple[PkeKeySpec, ...] = ()
    traces: Tuple[MobilityTrace, ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    run: RunSettings = field(default_factory=RunSettings)
    channel: ChannelSettings = field(default_factory=ChannelSettings)
    loss_rule: LossRule = field(default_factory=LossRule)
    nodes: Tuple[NodeSpec, ...] = ()
    links: Tuple[LinkSpec, ...] = ()
    piconets: Tuple[PiconetSpec, ...] = ()
    schedule: ScheduleSettings = field(default_factory=ScheduleSettings)
    afh: AfhSettings = field(default_factory=AfhSettings)
    interferers: Tuple[InterferenceSource, ...] = ()
    energy: EnergyParams = field(default_factory=EnergyParams)
    pke: Optional[PkeSettings] = None
    source: str = "<scenario>"
    raw: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def node(self, node_id: str) -> NodeSpec:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise KeyError(node_id)

    def sensor_specs(self) -> List[SensorSpec]:
        return [s.to_spec(p.master) for p in self.piconets for s in p.sensors]

    def sensor_nodes(self) -> Dict[str, str]:
        """sensor id -> peripheral node id"""
        return {s.sensor_id: s.node for p in self.piconets for s in p.sensors}

    def with_run(
        self, seed: Optional[int] = None, duration_s: Optional[float] = None, trace: Optional[bool] = None
    ) -> "Scenario":
        run = self.run
        if seed is not None:
            run = replace(run, seed=seed)
        if duration_s is not None:
            run = replace(run, duration_s=duration_s)
        if trace is not None:
            run = replace(run, trace=trace)
        return replace(self, run=run)
