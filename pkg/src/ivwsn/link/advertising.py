"""
Broadcast group: advertisers and scanners on the three advertising channels.

Advertisements are fire-and-forget. Each advertising event sends the same
PDU on the advertising channels in turn; a scanner dwells on one channel
at a time and keeps every copy it demodulates.
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, List, Optional, Sequence

from ..errors import ConfigurationError
from ..phy.channels import ADVERTISING_CHANNELS
from ..sim.engine import EventHandle, EventKind, Simulator
from .device import Device
from .packet import LinkPacket

if TYPE_CHECKING:
    from .controller import LinkLayer

logger = logging.getLogger(__name__)

ADV_COPY_GAP_US = 150
DEFAULT_ADV_JITTER_US = 10_000
DEFAULT_SCAN_DWELL_US = 10_000


@dataclass(frozen=True)
class AdvertisingConfig:
    interval_us: int
    repetitions: int = 3
    payload: bytes = b""
    jitter_max_us: int = DEFAULT_ADV_JITTER_US

    def __post_init__(self) -> None:
        if self.interval_us <= 0:
            raise ConfigurationError("advertising interval must be > 0")
        if self.repetitions < 1:
            raise ConfigurationError("advertising repetitions must be >= 1")
        if self.jitter_max_us < 0:
            raise ConfigurationError("advertising jitter must be >= 0")

    def channel_for(self, repetition: int) -> int:
        return ADVERTISING_CHANNELS[repetition % len(ADVERTISING_CHANNELS)]


@dataclass(frozen=True)
class AdvertisementReport:
    time_us: int
    advertiser: str
    address: bytes
    data: bytes
    channel: int
    rssi_dbm: float


class Advertiser:
    """Periodic advertising of one device; stopped when it gets connected."""

    def __init__(self, link_layer: "LinkLayer", device: Device, config: AdvertisingConfig) -> None:
        self.link_layer = link_layer
        self.device = device
        self.config = config
        self.packet = LinkPacket.advertisement(device.address + config.payload)
        self.events_sent = 0
        self._handles: List[EventHandle] = []

    @property
    def sim(self) -> Simulator:
        return self.link_layer.sim

    @property
    def active(self) -> bool:
        return any(h.active for h in self._handles)

    def start(self, at: Optional[int] = None) -> None:
        self.stop()
        when = self.sim.now if at is None else at
        self._handles = [
            self.sim.schedule(when, EventKind.ADVERTISING, self._advertising_event, self.device.node_id)
        ]

    def stop(self) -> None:
        for handle in self._handles:
            handle.cancel()
        self._handles = []

    def _advertising_event(self) -> None:
        now = self.sim.now
        self._handles = []
        spacing = self.packet.airtime_us + ADV_COPY_GAP_US
        for i in range(self.config.repetitions):
            channel = self.config.channel_for(i)
            self._handles.append(
                self.sim.schedule(
                    now + i * spacing,
                    EventKind.PACKET_START,
                    lambda ch=channel: self.link_layer.broadcast(self.device, self.packet, ch),
                    f"adv {self.device.node_id} ch{channel}",
                )
            )
        self.events_sent += 1
        jitter = 0
        if self.config.jitter_max_us:
            jitter = int(self.link_layer.traffic_rng.integers(0, self.config.jitter_max_us + 1))
        self._handles.append(
            self.sim.schedule(
                now + self.config.interval_us + jitter,
                EventKind.ADVERTISING,
                self._advertising_event,
                self.device.node_id,
            )
        )


class Scanner:
    """
    Receiver cycling round-robin over advertising channels.

    Args:
        link_layer: Owning link layer
        device: Observer or central device
        dwell_us: Time spent on each channel before moving on
        channels: Channels to cycle through
        on_advertisement: Callback for each demodulated advertisement
    """

    def __init__(
        self,
        link_layer: "LinkLayer",
        device: Device,
        dwell_us: int = DEFAULT_SCAN_DWELL_US,
        channels: Sequence[int] = ADVERTISING_CHANNELS,
        on_advertisement: Optional[Callable[[AdvertisementReport], None]] = None,
    ) -> None:
        if dwell_us <= 0:
            raise ConfigurationError("scan dwell must be > 0")
        if not channels or any(ch not in ADVERTISING_CHANNELS for ch in channels):
            raise ConfigurationError(f"scan channels must be advertising channels, got {channels}")
        self.link_layer = link_layer
        self.device = device
        self.dwell_us = dwell_us
        self.channels = tuple(channels)
        self.on_advertisement = on_advertisement
        self.reports: List[AdvertisementReport] = []
        self.started_us: Optional[int] = None
        self.until_us: Optional[int] = None

    def start(self, at: int, duration_us: Optional[int] = None) -> None:
        self.started_us = at
        self.until_us = None if duration_us is None else at + duration_us

    def stop(self, at: int) -> None:
        self.until_us = at

    def active_at(self, t: int) -> bool:
        if self.started_us is None or t < self.started_us:
            return False
        return self.until_us is None or t < self.until_us

    def listening_channel(self, t: int) -> int:
        slot = (t - (self.started_us or 0)) // self.dwell_us
        return self.channels[slot % len(self.channels)]

    def receive(self, report: AdvertisementReport) -> None:
        self.reports.append(report)
        logger.debug(
            f"{self.device.node_id} heard {report.advertiser} on ch{report.channel} "
            f"at {report.rssi_dbm:.1f} dBm"
        )
        if self.on_advertisement is not None:
            self.on_advertisement(report)
