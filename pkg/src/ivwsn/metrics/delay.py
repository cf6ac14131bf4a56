"""
Delay decomposition: transmission, queueing and propagation.
"""
from dataclasses import dataclass

from ..errors import ConfigurationError, FrameError
from ..link.packet import DATA_LENGTH_BOUNDS, US_PER_BYTE
from ..phy.channel import SPEED_OF_LIGHT

NS_PER_S = 1_000_000_000


def transmission_delay(length_bytes: int) -> int:
    """Air time in us of a data packet of ``length_bytes`` at 1 Mbps."""
    low, high = DATA_LENGTH_BOUNDS
    if not low <= length_bytes <= high:
        raise FrameError(f"packet length {length_bytes} B outside [{low}, {high}]")
    return US_PER_BYTE * length_bytes


def propagation_delay_ns(distance_m: float) -> float:
    if distance_m < 0:
        raise ConfigurationError(f"distance must be >= 0, got {distance_m}")
    return distance_m / SPEED_OF_LIGHT * NS_PER_S


@dataclass(frozen=True)
class DelayRecord:
    """
    One delivered sensor payload.

    ``delivery_us - reading_us == queueing_us + transmission_us`` holds
    exactly; waits caused by retransmissions count as queueing. Propagation
    is kept apart in ns since it is far below one tick.
    """

    sensor_id: str
    reading_us: int
    delivery_us: int
    transmission_us: int
    queueing_us: int
    propagation_ns: float = 0.0
    retransmissions: int = 0

    def __post_init__(self) -> None:
        if self.transmission_us < 0 or self.queueing_us < 0 or self.propagation_ns < 0:
            raise ConfigurationError(f"negative delay component for {self.sensor_id}")

    @property
    def total_us(self) -> int:
        return self.delivery_us - self.reading_us

    @property
    def closed(self) -> bool:
        return self.total_us == self.queueing_us + self.transmission_us
