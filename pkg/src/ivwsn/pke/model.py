"""
Passive keyless entry data types.
"""
from dataclasses import dataclass
from enum import Enum

from ..errors import ConfigurationError
from ..sim.engine import US_PER_MS, US_PER_S

MIN_RSSI_DBM = -120.0
MAX_RSSI_DBM = 10.0


class KeyState(Enum):
    UNDISCOVERED = "undiscovered"
    ADVERTISING_SEEN = "advertising-seen"
    CONNECTED = "connected"


class RegionClass(Enum):
    """A: out of range; B: connected below threshold; C: connected above threshold."""

    A = "A"
    B = "B"
    C = "C"


@dataclass
class KeyRecord:
    key_id: str
    address: bytes
    pass_code: bytes = b""
    state: KeyState = KeyState.UNDISCOVERED

    def __post_init__(self) -> None:
        if len(self.address) != 4:
            raise ConfigurationError(f"key {self.key_id}: address must be 4 bytes")


@dataclass(frozen=True)
class PkeConfig:
    """
    Args:
        rssi_threshold_dbm: Smoothed RSSI above which a key is in region C
        lock_timeout_s: Time with no active key before the car locks
        rssi_window: Samples in the median filter
        connection_interval_ms: Connection interval given to keys
        nominal_range_m: Documented range at 0 dBm; not used in computation
        hysteresis_db: Region C is left only below threshold - hysteresis
        supervision_events: Missed events before a key connection is dropped
        advertising_interval_ms: Advertising interval of unconnected keys
        excess_loss_db: Added to free-space loss for mobility traces
    """

    rssi_threshold_dbm: float = -55.0
    lock_timeout_s: float = 30.0
    rssi_window: int = 5
    connection_interval_ms: float = 100.0
    nominal_range_m: float = 25.0
    hysteresis_db: float = 3.0
    supervision_events: int = 6
    advertising_interval_ms: float = 100.0
    excess_loss_db: float = 1.0

    def __post_init__(self) -> None:
        if not MIN_RSSI_DBM <= self.rssi_threshold_dbm <= MAX_RSSI_DBM:
            raise ConfigurationError(
                f"RSSI threshold {self.rssi_threshold_dbm} dBm outside [{MIN_RSSI_DBM}, {MAX_RSSI_DBM}]"
            )
        if self.lock_timeout_s <= 0:
            raise ConfigurationError("lock timeout must be > 0 s")
        if self.rssi_window < 1:
            raise ConfigurationError("RSSI window must hold at least one sample")
        if self.connection_interval_ms <= 0 or self.advertising_interval_ms <= 0:
            raise ConfigurationError("PKE intervals must be > 0 ms")
        if self.hysteresis_db < 0:
            raise ConfigurationError("hysteresis must be >= 0 dB")
        if self.excess_loss_db < 0:
            raise ConfigurationError("excess loss must be >= 0 dB")

    @property
    def lock_timeout_us(self) -> int:
        return int(round(self.lock_timeout_s * US_PER_S))

    @property
    def connection_interval_us(self) -> int:
        return int(round(self.connection_interval_ms * US_PER_MS))

    @property
    def advertising_interval_us(self) -> int:
        return int(round(self.advertising_interval_ms * US_PER_MS))
