"""
BLE RF channel plan: 40 channels, 2 MHz apart, 2402-2480 MHz.

Indices 0-36 are data channels, 37-39 advertising channels.
"""
from typing import Tuple

from ..errors import ConfigurationError

CHANNEL_COUNT = 40
DATA_CHANNEL_COUNT = 37
ADVERTISING_CHANNELS: Tuple[int, int, int] = (37, 38, 39)
CHANNEL_BANDWIDTH_MHZ = 2.0
BASE_FREQUENCY_MHZ = 2402
CHANNEL_SPACING_MHZ = 2

_ADVERTISING_POSITIONS = {37: 0, 38: 12, 39: 39}


def rf_position(index: int) -> int:
    """Position of a channel index on the 2 MHz RF grid (0 = 2402 MHz)."""
    validate_channel(index)
    if index in _ADVERTISING_POSITIONS:
        return _ADVERTISING_POSITIONS[index]
    if index <= 10:
        return index + 1
    return index + 2


def channel_frequency(index: int) -> int:
    """Center frequency in MHz of channel ``index``."""
    return BASE_FREQUENCY_MHZ + CHANNEL_SPACING_MHZ * rf_position(index)


def is_advertising(index: int) -> bool:
    return index in _ADVERTISING_POSITIONS


def validate_channel(index: int) -> None:
    if not 0 <= index < CHANNEL_COUNT:
        raise ConfigurationError(f"channel index {index} outside 0..{CHANNEL_COUNT - 1}")


def overlap_fraction(
    channel: int, center_mhz: float, bandwidth_mhz: float
) -> float:
    """
    Fraction of a flat-PSD emitter's power that lands inside a BLE channel.

    Args:
        channel: BLE channel index
        center_mhz: Emitter center frequency
        bandwidth_mhz: Emitter occupied bandwidth

    Returns:
        Overlap width divided by the emitter bandwidth, in [0, 1]
    """
    if bandwidth_mhz <= 0:
        raise ConfigurationError(f"interferer bandwidth must be > 0, got {bandwidth_mhz}")
    f = channel_frequency(channel)
    low = max(f - CHANNEL_BANDWIDTH_MHZ / 2, center_mhz - bandwidth_mhz / 2)
    high = min(f + CHANNEL_BANDWIDTH_MHZ / 2, center_mhz + bandwidth_mhz / 2)
    if high <= low:
        return 0.0
    return (high - low) / bandwidth_mhz
