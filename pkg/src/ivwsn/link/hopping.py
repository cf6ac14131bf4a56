"""
Adaptive frequency hopping over the 37 data channels.

The hop rule: unmapped = (last_unmapped + increment) mod 37; if unmapped is
enabled in the channel map it is used, otherwise it is remapped to
enabled[unmapped mod len(enabled)].
"""
import logging
from collections import deque
from typing import Deque, Dict, Iterable, List, Optional, Sequence, Tuple

from ..errors import ConfigurationError
from ..phy.channels import DATA_CHANNEL_COUNT

logger = logging.getLogger(__name__)

FULL_CHANNEL_MAP = (1 << DATA_CHANNEL_COUNT) - 1
MIN_ENABLED_CHANNELS = 2
HOP_INCREMENT_RANGE = (5, 16)


def enabled_channels(channel_map: int) -> List[int]:
    """Ascending list of data channels whose bit is set."""
    return [ch for ch in range(DATA_CHANNEL_COUNT) if channel_map >> ch & 1]


def channel_map_from(channels: Iterable[int]) -> int:
    mask = 0
    for ch in channels:
        if not 0 <= ch < DATA_CHANNEL_COUNT:
            raise ConfigurationError(f"data channel {ch} outside 0..{DATA_CHANNEL_COUNT - 1}")
        mask |= 1 << ch
    return mask


def exclude_channels(channel_map: int, channels: Iterable[int]) -> int:
    return channel_map & ~channel_map_from(channels)


def validate_channel_map(channel_map: int) -> None:
    if channel_map < 0 or channel_map > FULL_CHANNEL_MAP:
        raise ConfigurationError(f"channel map {channel_map:#x} is not a 37-bit mask")
    count = bin(channel_map).count("1")
    if count < MIN_ENABLED_CHANNELS:
        raise ConfigurationError(
            f"channel map enables {count} channel(s); at least {MIN_ENABLED_CHANNELS} required"
        )


def validate_hop_increment(increment: int) -> None:
    low, high = HOP_INCREMENT_RANGE
    if not low <= increment <= high:
        raise ConfigurationError(f"hop increment {increment} outside {low}..{high}")


class ChannelSelector:
    """
    Per-connection hop state.

    Args:
        hop_increment: 5..16
        channel_map: 37-bit mask of usable data channels
        last_unmapped_channel: Unmapped channel of the previous event (0..36)
    """

    def __init__(
        self, hop_increment: int, channel_map: int = FULL_CHANNEL_MAP, last_unmapped_channel: int = 0
    ) -> None:
        validate_hop_increment(hop_increment)
        validate_channel_map(channel_map)
        if not 0 <= last_unmapped_channel < DATA_CHANNEL_COUNT:
            raise ConfigurationError(f"last unmapped channel {last_unmapped_channel} outside 0..36")
        self.hop_increment = hop_increment
        self.channel_map = channel_map
        self.last_unmapped_channel = last_unmapped_channel
        self.last_channel: Optional[int] = None
        self._enabled = enabled_channels(channel_map)

    @classmethod
    def starting_at(
        cls, first_channel: int, hop_increment: int, channel_map: int = FULL_CHANNEL_MAP
    ) -> "ChannelSelector":
        """Selector whose first hop lands on unmapped channel ``first_channel``."""
        last = (first_channel - hop_increment) % DATA_CHANNEL_COUNT
        return cls(hop_increment, channel_map, last)

    @property
    def enabled(self) -> Sequence[int]:
        return tuple(self._enabled)

    def set_channel_map(self, channel_map: int) -> None:
        validate_channel_map(channel_map)
        self.channel_map = channel_map
        self._enabled = enabled_channels(channel_map)

    def next_channel(self) -> int:
        unmapped = (self.last_unmapped_channel + self.hop_increment) % DATA_CHANNEL_COUNT
        self.last_unmapped_channel = unmapped
        if self.channel_map >> unmapped & 1:
            channel = unmapped
        else:
            channel = self._enabled[unmapped % len(self._enabled)]
        # consecutive events never share a channel while there is a choice
        if channel == self.last_channel and len(self._enabled) > 1:
            position = self._enabled.index(channel)
            channel = self._enabled[(position + 1) % len(self._enabled)]
        self.last_channel = channel
        return channel


class ChannelAssessor:
    """Sliding window of (channel, crc_ok) results for one connection."""

    def __init__(self, window: int) -> None:
        if window <= 0:
            raise ConfigurationError("assessment window must be > 0 events")
        self.window = window
        self._history: Deque[Tuple[int, bool]] = deque(maxlen=window)
        self.observed = 0

    def record(self, channel: int, ok: bool) -> None:
        self._history.append((channel, ok))
        self.observed += 1

    def failure_stats(self) -> Dict[int, Tuple[int, int]]:
        """channel -> (failures, observations) over the window."""
        stats: Dict[int, Tuple[int, int]] = {}
        for channel, ok in self._history:
            failures, seen = stats.get(channel, (0, 0))
            stats[channel] = (failures + (0 if ok else 1), seen + 1)
        return stats

    def reset(self) -> None:
        self._history.clear()
        self.observed = 0


def classify_interference(
    channel_map: int,
    stats: Dict[int, Tuple[int, int]],
    observed: int,
    window: int,
    threshold: float,
) -> int:
    """
    Suggest a channel map excluding channels that fail too often.

    Args:
        channel_map: Map currently in use
        stats: channel -> (failures, observations) over the last ``window`` events
        observed: Events observed so far
        window: Required number of events before classification
        threshold: Failure fraction above which a channel is excluded

    Returns:
        Suggested map; never fewer than two enabled channels. The current map
        is returned unchanged until ``window`` events have been observed.
    """
    if observed < window:
        logger.debug(f"classification deferred: {observed}/{window} events observed")
        return channel_map
    current = enabled_channels(channel_map)

    def failure_fraction(ch: int) -> float:
        failures, seen = stats.get(ch, (0, 0))
        return failures / seen if seen else 0.0

    keep = [ch for ch in current if failure_fraction(ch) <= threshold]
    if len(keep) < MIN_ENABLED_CHANNELS:
        ranked = sorted(current, key=lambda ch: (failure_fraction(ch), ch))
        keep = sorted(ranked[:MIN_ENABLED_CHANNELS])
        logger.warning(f"interference on nearly every channel; keeping best channels {keep}")
    suggested = channel_map_from(keep)
    if suggested != channel_map:
        dropped = sorted(set(current) - set(keep))
        logger.info(f"AFH classification excludes channels {dropped}")
    return suggested
