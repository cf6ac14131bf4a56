"""
Schedule checks: aggregate throughput against the 37-channel bound and a
brute-force collision sweep over the hop sequences.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, List, Optional, Tuple

from ..errors import CapacityExceeded
from ..link.hopping import ChannelSelector, enabled_channels
from ..link.packet import BIT_RATE_BPS, US_PER_BYTE
from ..phy.channels import DATA_CHANNEL_COUNT
from ..sim.engine import US_PER_S
from .model import Schedule, ScheduleEntry

logger = logging.getLogger(__name__)

CAPACITY_BPS = DATA_CHANNEL_COUNT * BIT_RATE_BPS
DEFAULT_HORIZON_CAP_US = 60 * US_PER_S


@dataclass
class ThroughputReport:
    bits_per_second: Fraction
    per_channel_utilization: Dict[int, Fraction] = field(default_factory=dict)

    @property
    def within_bound(self) -> bool:
        return self.bits_per_second <= CAPACITY_BPS and all(
            u <= 1 for u in self.per_channel_utilization.values()
        )


def aggregate_throughput(
    schedule: Schedule, packet_lengths: Optional[Dict[str, int]] = None
) -> ThroughputReport:
    """
    Scheduled on-air bits per second, summed over every connection.

    Each connection's load is spread evenly over the channels of its map.
    Arithmetic is exact, so a schedule sitting on the bound is accepted.

    Args:
        schedule: Schedule to check
        packet_lengths: sensor id -> total packet length in bytes; defaults
            to each entry's ``packet_bytes``

    Raises:
        CapacityExceeded: above 37 Mbps in total or above 1 Mbps on a channel
    """
    lengths = packet_lengths or {}
    total = Fraction(0)
    per_channel: Dict[int, Fraction] = {ch: Fraction(0) for ch in range(DATA_CHANNEL_COUNT)}
    for entry in schedule.entries:
        bits = US_PER_BYTE * lengths.get(entry.sensor_id, entry.packet_bytes)
        rate = Fraction(bits * US_PER_S, entry.interval_us)
        total += rate
        channels = enabled_channels(entry.channel_map)
        share = rate / BIT_RATE_BPS / len(channels)
        for ch in channels:
            per_channel[ch] += share
    report = ThroughputReport(total, per_channel)
    if not report.within_bound:
        busiest = max(per_channel.values()) if per_channel else 0
        raise CapacityExceeded(
            f"aggregate {float(total):.0f} bps (busiest channel {float(busiest):.3f}) "
            f"exceeds the {CAPACITY_BPS} bps bound"
        )
    logger.debug(f"aggregate throughput {float(total):.1f} bps over {len(schedule.entries)} connections")
    return report


def hyperperiod(intervals: Iterable[int], cap_us: int = DEFAULT_HORIZON_CAP_US) -> Tuple[int, bool]:
    """
    LCM of the intervals, capped.

    Returns:
        (horizon_us, capped) where ``capped`` means verification only reaches
        the cap, not the full hyperperiod
    """
    values = list(intervals)
    if not values:
        return 0, False
    full = lcm(*values)
    if full > cap_us:
        return cap_us, True
    return full, False


@dataclass(frozen=True)
class Collision:
    time_us: int
    channel: int
    first: str
    second: str


def _event_train(entry: ScheduleEntry, horizon_us: int) -> List[Tuple[int, int, int, str]]:
    selector = ChannelSelector.starting_at(entry.start_channel, entry.hop_increment, entry.channel_map)
    events = []
    k = 0
    while True:
        start, end = entry.window(k)
        if start > horizon_us:
            break
        events.append((start, end, selector.next_channel(), entry.sensor_id))
        k += 1
    return events


def verify_collision_free(schedule: Schedule, horizon_us: Optional[int] = None) -> List[Collision]:
    """
    Sweep every connection event in [0, horizon] and report simultaneous
    transmissions on the same data channel within one range group.

    The horizon defaults to the hyperperiod, capped at 60 s.
    """
    if horizon_us is None:
        horizon_us, capped = hyperperiod(e.interval_us for e in schedule.entries)
        if capped:
            logger.info(f"hyperperiod exceeds the cap; verified to horizon {horizon_us} us")

    groups: Dict[int, List[ScheduleEntry]] = {}
    for entry in schedule.entries:
        groups.setdefault(entry.range_group, []).append(entry)

    collisions: List[Collision] = []
    for members in groups.values():
        events = sorted(ev for entry in members for ev in _event_train(entry, horizon_us))
        active: List[Tuple[int, int, int, str]] = []
        for start, end, channel, sensor in events:
            active = [a for a in active if a[1] > start]
            for _, _, other_channel, other in active:
                if other_channel == channel and other != sensor:
                    collisions.append(Collision(start, channel, other, sensor))
            active.append((start, end, channel, sensor))
    if collisions:
        logger.info(f"{len(collisions)} collisions found up to {horizon_us} us")
    return collisions
