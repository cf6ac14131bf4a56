"""
Greedy TDMA planner.

Sensors are placed one by one in (priority, deadline, id) order. Each gets
a connection interval equal to its read period and an anchor just after its
reading; if that slot overlaps an event already placed in the same range
group, the anchor is pushed to the end of the conflicting event until it
fits or a whole period has been tried.
"""
import logging
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..link.connection import T_IFS_US
from ..link.hopping import FULL_CHANNEL_MAP, HOP_INCREMENT_RANGE
from ..link.packet import airtime_us, data_packet_length
from ..phy.channels import DATA_CHANNEL_COUNT
from .model import InfeasibilityReport, Schedule, ScheduleEntry, SensorSpec

logger = logging.getLogger(__name__)


def event_airtime_us(
    payload_bytes: int, master_payload_bytes: int = 0, packet_bytes: Optional[int] = None
) -> int:
    """Master packet, inter-frame gap, slave packet (``packet_bytes`` long when given)."""
    return (
        airtime_us(data_packet_length(master_payload_bytes))
        + T_IFS_US
        + airtime_us(data_packet_length(payload_bytes, packet_bytes))
    )


def periodic_overlap(
    offset_a: int, period_a: int, airtime_a: int, offset_b: int, period_b: int, airtime_b: int
) -> Optional[int]:
    """
    Check two periodic event trains for overlap.

    Returns:
        None if no event of train a ever overlaps one of train b, otherwise
        how far a must move later to clear the nearest conflicting b event
    """
    g = gcd(period_a, period_b)
    r = (offset_a - offset_b) % g
    if r < airtime_b:
        return airtime_b - r
    if g - r < airtime_a:
        return g - r + airtime_b
    return None


def _first_free_shift(
    target: int, period: int, airtime: int, placed: Sequence[ScheduleEntry]
) -> Optional[int]:
    shift = 0
    while shift < period:
        offset = (target + shift) % period
        needed = 0
        for other in placed:
            push = periodic_overlap(
                offset, period, airtime, other.anchor_offset_us, other.interval_us, other.event_airtime_us
            )
            if push is not None:
                needed = push
                break
        if not needed:
            return shift
        shift += needed
    return None


def _group_index(range_groups: Optional[Sequence[Iterable[str]]], masters: Iterable[str]) -> Dict[str, int]:
    if range_groups is None:
        return {m: 0 for m in masters}
    index: Dict[str, int] = {}
    for i, group in enumerate(range_groups):
        for master in group:
            index.setdefault(master, i)
    next_group = len(range_groups)
    for master in sorted(set(masters)):
        if master not in index:
            index[master] = next_group
            next_group += 1
    return index


def build_schedule(
    sensors: Sequence[SensorSpec],
    assignment: Optional[Dict[str, str]] = None,
    event_airtime: Optional[int] = None,
    align: bool = True,
    range_groups: Optional[Sequence[Iterable[str]]] = None,
    hop_increment_base: int = HOP_INCREMENT_RANGE[0],
    channel_map: int = FULL_CHANNEL_MAP,
) -> Schedule:
    """
    Plan connection intervals, anchors and hop parameters.

    Args:
        sensors: Sensor requirements
        assignment: sensor id -> master; defaults to each sensor's ``master``
        event_airtime: Worst-case connection event duration in us; computed
            from each sensor's payload when omitted
        align: Place anchors right after the sensor reading; when False every
            anchor starts from offset 0
        range_groups: Lists of masters sharing the air; defaults to one group
        hop_increment_base: First hop increment handed out in each group
        channel_map: Channel map given to every connection

    Returns:
        Schedule with an infeasibility report when sensors were shed or miss
        their deadline
    """
    assignment = assignment or {}
    masters = {assignment.get(s.sensor_id, s.master) for s in sensors}
    groups = _group_index(range_groups, masters)
    low, high = HOP_INCREMENT_RANGE
    span = high - low + 1

    placed: Dict[int, List[ScheduleEntry]] = {}
    demand: Dict[int, float] = {}
    report = InfeasibilityReport()
    entries: List[ScheduleEntry] = []

    for sensor in sorted(sensors, key=lambda s: (s.priority, s.deadline, s.sensor_id)):
        master = assignment.get(sensor.sensor_id, sensor.master)
        group = groups[master]
        period = sensor.read_period_us
        airtime = event_airtime
        if airtime is None:
            airtime = event_airtime_us(sensor.payload_bytes, packet_bytes=sensor.packet_bytes)
        group_entries = placed.setdefault(group, [])

        load = demand.get(group, 0.0) + airtime / period
        if load > 1.0:
            reason = "overload: event airtime exceeds the available time"
            _report_issue(report, master, reason, sensor.sensor_id)
            logger.warning(f"sensor {sensor.sensor_id} shed: range group of {master} overloaded")
            continue

        target = (sensor.read_phase_us + airtime) % period if align else 0
        shift = _first_free_shift(target, period, airtime, group_entries)
        if shift is None:
            _report_issue(report, master, "no collision-free slot within one period", sensor.sensor_id)
            logger.warning(f"sensor {sensor.sensor_id} shed: no free slot at {master}")
            continue

        offset = (target + shift) % period
        queueing = (offset - sensor.read_phase_us) % period
        n = len(group_entries)
        entry = ScheduleEntry(
            sensor_id=sensor.sensor_id,
            master=master,
            interval_us=period,
            anchor_offset_us=offset,
            hop_increment=low + (hop_increment_base - low + n) % span,
            start_channel=n % DATA_CHANNEL_COUNT,
            channel_map=channel_map,
            event_airtime_us=airtime,
            slot_shift_us=shift,
            worst_case_queueing_us=queueing,
            packet_bytes=sensor.packet_bytes,
            range_group=group,
        )
        group_entries.append(entry)
        entries.append(entry)
        demand[group] = load
        if entry.worst_case_delay_us > sensor.deadline:
            _report_issue(report, master, "deadline miss", sensor.sensor_id)
            logger.warning(
                f"sensor {sensor.sensor_id}: worst-case delay {entry.worst_case_delay_us} us "
                f"exceeds deadline {sensor.deadline} us"
            )

    schedule = Schedule(entries, report if report else None)
    logger.info(
        f"schedule built: {len(entries)}/{len(sensors)} sensors placed, "
        f"utilization {schedule.utilization:.6f}"
    )
    return schedule


def _report_issue(report: InfeasibilityReport, master: str, reason: str, sensor_id: str) -> None:
    for issue in report.issues:
        if issue.master == master and issue.reason == reason:
            issue.sensors.append(sensor_id)
            return
    report.add(master, reason, [sensor_id])


def schedule_from_explicit(
    sensors: Sequence[SensorSpec],
    slots: Dict[str, Tuple[int, int, int]],
    event_airtime: Optional[int] = None,
    range_groups: Optional[Sequence[Iterable[str]]] = None,
    channel_map: int = FULL_CHANNEL_MAP,
) -> Schedule:
    """
    Check a hand-written schedule instead of planning one.

    Args:
        sensors: Sensor requirements
        slots: sensor id -> (anchor offset us, hop increment, start channel)
        event_airtime: Worst-case connection event duration in us
        range_groups: Lists of masters sharing the air

    Returns:
        Schedule whose report lists overlapping slots and deadline misses
    """
    groups = _group_index(range_groups, {s.master for s in sensors})
    report = InfeasibilityReport()
    placed: Dict[int, List[ScheduleEntry]] = {}
    entries: List[ScheduleEntry] = []
    for sensor in sorted(sensors, key=lambda s: (s.priority, s.deadline, s.sensor_id)):
        offset, increment, start = slots[sensor.sensor_id]
        period = sensor.read_period_us
        airtime = event_airtime
        if airtime is None:
            airtime = event_airtime_us(sensor.payload_bytes, packet_bytes=sensor.packet_bytes)
        group = groups[sensor.master]
        entry = ScheduleEntry(
            sensor_id=sensor.sensor_id,
            master=sensor.master,
            interval_us=period,
            anchor_offset_us=offset % period,
            hop_increment=increment,
            start_channel=start,
            channel_map=channel_map,
            event_airtime_us=airtime,
            worst_case_queueing_us=(offset - sensor.read_phase_us) % period,
            packet_bytes=sensor.packet_bytes,
            range_group=group,
        )
        for other in placed.get(group, []):
            overlap = periodic_overlap(
                entry.anchor_offset_us,
                period,
                airtime,
                other.anchor_offset_us,
                other.interval_us,
                other.event_airtime_us,
            )
            if overlap is not None:
                reason = f"explicit slot overlaps {other.sensor_id}"
                _report_issue(report, sensor.master, reason, sensor.sensor_id)
                break
        if entry.worst_case_delay_us > sensor.deadline:
            _report_issue(report, sensor.master, "deadline miss", sensor.sensor_id)
        placed.setdefault(group, []).append(entry)
        entries.append(entry)
    logger.info(f"explicit schedule checked: {len(entries)} entries, {len(report.issues)} issues")
    return Schedule(entries, report if report else None)
