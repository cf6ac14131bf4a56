"""
Run reports: aggregation of a :class:`RunLog`, CSV writers and the text
summary.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..energy import (
    EnergyParams,
    EnergyReport,
    average_current,
    battery_life,
    lifetime_breakdown,
    measured_energy,
    round_current_ma,
)
from ..sim.engine import US_PER_MS, US_PER_S
from .collector import RunLog

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ["scope", "name", "metric", "value"]
ENERGY_COLUMNS = ["node", "events", "consumed_mah", "projected_life_hours"]


@dataclass(frozen=True)
class SensorStats:
    delivered: int
    mean_delay_us: float
    p95_delay_us: float
    max_delay_us: int
    mean_queueing_us: float
    max_queueing_us: int
    transmission_us: int
    propagation_ns: float
    retransmissions: int


@dataclass(frozen=True)
class ModelEnergy:
    """Closed-form energy figures of one slave at its connection interval."""

    node: str
    interval_ms: float
    average_current_ma: float
    life_hours: float

    @property
    def rounded_current_ma(self) -> float:
        return round_current_ma(self.average_current_ma)

    @property
    def rounded_life_hours(self) -> float:
        return self.life_hours_from(self.rounded_current_ma)

    def life_hours_from(self, current_ma: float) -> float:
        return self.life_hours * self.average_current_ma / current_ma


@dataclass
class RunReport:
    duration_us: int
    sensors: Dict[str, SensorStats] = field(default_factory=dict)
    goodput_bps: Dict[str, float] = field(default_factory=dict)
    offered_bps: Dict[str, float] = field(default_factory=dict)
    delivery_ratio: float = 1.0
    packet_success_ratio: float = 1.0
    retransmissions: int = 0
    channel_events: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    energy: List[EnergyReport] = field(default_factory=list)
    energy_model: List[ModelEnergy] = field(default_factory=list)
    extra: Dict[str, float] = field(default_factory=dict)


def _sensor_stats(log: RunLog) -> Dict[str, SensorStats]:
    by_sensor: Dict[str, list] = {}
    for record in log.delays:
        by_sensor.setdefault(record.sensor_id, []).append(record)
    stats = {}
    for sensor in sorted(by_sensor):
        records = by_sensor[sensor]
        totals = np.array([r.total_us for r in records], dtype=np.int64)
        queueing = np.array([r.queueing_us for r in records], dtype=np.int64)
        stats[sensor] = SensorStats(
            delivered=len(records),
            mean_delay_us=float(totals.mean()),
            p95_delay_us=float(np.percentile(totals, 95)),
            max_delay_us=int(totals.max()),
            mean_queueing_us=float(queueing.mean()),
            max_queueing_us=int(queueing.max()),
            transmission_us=records[-1].transmission_us,
            propagation_ns=records[-1].propagation_ns,
            retransmissions=sum(r.retransmissions for r in records),
        )
    return stats


def delivery_ratio(log: RunLog) -> float:
    """
    Delivered payloads over payloads that went on air at least once.

    Readings still waiting in a queue when the run stops are not counted. If
    payloads were generated but none ever reached the air the ratio is 0.
    """
    on_air = sum(log.on_air.values())
    delivered = len(log.delays)
    if on_air:
        return min(1.0, delivered / on_air)
    return 0.0 if sum(log.generated.values()) else 1.0


def finalize_run(
    log: RunLog,
    duration_us: int,
    energy_params: Optional[EnergyParams] = None,
    slaves: Sequence[str] = (),
    intervals_ms: Optional[Dict[str, float]] = None,
) -> RunReport:
    """
    Aggregate a run log into a report. Pure: the same log gives the same report.

    Args:
        log: Log of the finished run
        duration_us: Simulated time covered by the run
        energy_params: Energy model; no energy rows without it
        slaves: Nodes that get an energy row
        intervals_ms: node -> connection interval for the closed-form figures
    """
    seconds = duration_us / US_PER_S
    report = RunReport(duration_us=duration_us)
    report.sensors = _sensor_stats(log)
    report.goodput_bps = {
        link: log.delivered_bits.get(link, 0) / seconds for link in sorted(log.offered_bits)
    } if seconds else {}
    report.offered_bps = (
        {link: bits / seconds for link, bits in sorted(log.offered_bits.items())} if seconds else {}
    )
    report.delivery_ratio = delivery_ratio(log)
    report.packet_success_ratio = (
        log.clean_transmissions / log.transmissions if log.transmissions else 1.0
    )
    report.retransmissions = log.retransmissions
    report.channel_events = dict(log.channel_events)

    if energy_params is not None:
        for node in slaves:
            report.energy.append(
                measured_energy(log.event_counts.get(node, 0), duration_us / US_PER_MS, energy_params, node)
            )
        for node, interval_ms in sorted((intervals_ms or {}).items()):
            current = average_current(energy_params, interval_ms)
            report.energy_model.append(
                ModelEnergy(node, interval_ms, current, battery_life(energy_params, current))
            )
    logger.info(
        f"run finalized: {len(log.delays)} deliveries, delivery ratio {report.delivery_ratio:.4f}"
    )
    return report


def _fmt(value: Union[int, float, str]) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def metrics_rows(report: RunReport) -> List[Dict[str, str]]:
    rows: List[Tuple[str, str, str, Union[int, float, str]]] = [
        ("run", "all", "duration_us", report.duration_us),
        ("run", "all", "delivery_ratio", report.delivery_ratio),
        ("run", "all", "packet_success_ratio", report.packet_success_ratio),
        ("run", "all", "retransmissions", report.retransmissions),
    ]
    for sensor, s in report.sensors.items():
        rows += [
            ("sensor", sensor, "delivered", s.delivered),
            ("sensor", sensor, "mean_delay_us", s.mean_delay_us),
            ("sensor", sensor, "p95_delay_us", s.p95_delay_us),
            ("sensor", sensor, "max_delay_us", s.max_delay_us),
            ("sensor", sensor, "mean_queueing_us", s.mean_queueing_us),
            ("sensor", sensor, "max_queueing_us", s.max_queueing_us),
            ("sensor", sensor, "transmission_us", s.transmission_us),
            ("sensor", sensor, "propagation_ns", s.propagation_ns),
            ("sensor", sensor, "retransmissions", s.retransmissions),
        ]
    for link, bps in report.goodput_bps.items():
        rows.append(("link", link, "goodput_bps", bps))
        rows.append(("link", link, "offered_bps", report.offered_bps.get(link, 0.0)))
    for channel, (events, failures) in report.channel_events.items():
        rows.append(("channel", str(channel), "events", events))
        rows.append(("channel", str(channel), "failures", failures))
    for e in report.energy:
        rows.append(("energy", e.node, "events", e.events))
        rows.append(("energy", e.node, "consumed_mah", e.consumed_mah))
        rows.append(("energy", e.node, "projected_life_hours", e.projected_life_hours))
    for key, value in sorted(report.extra.items()):
        rows.append(("run", "all", key, value))
    return [dict(zip(METRICS_COLUMNS, (scope, name, metric, _fmt(v)))) for scope, name, metric, v in rows]


def write_metrics_csv(report: RunReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=METRICS_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(metrics_rows(report))
    return path


def write_energy_csv(report: RunReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=ENERGY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for e in report.energy:
            writer.writerow(
                {
                    "node": e.node,
                    "events": e.events,
                    "consumed_mah": _fmt(e.consumed_mah),
                    "projected_life_hours": _fmt(e.projected_life_hours),
                }
            )
    return path


def format_summary(report: RunReport, title: str = "", seed: Optional[int] = None) -> str:
    lines = []
    if title:
        lines.append(f"scenario: {title}")
    if seed is not None:
        lines.append(f"seed: {seed}")
    lines.append(f"duration: {report.duration_us / US_PER_S:g} s")
    lines.append(f"delivery ratio: {report.delivery_ratio:.4f}")
    lines.append(f"packet success ratio: {report.packet_success_ratio:.4f}")
    lines.append(f"retransmissions: {report.retransmissions}")
    for sensor, s in report.sensors.items():
        lines.append(
            f"sensor {sensor}: transmission delay {s.transmission_us} us, "
            f"propagation delay {s.propagation_ns:.3f} ns, "
            f"mean delay {s.mean_delay_us:.1f} us, p95 {s.p95_delay_us:.1f} us, max {s.max_delay_us} us"
        )
    for link, bps in report.goodput_bps.items():
        lines.append(f"link {link}: goodput {bps:.3f} bps")
    for m in report.energy_model:
        life = lifetime_breakdown(m.rounded_life_hours)
        lines.append(
            f"energy {m.node}: I_c {m.rounded_current_ma:.3f} mA at {m.interval_ms:g} ms "
            f"(unrounded {m.average_current_ma:.6f} mA), "
            f"life {life.hours:.0f} h = {life.days:.0f} days = {life.years:.1f} years"
        )
    for e in report.energy:
        lines.append(
            f"measured {e.node}: {e.events} events, {e.consumed_mah:.6f} mAh, "
            f"I_avg {e.average_current_ma:.6f} mA, projected life {e.projected_life_hours:.0f} h"
        )
    for key, value in sorted(report.extra.items()):
        lines.append(f"{key}: {_fmt(value)}")
    return "\n".join(lines) + "\n"
