"""
Run-time collection of link-layer outcomes into an immutable log.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..errors import InvariantViolation
from ..link.connection import Connection, Direction, EventOutcome, QueuedPayload
from ..link.controller import LinkLayer
from ..link.packet import airtime_us, data_packet_length
from .delay import DelayRecord, propagation_delay_ns

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunLog:
    """Everything :func:`finalize_run` needs; built once the run is over."""

    delays: Tuple[DelayRecord, ...]
    generated: Dict[str, int]
    on_air: Dict[str, int]
    delivered_bits: Dict[str, int]
    link_of_sensor: Dict[str, str]
    transmissions: int
    clean_transmissions: int
    retransmissions: int
    channel_events: Dict[int, Tuple[int, int]]
    event_counts: Dict[str, int]
    offered_bits: Dict[str, int] = field(default_factory=dict)


class MetricsCollector:
    """
    Listens to a :class:`LinkLayer` and records per-payload and per-event
    outcomes.

    Args:
        link_layer: Link layer of the run
        distances: node id -> distance to its master in metres
        check_order: Raise if a sensor's payloads arrive out of order or twice
    """

    def __init__(
        self,
        link_layer: LinkLayer,
        distances: Optional[Dict[str, float]] = None,
        check_order: bool = True,
    ) -> None:
        self.link_layer = link_layer
        self.distances = distances or {}
        self.check_order = check_order
        self.delays: List[DelayRecord] = []
        self.payloads: Dict[str, List[QueuedPayload]] = {}
        self.link_of_sensor: Dict[str, str] = {}
        self.delivered_bits: Dict[str, int] = {}
        self.transmissions = 0
        self.clean_transmissions = 0
        self.channel_events: Dict[int, List[int]] = {}
        self._last_sequence: Dict[str, int] = {}
        link_layer.event_listeners.append(self._on_event)
        link_layer.delivery_listeners.append(self._on_delivery)

    def on_reading(self, sensor_id: str, link: str, payload: QueuedPayload) -> None:
        self.payloads.setdefault(sensor_id, []).append(payload)
        self.link_of_sensor[sensor_id] = link

    def _on_event(self, conn: Connection, outcome: EventOutcome) -> None:
        counts = self.channel_events.setdefault(outcome.channel, [0, 0])
        counts[0] += 1
        if not outcome.clean:
            counts[1] += 1
        self.transmissions += 1
        self.clean_transmissions += int(outcome.master_rx.delivered)
        if outcome.slave_rx is not None:
            self.transmissions += 1
            self.clean_transmissions += int(outcome.slave_rx.delivered)

    def _on_delivery(
        self, conn: Connection, direction: Direction, payload: QueuedPayload, arrival_us: int
    ) -> None:
        if direction is not Direction.SLAVE_TO_MASTER:
            return
        sensor = payload.source
        if self.check_order:
            last = self._last_sequence.get(sensor, -1)
            if payload.sequence <= last:
                raise InvariantViolation(
                    "exactly-once-in-order",
                    f"{sensor} payload {payload.sequence} delivered after {last}",
                )
            self._last_sequence[sensor] = payload.sequence
        transmission = airtime_us(data_packet_length(len(payload.data), payload.packet_bytes))
        link = self.link_of_sensor.get(sensor, conn.slave)
        self.delivered_bits[link] = self.delivered_bits.get(link, 0) + 8 * len(payload.data)
        record = DelayRecord(
            sensor_id=sensor,
            reading_us=payload.enqueued_us,
            delivery_us=arrival_us,
            transmission_us=transmission,
            queueing_us=arrival_us - transmission - payload.enqueued_us,
            propagation_ns=propagation_delay_ns(self.distances.get(conn.slave, 0.0)),
            retransmissions=payload.retransmissions,
        )
        self.delays.append(record)
        logger.debug(
            f"{sensor} #{payload.sequence} delivered after {record.total_us} us "
            f"({record.retransmissions} retransmissions)"
        )

    def log(self) -> RunLog:
        generated = {s: len(p) for s, p in self.payloads.items()}
        on_air = {s: sum(1 for x in p if x.transmissions > 0) for s, p in self.payloads.items()}
        retransmissions = sum(x.retransmissions for p in self.payloads.values() for x in p)
        offered_bits: Dict[str, int] = {}
        for sensor, payloads in self.payloads.items():
            link = self.link_of_sensor[sensor]
            offered_bits[link] = offered_bits.get(link, 0) + sum(8 * len(x.data) for x in payloads)
        return RunLog(
            delays=tuple(self.delays),
            generated=generated,
            on_air=on_air,
            delivered_bits=dict(self.delivered_bits),
            link_of_sensor=dict(self.link_of_sensor),
            transmissions=self.transmissions,
            clean_transmissions=self.clean_transmissions,
            retransmissions=retransmissions,
            channel_events={ch: (c[0], c[1]) for ch, c in sorted(self.channel_events.items())},
            event_counts=dict(sorted(self.link_layer.event_counts.items())),
            offered_bits=offered_bits,
        )
