"""
Connections, piconets and the connection-event exchange.

One connection event is one master packet followed, if the slave received
it CRC-clean, by one slave packet 150 us later on the same hop channel.
Acknowledgement uses the SN/NESN header bits: an unacknowledged payload
stays in the sender's retransmit buffer and goes out again at the next
event; the receiver drops repeats it has already accepted.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, InvariantViolation
from ..phy.channel import ChannelModel, InterferenceSource, Reception, TxParams
from .hopping import ChannelAssessor, ChannelSelector, validate_channel_map
from .packet import CRC24_INIT, LinkPacket

logger = logging.getLogger(__name__)

T_IFS_US = 150
DEFAULT_SUPERVISION_EVENTS = 6
DEFAULT_MASTER_CAPACITY = 8


class Direction(Enum):
    MASTER_TO_SLAVE = "m2s"
    SLAVE_TO_MASTER = "s2m"


@dataclass
class QueuedPayload:
    """One application payload waiting for (or in) transmission."""

    data: bytes
    source: str
    enqueued_us: int
    priority: int = 0
    sequence: int = 0
    transmissions: int = 0
    first_tx_us: Optional[int] = None
    packet_bytes: Optional[int] = None

    @property
    def retransmissions(self) -> int:
        return max(0, self.transmissions - 1)


class LinkEndpoint:
    """Transmit queue, retransmit buffer and SN/NESN state of one side."""

    def __init__(self) -> None:
        self.queue: Deque[QueuedPayload] = deque()
        self.sn = 0
        self.nesn = 0
        self.awaiting_ack = False
        self.inflight: Optional[QueuedPayload] = None

    def enqueue(self, payload: QueuedPayload) -> None:
        self.queue.append(payload)

    def next_payload(self, t: int) -> Optional[QueuedPayload]:
        """Payload for the next packet: the unacknowledged one, else the queue head."""
        if not self.awaiting_ack:
            self.inflight = self.queue.popleft() if self.queue else None
            self.awaiting_ack = True
        if self.inflight is not None:
            self.inflight.transmissions += 1
            if self.inflight.first_tx_us is None:
                self.inflight.first_tx_us = t
        return self.inflight

    def accept(self, sn: int) -> bool:
        """True when a clean packet with this SN is new (not a repeat)."""
        if sn == self.nesn:
            self.nesn ^= 1
            return True
        return False

    def acknowledge(self, peer_nesn: int) -> Optional[QueuedPayload]:
        """Apply the peer's NESN; returns the payload that got acknowledged, if any."""
        if not self.awaiting_ack or peer_nesn == self.sn:
            return None
        acked = self.inflight
        self.inflight = None
        self.awaiting_ack = False
        self.sn ^= 1
        return acked

    @property
    def backlog(self) -> int:
        return len(self.queue) + (1 if self.inflight is not None else 0)


@dataclass(frozen=True)
class ConnectionParams:
    """
    Parameters carried by a connection request.

    ``hop_increment`` and ``first_channel`` default to draws from the
    traffic stream when left unset.
    """

    interval_us: int
    hop_increment: Optional[int] = None
    channel_map: int = (1 << 37) - 1
    first_channel: Optional[int] = None
    supervision_events: int = DEFAULT_SUPERVISION_EVENTS
    transmit_offset_us: int = 1_250
    afh_window: Optional[int] = None
    afh_threshold: float = 0.5
    afh_auto: bool = False

    def __post_init__(self) -> None:
        if self.interval_us <= 0:
            raise ConfigurationError("connection interval must be > 0")
        validate_channel_map(self.channel_map)
        if self.supervision_events < 1:
            raise ConfigurationError("supervision timeout must cover at least one event")


class Connection:
    """
    Master-slave link state.

    Args:
        master: Master node id
        slave: Slave node id
        access_address: 32-bit address unique to this connection
        interval_us: Connection interval
        anchor_us: Time of the next connection event
        selector: Hop state (increment, channel map, last unmapped channel)
    """

    def __init__(
        self,
        master: str,
        slave: str,
        access_address: int,
        interval_us: int,
        anchor_us: int,
        selector: ChannelSelector,
        supervision_events: int = DEFAULT_SUPERVISION_EVENTS,
        master_tx_power_dbm: float = 0.0,
        slave_tx_power_dbm: float = 0.0,
        crc_init: int = CRC24_INIT,
        assessor: Optional[ChannelAssessor] = None,
    ) -> None:
        self.master = master
        self.slave = slave
        self.access_address = access_address
        self.interval_us = interval_us
        self.anchor_us = anchor_us
        self.selector = selector
        self.supervision_events = supervision_events
        self.master_tx_power_dbm = master_tx_power_dbm
        self.slave_tx_power_dbm = slave_tx_power_dbm
        self.crc_init = crc_init
        self.assessor = assessor
        self.afh_threshold = 0.5
        self.afh_auto = False
        self.master_end = LinkEndpoint()
        self.slave_end = LinkEndpoint()
        self.pending_channel_map: Optional[int] = None
        self.event_counter = 0
        self.missed_events = 0
        self.open = True

    @property
    def hop_increment(self) -> int:
        return self.selector.hop_increment

    @property
    def channel_map(self) -> int:
        return self.selector.channel_map

    @property
    def last_unmapped_channel(self) -> int:
        return self.selector.last_unmapped_channel

    def endpoint(self, node: str) -> LinkEndpoint:
        if node == self.master:
            return self.master_end
        if node == self.slave:
            return self.slave_end
        raise ConfigurationError(f"{node} is not an end of connection {self.master}-{self.slave}")

    def __repr__(self) -> str:
        return (
            f"Connection({self.master}->{self.slave}, aa={self.access_address:#010x}, "
            f"interval={self.interval_us}us, anchor={self.anchor_us})"
        )


@dataclass
class EventOutcome:
    """What happened in one connection event."""

    time_us: int
    channel: int
    master_packet: LinkPacket
    master_rx: Reception
    slave_packet: Optional[LinkPacket] = None
    slave_rx: Optional[Reception] = None
    slave_tx_us: Optional[int] = None
    delivered: Dict[Direction, QueuedPayload] = field(default_factory=dict)
    acknowledged: Dict[Direction, QueuedPayload] = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return self.master_rx.delivered and self.slave_rx is not None and self.slave_rx.delivered

    @property
    def airtime_us(self) -> int:
        if self.slave_packet is None:
            return self.master_packet.airtime_us
        return self.master_packet.airtime_us + T_IFS_US + self.slave_packet.airtime_us


def hop_next(conn: Connection) -> int:
    """Advance the hop sequence of ``conn`` and return the data channel to use."""
    return conn.selector.next_channel()


def update_channel_map(conn: Connection, new_map: int) -> None:
    """Stage a new channel map; it takes effect at the next connection event."""
    validate_channel_map(new_map)
    conn.pending_channel_map = new_map
    logger.debug(f"{conn!r}: channel map {new_map:#011x} staged")


def connection_event(
    conn: Connection,
    t: int,
    channel_model: ChannelModel,
    rng: np.random.Generator,
    interferers: Sequence[InterferenceSource] = (),
) -> EventOutcome:
    """
    Run one connection event at its anchor and advance the anchor.

    Raises:
        InvariantViolation: if ``t`` is not the connection anchor
    """
    if t != conn.anchor_us:
        raise InvariantViolation("connection-anchor", f"event at {t} us, anchor is {conn.anchor_us} us")
    if conn.pending_channel_map is not None:
        conn.selector.set_channel_map(conn.pending_channel_map)
        conn.pending_channel_map = None
    channel = hop_next(conn)
    link = channel_model.link(conn.master, conn.slave)
    master, slave = conn.master_end, conn.slave_end

    m_payload = master.next_payload(t)
    m_packet = LinkPacket.data(
        conn.access_address,
        m_payload.data if m_payload else b"",
        sn=master.sn,
        nesn=master.nesn,
        crc_init=conn.crc_init,
        packet_bytes=m_payload.packet_bytes if m_payload else None,
    )
    m_rx = channel_model.transmit(
        link, TxParams(conn.master_tx_power_dbm, channel), m_packet.length_bits, interferers, t, rng
    )
    outcome = EventOutcome(t, channel, m_packet, m_rx)

    if m_rx.delivered:
        if slave.accept(m_packet.sn) and m_payload is not None:
            outcome.delivered[Direction.MASTER_TO_SLAVE] = m_payload
        acked = slave.acknowledge(m_packet.nesn)
        if acked is not None:
            outcome.acknowledged[Direction.SLAVE_TO_MASTER] = acked

        t_slave = t + m_packet.airtime_us + T_IFS_US
        s_payload = slave.next_payload(t_slave)
        s_packet = LinkPacket.data(
            conn.access_address,
            s_payload.data if s_payload else b"",
            sn=slave.sn,
            nesn=slave.nesn,
            crc_init=conn.crc_init,
            packet_bytes=s_payload.packet_bytes if s_payload else None,
        )
        s_rx = channel_model.transmit(
            link, TxParams(conn.slave_tx_power_dbm, channel), s_packet.length_bits, interferers, t_slave, rng
        )
        outcome.slave_packet, outcome.slave_rx, outcome.slave_tx_us = s_packet, s_rx, t_slave
        if s_rx.delivered:
            if master.accept(s_packet.sn) and s_payload is not None:
                outcome.delivered[Direction.SLAVE_TO_MASTER] = s_payload
            acked = master.acknowledge(s_packet.nesn)
            if acked is not None:
                outcome.acknowledged[Direction.MASTER_TO_SLAVE] = acked

    conn.missed_events = 0 if outcome.clean else conn.missed_events + 1
    conn.event_counter += 1
    conn.anchor_us = t + conn.interval_us
    return outcome


class Piconet:
    """
    One master and its slaves; star topology.

    Args:
        master: Master node id
        capacity: Maximum number of simultaneous slaves
    """

    def __init__(self, master: str, capacity: int = DEFAULT_MASTER_CAPACITY) -> None:
        if capacity < 1:
            raise ConfigurationError("piconet capacity must be >= 1")
        self.master = master
        self.capacity = capacity
        self.connections: Dict[str, Connection] = {}

    @property
    def slaves(self) -> List[str]:
        return list(self.connections)

    def add(self, conn: Connection) -> None:
        if conn.master != self.master:
            raise ConfigurationError(f"{conn!r} does not belong to piconet of {self.master}")
        if conn.slave in self.connections:
            raise ConfigurationError(f"{conn.slave} is already connected to {self.master}")
        if len(self.connections) >= self.capacity:
            raise ConfigurationError(f"piconet of {self.master} is full ({self.capacity} slaves)")
        for other in self.connections.values():
            if other.access_address == conn.access_address:
                raise ConfigurationError(f"access address {conn.access_address:#010x} reused in piconet")
            if (
                other.hop_increment == conn.hop_increment
                and other.last_unmapped_channel == conn.last_unmapped_channel
                and other.anchor_us % other.interval_us == conn.anchor_us % conn.interval_us
            ):
                raise ConfigurationError(
                    f"{conn.slave} would share the hop sequence of {other.slave}"
                )
        self.connections[conn.slave] = conn

    def remove(self, slave: str) -> Optional[Connection]:
        return self.connections.pop(slave, None)
