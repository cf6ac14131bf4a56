"""
Link-layer controller for one simulation run.

Owns the devices, piconets, advertisers and scanners, drives connection
events from the event queue and reports deliveries, connection changes
and per-event outcomes to registered listeners.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence

from ..errors import ConfigurationError, ConnectionRejected
from ..phy.channel import ChannelModel, InterferenceSource, TxParams
from ..sim.engine import EventHandle, EventKind, Simulator
from ..sim.rng import CHANNEL, TRAFFIC, RngStreams
from .advertising import AdvertisementReport, Advertiser, AdvertisingConfig, Scanner
from .connection import (
    DEFAULT_MASTER_CAPACITY,
    Connection,
    ConnectionParams,
    Direction,
    EventOutcome,
    Piconet,
    QueuedPayload,
    connection_event,
    update_channel_map,
)
from .device import Device, GapRole
from .hopping import HOP_INCREMENT_RANGE, ChannelAssessor, ChannelSelector, classify_interference
from .packet import ADVERTISING_ACCESS_ADDRESS, CONNECT_REQ, LinkPacket, PacketKind
from .trace import PacketTrace

logger = logging.getLogger(__name__)

ConnectionListener = Callable[[Connection], None]
DisconnectListener = Callable[[Connection, str], None]
EventListener = Callable[[Connection, EventOutcome], None]
DeliveryListener = Callable[[Connection, Direction, QueuedPayload, int], None]


class LinkLayer:
    """
    Args:
        sim: Event engine of the run
        channel_model: Radio model used for every transmission
        rng_streams: Named random streams of the run
        trace: Optional packet trace
    """

    def __init__(
        self,
        sim: Simulator,
        channel_model: ChannelModel,
        rng_streams: RngStreams,
        trace: Optional[PacketTrace] = None,
    ) -> None:
        self.sim = sim
        self.channel_model = channel_model
        self.rng_streams = rng_streams
        self.channel_rng = rng_streams.stream(CHANNEL)
        self.traffic_rng = rng_streams.stream(TRAFFIC)
        self.trace = trace or PacketTrace(enabled=False)
        self.devices: Dict[str, Device] = {}
        self.piconets: Dict[str, Piconet] = {}
        self.advertisers: Dict[str, Advertiser] = {}
        self.scanners: Dict[str, Scanner] = {}
        self.event_counts: Dict[str, int] = {}
        self._anchors: Dict[int, EventHandle] = {}
        self._access_addresses = {ADVERTISING_ACCESS_ADDRESS}
        self.connected_listeners: List[ConnectionListener] = []
        self.disconnected_listeners: List[DisconnectListener] = []
        self.event_listeners: List[EventListener] = []
        self.delivery_listeners: List[DeliveryListener] = []

    @property
    def interferers(self) -> Sequence[InterferenceSource]:
        return self.channel_model.interferers

    def add_device(self, device: Device) -> Device:
        if device.node_id in self.devices:
            raise ConfigurationError(f"duplicate device id {device.node_id}")
        self.devices[device.node_id] = device
        return device

    def device(self, node_id: str) -> Device:
        try:
            return self.devices[node_id]
        except KeyError:
            raise ConfigurationError(f"unknown device {node_id}") from None

    def piconet(self, master: str, capacity: int = DEFAULT_MASTER_CAPACITY) -> Piconet:
        if master not in self.piconets:
            self.piconets[master] = Piconet(master, capacity)
        return self.piconets[master]

    def connections(self) -> List[Connection]:
        return [c for p in self.piconets.values() for c in p.connections.values()]

    # broadcast group

    def advertise(self, node_id: str, config: AdvertisingConfig, at: Optional[int] = None) -> Advertiser:
        """Start periodic advertising of ``node_id``."""
        device = self.device(node_id)
        if not device.has_role(GapRole.BROADCASTER, GapRole.PERIPHERAL):
            raise ConfigurationError(f"{node_id} is neither broadcaster nor peripheral")
        advertiser = self.advertisers.get(node_id)
        if advertiser is None or advertiser.config != config:
            advertiser = Advertiser(self, device, config)
            self.advertisers[node_id] = advertiser
        advertiser.start(at)
        logger.debug(f"{node_id} advertising every {config.interval_us} us")
        return advertiser

    def scan(
        self,
        node_id: str,
        duration_us: Optional[int] = None,
        dwell_us: int = 10_000,
        channels: Optional[Sequence[int]] = None,
        on_advertisement: Optional[Callable[[AdvertisementReport], None]] = None,
    ) -> Scanner:
        """
        Start scanning; the returned scanner collects reports as the run proceeds.
        """
        device = self.device(node_id)
        if not device.has_role(GapRole.OBSERVER, GapRole.CENTRAL):
            raise ConfigurationError(f"{node_id} is neither observer nor central")
        kwargs = {"channels": channels} if channels else {}
        scanner = Scanner(self, device, dwell_us, on_advertisement=on_advertisement, **kwargs)
        scanner.start(self.sim.now, duration_us)
        self.scanners[node_id] = scanner
        return scanner

    def scan_for(
        self,
        node_id: str,
        duration_us: int,
        dwell_us: int = 10_000,
        channels: Optional[Sequence[int]] = None,
    ) -> List[AdvertisementReport]:
        """
        Scan for ``duration_us`` and return what was heard.

        Drives the event queue to the end of the window, so it is for callers
        outside event actions. Each report carries the advertisement data and
        its RSSI; nothing in range gives an empty list.
        """
        if duration_us <= 0:
            raise ConfigurationError("scan duration must be > 0")
        scanner = self.scan(node_id, duration_us, dwell_us, channels)
        self.sim.run_until(self.sim.now + duration_us)
        if self.scanners.get(node_id) is scanner:
            del self.scanners[node_id]
        return list(scanner.reports)

    def broadcast(self, advertiser: Device, packet: LinkPacket, channel: int) -> None:
        t = self.sim.now
        for scanner in self.scanners.values():
            listener = scanner.device
            if listener.node_id == advertiser.node_id or not scanner.active_at(t):
                continue
            if scanner.listening_channel(t) != channel:
                continue
            if not self.channel_model.has_link(advertiser.node_id, listener.node_id):
                continue
            link = self.channel_model.link(advertiser.node_id, listener.node_id)
            rx = self.channel_model.transmit(
                link,
                TxParams(advertiser.tx_power_dbm, channel),
                packet.length_bits,
                self.interferers,
                t,
                self.channel_rng,
            )
            self.trace.record(
                t, advertiser.node_id, listener.node_id, "adv", PacketKind.ADVERTISEMENT.value, channel,
                packet.total_length, rx.delivered, rx.rssi_dbm,
            )
            if rx.delivered:
                scanner.receive(
                    AdvertisementReport(
                        t, advertiser.node_id, packet.payload[:4], packet.payload[4:], channel, rx.rssi_dbm
                    )
                )

    # connections

    def _new_access_address(self) -> int:
        while True:
            candidate = int(self.traffic_rng.integers(0, 2**32))
            if candidate not in self._access_addresses:
                self._access_addresses.add(candidate)
                return candidate

    def establish(
        self,
        master: str,
        slave: str,
        params: ConnectionParams,
        anchor_us: int,
        capacity: int = DEFAULT_MASTER_CAPACITY,
    ) -> Connection:
        """
        Create and start a connection whose first event is at ``anchor_us``.

        Raises:
            ConfigurationError: role, piconet-membership or capacity problems
        """
        master_dev, slave_dev = self.device(master), self.device(slave)
        if not master_dev.has_role(GapRole.CENTRAL):
            raise ConfigurationError(f"{master} is not a central")
        if not slave_dev.has_role(GapRole.PERIPHERAL):
            raise ConfigurationError(f"{slave} is not a peripheral")
        if slave_dev.piconet is not None:
            raise ConfigurationError(f"{slave} already belongs to the piconet of {slave_dev.piconet}")
        self.channel_model.link(master, slave)

        increment = params.hop_increment
        if increment is None:
            low, high = HOP_INCREMENT_RANGE
            increment = int(self.traffic_rng.integers(low, high + 1))
        first = params.first_channel
        if first is None:
            first = int(self.traffic_rng.integers(0, 37))
        selector = ChannelSelector.starting_at(first, increment, params.channel_map)
        assessor = ChannelAssessor(params.afh_window) if params.afh_window else None
        conn = Connection(
            master,
            slave,
            self._new_access_address(),
            params.interval_us,
            anchor_us,
            selector,
            supervision_events=params.supervision_events,
            master_tx_power_dbm=master_dev.tx_power_dbm,
            slave_tx_power_dbm=slave_dev.tx_power_dbm,
            assessor=assessor,
        )
        conn.afh_threshold = params.afh_threshold
        conn.afh_auto = params.afh_auto
        self.piconet(master, capacity).add(conn)
        slave_dev.piconet = master
        advertiser = self.advertisers.get(slave)
        if advertiser is not None:
            advertiser.stop()
        self._schedule_anchor(conn)
        logger.info(f"connected {master} -> {slave} (first event at {anchor_us} us)")
        for listener in self.connected_listeners:
            listener(conn)
        return conn

    def initiate_connection(
        self,
        central: str,
        peer: str,
        params: ConnectionParams,
        pass_code: Optional[bytes] = None,
        channel: int = 37,
    ) -> Optional[Connection]:
        """
        Send a connection request to an advertising peer.

        Returns:
            The new connection, or None if the request was lost on the air

        Raises:
            ConnectionRejected: the peer requires a different pass code
        """
        t = self.sim.now
        central_dev, peer_dev = self.device(central), self.device(peer)
        request = LinkPacket.advertisement(
            central_dev.address + peer_dev.address + (pass_code or b"")[:24], CONNECT_REQ
        )
        link = self.channel_model.link(central, peer)
        rx = self.channel_model.transmit(
            link,
            TxParams(central_dev.tx_power_dbm, channel),
            request.length_bits,
            self.interferers,
            t,
            self.channel_rng,
        )
        self.trace.record(
            t, central, peer, "conn-req", PacketKind.ADVERTISEMENT.value, channel,
            request.total_length, rx.delivered, rx.rssi_dbm,
        )
        if not rx.delivered:
            logger.debug(f"connection request {central} -> {peer} lost")
            return None
        if peer_dev.pass_code is not None and pass_code != peer_dev.pass_code:
            logger.info(f"{peer} rejected connection request from {central}: bad pass code")
            raise ConnectionRejected(f"{peer} rejected {central}: wrong pass code")
        anchor = t + request.airtime_us + params.transmit_offset_us
        return self.establish(central, peer, params, anchor)

    def update_channel_map(self, conn: Connection, new_map: int) -> None:
        update_channel_map(conn, new_map)

    def disconnect(self, conn: Connection, reason: str) -> None:
        if not conn.open:
            return
        conn.open = False
        handle = self._anchors.pop(id(conn), None)
        if handle is not None:
            handle.cancel()
        self.piconets[conn.master].remove(conn.slave)
        self.devices[conn.slave].piconet = None
        logger.info(f"disconnected {conn.master} -> {conn.slave}: {reason}")
        for listener in self.disconnected_listeners:
            listener(conn, reason)
        advertiser = self.advertisers.get(conn.slave)
        if advertiser is not None:
            advertiser.start()

    def enqueue(self, conn: Connection, sender: str, payload: QueuedPayload) -> None:
        conn.endpoint(sender).enqueue(payload)

    def _schedule_anchor(self, conn: Connection) -> None:
        self._anchors[id(conn)] = self.sim.schedule(
            conn.anchor_us,
            EventKind.CONNECTION_ANCHOR,
            lambda: self._on_anchor(conn),
            f"{conn.master}->{conn.slave}",
        )

    def _on_anchor(self, conn: Connection) -> None:
        t = self.sim.now
        outcome = connection_event(conn, t, self.channel_model, self.channel_rng, self.interferers)
        self.event_counts[conn.slave] = self.event_counts.get(conn.slave, 0) + 1
        self._trace_event(conn, outcome)

        if conn.assessor is not None:
            conn.assessor.record(outcome.channel, outcome.clean)
            if conn.afh_auto and conn.assessor.observed % conn.assessor.window == 0:
                suggested = classify_interference(
                    conn.channel_map,
                    conn.assessor.failure_stats(),
                    conn.assessor.observed,
                    conn.assessor.window,
                    conn.afh_threshold,
                )
                if suggested != conn.channel_map:
                    update_channel_map(conn, suggested)

        for listener in self.event_listeners:
            listener(conn, outcome)
        for direction, payload in outcome.delivered.items():
            if direction is Direction.SLAVE_TO_MASTER:
                arrival = outcome.slave_tx_us + outcome.slave_packet.airtime_us
            else:
                arrival = t + outcome.master_packet.airtime_us
            for listener in self.delivery_listeners:
                listener(conn, direction, payload, arrival)

        if conn.missed_events >= conn.supervision_events:
            self.disconnect(conn, "supervision timeout")
        elif conn.open:
            self._schedule_anchor(conn)

    def _trace_event(self, conn: Connection, outcome: EventOutcome) -> None:
        if not self.trace.enabled:
            return
        self.trace.record(
            outcome.time_us, conn.master, conn.slave, Direction.MASTER_TO_SLAVE.value,
            PacketKind.DATA.value, outcome.channel, outcome.master_packet.total_length,
            outcome.master_rx.delivered, outcome.master_rx.rssi_dbm,
        )
        if outcome.slave_packet is not None:
            self.trace.record(
                outcome.slave_tx_us, conn.slave, conn.master, Direction.SLAVE_TO_MASTER.value,
                PacketKind.DATA.value, outcome.channel, outcome.slave_packet.total_length,
                outcome.slave_rx.delivered, outcome.slave_rx.rssi_dbm,
            )
