"""
PKE application wired onto the simulated link layer.

The central scans continuously; keys advertise while unconnected. Each
connection event's slave packet gives the central one RSSI sample of the
key, and scripted user actions arrive as events from the mobility traces.
"""
import logging
from typing import Dict, List, Sequence

from ..errors import ConnectionRejected
from ..link.advertising import AdvertisementReport, AdvertisingConfig
from ..link.connection import T_IFS_US, Connection, ConnectionParams, EventOutcome
from ..link.controller import LinkLayer
from ..link.packet import ADVERTISEMENT_OVERHEAD_BYTES, airtime_us
from ..sim.engine import EventKind
from .controller import PkeController
from .manager import (
    AdvertisementReceived,
    ConnectionFailed,
    ConnectionManager,
    Connected,
    Disconnected,
    InitiateConnection,
)
from .mobility import MobilityTrace, UserAction
from .model import KeyRecord, PkeConfig
from .rssi import RssiHandler

logger = logging.getLogger(__name__)


class PkeApplication:
    """
    Args:
        link_layer: Link layer holding the central and key devices
        central: Node id of the vehicle's PKE central
        config: PKE settings
        keys: Valid key list
        key_nodes: Node ids of every key device that advertises (valid or not)
        traces: Mobility trace per key node
    """

    def __init__(
        self,
        link_layer: LinkLayer,
        central: str,
        config: PkeConfig,
        keys: Sequence[KeyRecord],
        key_nodes: Sequence[str],
        traces: Sequence[MobilityTrace] = (),
    ) -> None:
        self.link_layer = link_layer
        self.central = central
        self.config = config
        self.manager = ConnectionManager(keys)
        self.rssi = RssiHandler(config)
        self.controller = PkeController(link_layer.sim, config, self.manager, self.rssi)
        self.key_nodes = list(key_nodes)
        self.traces: Dict[str, MobilityTrace] = {t.key_id: t for t in traces}
        self.failed_connections = 0
        self._node_of_key: Dict[str, str] = {}
        for key in keys:
            for node in self.key_nodes:
                if link_layer.device(node).address == key.address:
                    self._node_of_key[key.key_id] = node
        self._key_of_node = {node: key for key, node in self._node_of_key.items()}

        link_layer.connected_listeners.append(self._on_connected)
        link_layer.disconnected_listeners.append(self._on_disconnected)
        link_layer.event_listeners.append(self._on_event)

    def start(self) -> None:
        sim = self.link_layer.sim
        channel_model = self.link_layer.channel_model
        for node, trace in self.traces.items():
            loss = trace.loss_function(self.config.excess_loss_db)
            channel_model.attach_loss_trace(self.central, node, loss)
            for t, action in trace.actions:
                label = f"{node} {action.value}"
                sim.schedule(t, EventKind.USER_ACTION, lambda a=action: self._on_user_action(a), label)
        adv = AdvertisingConfig(self.config.advertising_interval_us)
        for node in self.key_nodes:
            self.link_layer.advertise(node, adv)
        self.link_layer.scan(self.central, on_advertisement=self._on_advertisement)
        logger.info(f"PKE started: {len(self.manager.keys)} valid keys, {len(self.key_nodes)} advertising")

    def _on_advertisement(self, report: AdvertisementReport) -> None:
        actions = self.manager.step(
            AdvertisementReceived(report.time_us, report.address, report.rssi_dbm, report.channel)
        )
        for action in actions:
            if isinstance(action, InitiateConnection):
                adv_length = ADVERTISEMENT_OVERHEAD_BYTES + len(report.address) + len(report.data)
                request_at = report.time_us + airtime_us(adv_length) + T_IFS_US
                self.link_layer.sim.schedule(
                    request_at,
                    EventKind.PACKET_START,
                    lambda a=action: self._initiate(a),
                    f"connect {action.key_id}",
                )

    def _initiate(self, action: InitiateConnection) -> None:
        t = self.link_layer.sim.now
        node = self._node_of_key.get(action.key_id)
        if node is None:
            self.manager.step(ConnectionFailed(t, action.key_id, "no device"))
            return
        params = ConnectionParams(
            interval_us=self.config.connection_interval_us,
            supervision_events=self.config.supervision_events,
        )
        try:
            conn = self.link_layer.initiate_connection(
                self.central, node, params, action.pass_code, action.channel
            )
        except ConnectionRejected as e:
            self.failed_connections += 1
            self.manager.step(ConnectionFailed(t, action.key_id, str(e)))
            return
        if conn is None:
            self.failed_connections += 1
            self.manager.step(ConnectionFailed(t, action.key_id, "request lost"))

    def _on_connected(self, conn: Connection) -> None:
        key_id = self._key_of_node.get(conn.slave)
        if conn.master != self.central or key_id is None:
            return
        t = self.link_layer.sim.now
        self.manager.step(Connected(t, key_id))
        self.rssi.activate(key_id)
        self.controller.on_key_connected(t)

    def _on_disconnected(self, conn: Connection, reason: str) -> None:
        key_id = self._key_of_node.get(conn.slave)
        if conn.master != self.central or key_id is None:
            return
        t = self.link_layer.sim.now
        self.manager.step(Disconnected(t, key_id, reason))
        self.rssi.deactivate(key_id)
        self.controller.on_key_disconnected(t)

    def _on_event(self, conn: Connection, outcome: EventOutcome) -> None:
        key_id = self._key_of_node.get(conn.slave)
        if conn.master != self.central or key_id is None:
            return
        if outcome.slave_rx is not None and outcome.slave_rx.delivered:
            self.rssi.update(key_id, outcome.slave_rx.rssi_dbm, outcome.time_us)

    def _on_user_action(self, action: UserAction) -> None:
        if action is UserAction.PULL:
            self.controller.handle_pull(self.link_layer.sim.now)

    def headline(self) -> Dict[str, float]:
        """Figures reported per run and per sweep row."""
        decisions = self.controller.decisions
        unlocks = [d for d in decisions if d.unlocked]
        latencies: List[int] = [d.latency_us for d in unlocks if d.latency_us is not None]
        return {
            "pulls": len(decisions),
            "unlocks": len(unlocks),
            "denials": len(decisions) - len(unlocks),
            "max_decision_latency_us": max(latencies) if latencies else 0,
            "lock_events": len(self.controller.lock_events),
            "ignored_advertisements": self.manager.ignored_advertisements,
            "ignored_rssi_samples": self.rssi.ignored_samples,
        }
