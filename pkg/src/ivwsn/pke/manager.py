"""
Connection manager: valid key list, active key list and the reactions to
link-layer events.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Union

from ..errors import ConfigurationError
from .model import KeyRecord, KeyState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdvertisementReceived:
    time_us: int
    address: bytes
    rssi_dbm: float = 0.0
    channel: int = 37


@dataclass(frozen=True)
class Connected:
    time_us: int
    key_id: str


@dataclass(frozen=True)
class Disconnected:
    time_us: int
    key_id: str
    reason: str = ""


@dataclass(frozen=True)
class ConnectionFailed:
    time_us: int
    key_id: str
    reason: str = ""


@dataclass(frozen=True)
class ScanTick:
    time_us: int


ManagerEvent = Union[AdvertisementReceived, Connected, Disconnected, ConnectionFailed, ScanTick]


@dataclass(frozen=True)
class InitiateConnection:
    key_id: str
    address: bytes
    pass_code: bytes
    channel: int


@dataclass(frozen=True)
class ResumeScan:
    key_id: str


ManagerAction = Union[InitiateConnection, ResumeScan]


class ConnectionManager:
    """
    Args:
        keys: Valid keys; advertisements from any other address are ignored
    """

    def __init__(self, keys: Iterable[KeyRecord]) -> None:
        self.keys: Dict[str, KeyRecord] = {}
        self._by_address: Dict[bytes, KeyRecord] = {}
        for key in keys:
            if key.key_id in self.keys or key.address in self._by_address:
                raise ConfigurationError(f"duplicate key {key.key_id}")
            self.keys[key.key_id] = key
            self._by_address[key.address] = key
        self.active: List[str] = []
        self.pending: Dict[str, int] = {}
        self.ignored_advertisements = 0

    def key_for(self, address: bytes) -> Optional[KeyRecord]:
        return self._by_address.get(address)

    def is_active(self, key_id: str) -> bool:
        return key_id in self.active

    def step(self, event: ManagerEvent) -> List[ManagerAction]:
        """Apply one event; defined for every event in every state."""
        if isinstance(event, AdvertisementReceived):
            return self._on_advertisement(event)
        if isinstance(event, Connected):
            key = self.keys.get(event.key_id)
            if key is None:
                return []
            self.pending.pop(key.key_id, None)
            key.state = KeyState.CONNECTED
            if key.key_id not in self.active:
                self.active.append(key.key_id)
                logger.info(f"key {key.key_id} active at {event.time_us} us")
            return []
        if isinstance(event, Disconnected):
            key = self.keys.get(event.key_id)
            if key is None:
                return []
            self.pending.pop(key.key_id, None)
            key.state = KeyState.UNDISCOVERED
            if key.key_id in self.active:
                self.active.remove(key.key_id)
                logger.info(f"key {key.key_id} inactive at {event.time_us} us ({event.reason})")
            return [ResumeScan(key.key_id)]
        if isinstance(event, ConnectionFailed):
            key = self.keys.get(event.key_id)
            if key is None:
                return []
            self.pending.pop(key.key_id, None)
            if key.state is not KeyState.CONNECTED:
                key.state = KeyState.UNDISCOVERED
            logger.debug(f"connection to key {key.key_id} failed: {event.reason}")
            return []
        return []

    def _on_advertisement(self, event: AdvertisementReceived) -> List[ManagerAction]:
        key = self._by_address.get(event.address)
        if key is None:
            self.ignored_advertisements += 1
            return []
        if key.state is KeyState.CONNECTED or key.key_id in self.pending:
            return []
        key.state = KeyState.ADVERTISING_SEEN
        self.pending[key.key_id] = event.time_us
        return [InitiateConnection(key.key_id, key.address, key.pass_code, event.channel)]
