"""
Devices and their GAP roles.
"""
import zlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, FrozenSet, Iterable, Optional

from ..errors import ConfigurationError
from ..phy.channel import MAX_TX_POWER_DBM, MIN_TX_POWER_DBM


class GapRole(Enum):
    BROADCASTER = "broadcaster"
    OBSERVER = "observer"
    PERIPHERAL = "peripheral"
    CENTRAL = "central"


def default_address(node_id: str) -> bytes:
    """4-byte device address derived from the node id."""
    return zlib.crc32(node_id.encode("utf-8")).to_bytes(4, "big")


@dataclass
class Device:
    """
    One BLE radio.

    A device is at most one of peripheral/central and may add broadcaster
    or observer on top. A peripheral belongs to at most one piconet.
    """

    node_id: str
    roles: FrozenSet[GapRole]
    tx_power_dbm: float = 0.0
    address: bytes = b""
    pass_code: Optional[bytes] = None
    piconet: Optional[str] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        self.roles = frozenset(self.roles)
        if not self.roles:
            raise ConfigurationError(f"device {self.node_id} has no GAP role")
        if GapRole.PERIPHERAL in self.roles and GapRole.CENTRAL in self.roles:
            raise ConfigurationError(f"device {self.node_id} cannot be both peripheral and central")
        if not MIN_TX_POWER_DBM <= self.tx_power_dbm <= MAX_TX_POWER_DBM:
            raise ConfigurationError(
                f"device {self.node_id}: tx power {self.tx_power_dbm} dBm outside "
                f"[{MIN_TX_POWER_DBM}, {MAX_TX_POWER_DBM}]"
            )
        if not self.address:
            self.address = default_address(self.node_id)
        if len(self.address) != 4:
            raise ConfigurationError(f"device {self.node_id}: address must be 4 bytes")

    def has_role(self, *roles: GapRole) -> bool:
        return any(role in self.roles for role in roles)

    @classmethod
    def with_roles(cls, node_id: str, roles: Iterable[str], **kwargs: Any) -> "Device":
        try:
            parsed = frozenset(GapRole(r) for r in roles)
        except ValueError as e:
            raise ConfigurationError(f"device {node_id}: {e}") from None
        return cls(node_id, parsed, **kwargs)
