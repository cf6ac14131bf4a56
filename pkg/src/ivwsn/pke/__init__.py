"""
Passive keyless entry on top of the simulated BLE link layer.
"""

from .app import PkeApplication
from .controller import LockEvent, PkeController, PullDecision
from .manager import (
    AdvertisementReceived,
    ConnectionFailed,
    ConnectionManager,
    Connected,
    Disconnected,
    InitiateConnection,
    ResumeScan,
    ScanTick,
)
from .mobility import MobilityTrace, UserAction
from .model import KeyRecord, KeyState, PkeConfig, RegionClass
from .rssi import RssiHandler

__all__ = [
    "AdvertisementReceived",
    "ConnectionFailed",
    "ConnectionManager",
    "Connected",
    "Disconnected",
    "InitiateConnection",
    "KeyRecord",
    "KeyState",
    "LockEvent",
    "MobilityTrace",
    "PkeApplication",
    "PkeConfig",
    "PkeController",
    "PullDecision",
    "RegionClass",
    "ResumeScan",
    "RssiHandler",
    "ScanTick",
    "UserAction",
]
