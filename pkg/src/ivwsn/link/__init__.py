"""
BLE link layer: frames and CRC, hopping, connections, advertising and the
per-run controller.
"""

from .advertising import AdvertisementReport, Advertiser, AdvertisingConfig, Scanner
from .connection import (
    T_IFS_US,
    Connection,
    ConnectionParams,
    Direction,
    EventOutcome,
    LinkEndpoint,
    Piconet,
    QueuedPayload,
    connection_event,
    hop_next,
    update_channel_map,
)
from .controller import LinkLayer
from .device import Device, GapRole
from .hopping import (
    FULL_CHANNEL_MAP,
    ChannelAssessor,
    ChannelSelector,
    channel_map_from,
    classify_interference,
    enabled_channels,
    exclude_channels,
)
from .packet import LinkPacket, PacketKind, airtime_us, crc24, data_packet_length
from .trace import PacketTrace, TraceRecord

__all__ = [
    "AdvertisementReport",
    "Advertiser",
    "AdvertisingConfig",
    "ChannelAssessor",
    "ChannelSelector",
    "Connection",
    "ConnectionParams",
    "Device",
    "Direction",
    "EventOutcome",
    "FULL_CHANNEL_MAP",
    "GapRole",
    "LinkEndpoint",
    "LinkLayer",
    "LinkPacket",
    "PacketKind",
    "PacketTrace",
    "Piconet",
    "QueuedPayload",
    "Scanner",
    "T_IFS_US",
    "TraceRecord",
    "airtime_us",
    "channel_map_from",
    "classify_interference",
    "connection_event",
    "crc24",
    "data_packet_length",
    "enabled_channels",
    "exclude_channels",
    "hop_next",
    "update_channel_map",
]
