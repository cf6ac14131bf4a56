"""
Link-layer frames and the 24-bit CRC.

Data frame:          preamble(1) | access address(4) | header(2) | payload(0-37) | crc(3)
Advertisement frame: preamble(1) | access address(4) | header(2) | payload(1-32)

Advertisements carry no CRC. Both are sent at 1 Mbps, so airtime in
microseconds is eight times the byte count. A data packet may be padded
to a declared total length; the padding is sent on air and never handed
to the application.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from ..errors import FrameError

PREAMBLE = 0xAA
ADVERTISING_ACCESS_ADDRESS = 0x8E89BED6
BIT_RATE_BPS = 1_000_000
US_PER_BYTE = 8

DATA_OVERHEAD_BYTES = 10
ADVERTISEMENT_OVERHEAD_BYTES = 7
MAX_DATA_PAYLOAD = 37
MIN_ADVERTISEMENT_PAYLOAD = 1
MAX_ADVERTISEMENT_PAYLOAD = 32
DATA_LENGTH_BOUNDS = (10, 47)
ADVERTISEMENT_LENGTH_BOUNDS = (8, 39)

# x^24 + x^10 + x^9 + x^6 + x^4 + x^3 + x + 1
CRC24_POLYNOMIAL = 0x00065B
CRC24_INIT = 0xFFFFFF
CRC24_MASK = 0xFFFFFF

LLID_DATA = 0b10
LLID_EMPTY = 0b01

ADV_IND = 0x0
CONNECT_REQ = 0x5


def _build_crc24_table(polynomial: int) -> List[int]:
    table = []
    for byte in range(256):
        crc = byte << 16
        for _ in range(8):
            if crc & 0x800000:
                crc = ((crc << 1) ^ polynomial) & CRC24_MASK
            else:
                crc = (crc << 1) & CRC24_MASK
        table.append(crc)
    return table


_CRC24_TABLE = _build_crc24_table(CRC24_POLYNOMIAL)


def crc24(payload: bytes, header: bytes = b"", init: int = CRC24_INIT) -> bytes:
    """
    24-bit CRC over header followed by payload, MSB first.

    Args:
        payload: Payload bytes
        header: Header bytes (covered before the payload)
        init: 24-bit initial register value

    Returns:
        Three checksum bytes, big-endian
    """
    crc = init & CRC24_MASK
    for byte in bytes(header) + bytes(payload):
        crc = ((crc << 8) & CRC24_MASK) ^ _CRC24_TABLE[((crc >> 16) ^ byte) & 0xFF]
    return crc.to_bytes(3, "big")


class PacketKind(Enum):
    DATA = "data"
    ADVERTISEMENT = "advertisement"


def airtime_us(total_length_bytes: int) -> int:
    return US_PER_BYTE * total_length_bytes


def data_packet_length(payload_bytes: int, packet_bytes: Optional[int] = None) -> int:
    """
    Total on-air bytes of a data packet carrying ``payload_bytes``.

    ``packet_bytes`` declares the total explicitly; it must leave room for
    the payload and stay within the data frame bounds.
    """
    if not 0 <= payload_bytes <= MAX_DATA_PAYLOAD:
        raise FrameError(f"data payload {payload_bytes} bytes outside 0..{MAX_DATA_PAYLOAD}")
    natural = DATA_OVERHEAD_BYTES + payload_bytes
    if packet_bytes is None:
        return natural
    high = DATA_LENGTH_BOUNDS[1]
    if not natural <= packet_bytes <= high:
        raise FrameError(
            f"packet of {packet_bytes} bytes cannot carry {payload_bytes} payload bytes "
            f"(needs {natural}..{high})"
        )
    return packet_bytes


def check_length(kind: PacketKind, total_length: int) -> None:
    low, high = DATA_LENGTH_BOUNDS if kind is PacketKind.DATA else ADVERTISEMENT_LENGTH_BOUNDS
    if not low <= total_length <= high:
        raise FrameError(f"{kind.value} packet of {total_length} bytes outside [{low}, {high}]")


@dataclass(frozen=True)
class LinkPacket:
    kind: PacketKind
    access_address: int
    header: bytes
    payload: bytes
    crc: Optional[bytes] = None
    preamble: int = PREAMBLE

    def __post_init__(self) -> None:
        if len(self.header) != 2:
            raise FrameError("link-layer header is exactly 2 bytes")
        if self.kind is PacketKind.ADVERTISEMENT and self.crc is not None:
            raise FrameError("advertisements carry no CRC field")
        if self.kind is PacketKind.DATA and (self.crc is None or len(self.crc) != 3):
            raise FrameError("data packets carry a 3-byte CRC")
        check_length(self.kind, self.total_length)

    @classmethod
    def data(
        cls,
        access_address: int,
        payload: bytes,
        sn: int = 0,
        nesn: int = 0,
        more_data: bool = False,
        crc_init: int = CRC24_INIT,
        packet_bytes: Optional[int] = None,
    ) -> "LinkPacket":
        """
        Build a data packet; an empty payload makes an empty poll/ack PDU.

        With ``packet_bytes`` the payload field is zero-padded so the whole
        packet is that many bytes on air.
        """
        if len(payload) > MAX_DATA_PAYLOAD:
            raise FrameError(f"data payload {len(payload)} bytes exceeds {MAX_DATA_PAYLOAD}")
        if packet_bytes is not None:
            total = data_packet_length(len(payload), packet_bytes)
            payload = bytes(payload) + bytes(total - DATA_OVERHEAD_BYTES - len(payload))
        llid = LLID_DATA if payload else LLID_EMPTY
        flags = llid | (nesn & 1) << 2 | (sn & 1) << 3 | int(more_data) << 4
        header = bytes((flags, len(payload)))
        return cls(
            PacketKind.DATA,
            access_address,
            header,
            bytes(payload),
            crc24(payload, header, crc_init),
        )

    @classmethod
    def advertisement(cls, payload: bytes, pdu_type: int = ADV_IND) -> "LinkPacket":
        if not MIN_ADVERTISEMENT_PAYLOAD <= len(payload) <= MAX_ADVERTISEMENT_PAYLOAD:
            raise FrameError(
                f"advertisement payload {len(payload)} bytes outside "
                f"{MIN_ADVERTISEMENT_PAYLOAD}..{MAX_ADVERTISEMENT_PAYLOAD}"
            )
        header = bytes((pdu_type & 0x0F, len(payload)))
        return cls(PacketKind.ADVERTISEMENT, ADVERTISING_ACCESS_ADDRESS, header, bytes(payload))

    @property
    def total_length(self) -> int:
        return 1 + 4 + len(self.header) + len(self.payload) + (len(self.crc) if self.crc else 0)

    @property
    def airtime_us(self) -> int:
        return airtime_us(self.total_length)

    @property
    def length_bits(self) -> int:
        return 8 * self.total_length

    @property
    def sn(self) -> int:
        return (self.header[0] >> 3) & 1

    @property
    def nesn(self) -> int:
        return (self.header[0] >> 2) & 1

    @property
    def more_data(self) -> bool:
        return bool((self.header[0] >> 4) & 1)

    @property
    def pdu_type(self) -> int:
        return self.header[0] & 0x0F

    def crc_ok(self, crc_init: int = CRC24_INIT) -> bool:
        if self.kind is PacketKind.ADVERTISEMENT:
            return True
        return self.crc == crc24(self.payload, self.header, crc_init)

    def to_bytes(self) -> bytes:
        return (
            bytes((self.preamble,))
            + self.access_address.to_bytes(4, "little")
            + self.header
            + self.payload
            + (self.crc or b"")
        )
