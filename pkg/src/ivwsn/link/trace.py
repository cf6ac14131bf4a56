"""
Packet trace: one row per transmission, optionally written as CSV.

Every row names the transmitting node and the node it was addressed to or,
for advertisements, the scanner that listened.
"""
import csv
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Union

TRACE_COLUMNS = [
    "time_us",
    "sender",
    "receiver",
    "direction",
    "kind",
    "channel",
    "length_bytes",
    "crc_ok",
    "rssi_dbm",
]


@dataclass(frozen=True)
class TraceRecord:
    time_us: int
    sender: str
    receiver: str
    direction: str
    kind: str
    channel: int
    length_bytes: int
    crc_ok: bool
    rssi_dbm: float


class PacketTrace:
    """In-memory trace; disabled traces drop records on the floor."""

    def __init__(self, enabled: bool = True) -> None:
        self.enabled = enabled
        self.records: List[TraceRecord] = []

    def record(
        self,
        time_us: int,
        sender: str,
        receiver: str,
        direction: str,
        kind: str,
        channel: int,
        length_bytes: int,
        crc_ok: bool,
        rssi_dbm: Optional[float],
    ) -> None:
        if not self.enabled:
            return
        self.records.append(
            TraceRecord(
                time_us,
                sender,
                receiver,
                direction,
                kind,
                channel,
                length_bytes,
                crc_ok,
                round(rssi_dbm, 2) if rssi_dbm is not None else float("nan"),
            )
        )

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=TRACE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for record in self.records:
                row = asdict(record)
                row["crc_ok"] = int(record.crc_ok)
                writer.writerow(row)
        return path
