"""
Intra-vehicle radio channel.

Per-link path loss plus piecewise-constant log-normal shadowing (one draw
per coherence interval per link and channel), RSSI, SINR against on/off
interferers with flat spectra, and per-packet delivery decisions.
"""
import logging
import math
import zlib
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..sim.engine import US_PER_S
from ..sim.rng import CHANNEL, RngStreams
from .ber import BerCurve, NoncoherentFskBer
from .channels import overlap_fraction, validate_channel

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0
REFERENCE_FREQUENCY_MHZ = 2440.0
MIN_TX_POWER_DBM = -20.0
MAX_TX_POWER_DBM = 10.0
CROSS_COMPARTMENT_MIN_LOSS_DB = 80.0
DEFAULT_NOISE_FLOOR_DBM = -100.0
DEFAULT_SENSITIVITY_DBM = -90.0

# Measured intra-car coherence times run from 2.5 s to a few hundred seconds.
COHERENCE_PROFILES: Dict[str, float] = {
    "highway": 2.5,
    "city": 10.0,
    "parked": 300.0,
}


class Compartment(Enum):
    SAME = "same"
    CROSS = "cross"


class PacketOutcome(Enum):
    DELIVERED = "delivered"
    CORRUPTED = "corrupted"


def friis_path_loss_db(distance_m: float, frequency_mhz: float = REFERENCE_FREQUENCY_MHZ) -> float:
    """
    Free-space loss 20*log10(4*pi*d*f/c).

    Distances below 10 cm are clamped; the far-field formula is meaningless
    closer than that.
    """
    if distance_m < 0:
        raise ConfigurationError(f"distance must be >= 0, got {distance_m}")
    d = max(distance_m, 0.1)
    return 20.0 * math.log10(4.0 * math.pi * d * frequency_mhz * 1e6 / SPEED_OF_LIGHT)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class TxParams:
    tx_power_dbm: float
    channel: int

    def __post_init__(self) -> None:
        if not MIN_TX_POWER_DBM <= self.tx_power_dbm <= MAX_TX_POWER_DBM:
            raise ConfigurationError(
                f"tx power {self.tx_power_dbm} dBm outside "
                f"[{MIN_TX_POWER_DBM}, {MAX_TX_POWER_DBM}] dBm"
            )
        validate_channel(self.channel)


@dataclass(frozen=True)
class RadioLink:
    node_a: str
    node_b: str
    base_path_loss_db: float
    shadowing_sigma_db: float = 0.0
    coherence_time_s: float = COHERENCE_PROFILES["highway"]
    relation: Compartment = Compartment.SAME

    def __post_init__(self) -> None:
        if self.base_path_loss_db < 0:
            raise ConfigurationError(
                f"link {self.node_a}-{self.node_b}: path loss must be >= 0 dB"
            )
        if self.relation is Compartment.CROSS and self.base_path_loss_db < CROSS_COMPARTMENT_MIN_LOSS_DB:
            raise ConfigurationError(
                f"link {self.node_a}-{self.node_b}: cross-compartment loss "
                f"{self.base_path_loss_db} dB is below {CROSS_COMPARTMENT_MIN_LOSS_DB} dB"
            )
        if self.shadowing_sigma_db < 0:
            raise ConfigurationError("shadowing sigma must be >= 0 dB")
        if self.coherence_time_s <= 0:
            raise ConfigurationError("coherence time must be > 0 s")

    @property
    def key(self) -> Tuple[str, str]:
        return link_key(self.node_a, self.node_b)

    @property
    def coherence_time_us(self) -> int:
        return max(1, int(round(self.coherence_time_s * US_PER_S)))


def link_key(a: str, b: str) -> Tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class InterferenceSource:
    """
    A non-BLE emitter (e.g. WiFi) with a flat spectrum and on/off duty cycle.

    ``path_loss_db`` is the coupling loss from the emitter to the receivers
    in the cabin; the emitter's protocol is not modelled.
    """

    center_mhz: float
    bandwidth_mhz: float
    tx_power_dbm: float
    path_loss_db: float = 40.0
    period_us: int = 0
    on_fraction: float = 1.0
    phase_us: int = 0

    def __post_init__(self) -> None:
        if self.bandwidth_mhz <= 0:
            raise ConfigurationError(f"interferer bandwidth must be > 0, got {self.bandwidth_mhz}")
        if not 0.0 <= self.on_fraction <= 1.0:
            raise ConfigurationError(f"interferer on-fraction {self.on_fraction} outside [0, 1]")
        if self.period_us < 0:
            raise ConfigurationError("interferer period must be >= 0")

    @property
    def received_power_dbm(self) -> float:
        return self.tx_power_dbm - self.path_loss_db

    def is_on(self, t: int) -> bool:
        if self.on_fraction <= 0.0:
            return False
        if self.period_us == 0 or self.on_fraction >= 1.0:
            return True
        return (t - self.phase_us) % self.period_us < self.on_fraction * self.period_us


@dataclass(frozen=True)
class Reception:
    outcome: PacketOutcome
    rssi_dbm: float
    sinr_db: float
    bit_error_probability: float

    @property
    def delivered(self) -> bool:
        return self.outcome is PacketOutcome.DELIVERED


LossTrace = Callable[[int], float]


class ChannelModel:
    """
    Radio state for every registered node pair.

    Args:
        rng_streams: Source of the ``channel`` stream and keyed shadowing draws
        links: Registered links (either direction is looked up)
        noise_floor_dbm: Noise power in one 2 MHz channel
        sensitivity_dbm: Packets received below this are never demodulated
        ber_curve: SINR -> BER model
        correlated_shadowing: Use one shadowing draw for all channels of a link
        packet_error_rate: Extra length-independent loss probability
        interferers: Default interferer list used by the link layer
    """

    def __init__(
        self,
        rng_streams: RngStreams,
        links: Iterable[RadioLink] = (),
        noise_floor_dbm: float = DEFAULT_NOISE_FLOOR_DBM,
        sensitivity_dbm: float = DEFAULT_SENSITIVITY_DBM,
        ber_curve: Optional[BerCurve] = None,
        correlated_shadowing: bool = False,
        packet_error_rate: float = 0.0,
        interferers: Sequence[InterferenceSource] = (),
    ) -> None:
        if not 0.0 <= packet_error_rate <= 1.0:
            raise ConfigurationError(f"packet error rate {packet_error_rate} outside [0, 1]")
        self.rng_streams = rng_streams
        self.noise_floor_dbm = noise_floor_dbm
        self.sensitivity_dbm = sensitivity_dbm
        self.ber_curve = ber_curve or NoncoherentFskBer()
        self.correlated_shadowing = correlated_shadowing
        self.packet_error_rate = packet_error_rate
        self.interferers: List[InterferenceSource] = list(interferers)
        self._links: Dict[Tuple[str, str], RadioLink] = {}
        self._loss_traces: Dict[Tuple[str, str], LossTrace] = {}
        self._shadowing: Dict[Tuple[Tuple[str, str], int, int], float] = {}
        for link in links:
            self.add_link(link)

    def add_link(self, link: RadioLink) -> None:
        self._links[link.key] = link

    def attach_loss_trace(self, a: str, b: str, trace: LossTrace) -> None:
        """Make the path loss of link a-b a function of time (mobility)."""
        self._loss_traces[self.link(a, b).key] = trace

    def link(self, a: str, b: str) -> RadioLink:
        try:
            return self._links[link_key(a, b)]
        except KeyError:
            raise ConfigurationError(f"no radio link registered between {a} and {b}") from None

    def has_link(self, a: str, b: str) -> bool:
        return link_key(a, b) in self._links

    @property
    def links(self) -> List[RadioLink]:
        return list(self._links.values())

    def path_loss_db(self, link: RadioLink, t: int) -> float:
        trace = self._loss_traces.get(link.key)
        if trace is not None:
            return trace(t)
        return link.base_path_loss_db

    def shadowing_db(self, link: RadioLink, channel: int, t: int) -> float:
        """Log-normal shadowing, constant within one coherence interval."""
        if link.shadowing_sigma_db == 0.0:
            return 0.0
        interval = t // link.coherence_time_us
        channel_key = 0 if self.correlated_shadowing else channel + 1
        cache_key = (link.key, channel_key, interval)
        value = self._shadowing.get(cache_key)
        if value is None:
            link_id = zlib.crc32("|".join(link.key).encode("utf-8"))
            rng = self.rng_streams.keyed(CHANNEL, (link_id, channel_key, interval))
            value = float(rng.normal(0.0, link.shadowing_sigma_db))
            self._shadowing[cache_key] = value
        return value

    def rssi(self, link: RadioLink, tx: TxParams, t: int) -> float:
        """Received power in dBm: tx power - path loss - shadowing."""
        if link.key not in self._links:
            raise ConfigurationError(f"link {link.node_a}-{link.node_b} is not registered")
        return tx.tx_power_dbm - self.path_loss_db(link, t) - self.shadowing_db(link, tx.channel, t)

    def interference_mw(
        self, channel: int, interferers: Sequence[InterferenceSource], t: int
    ) -> float:
        total = 0.0
        for source in interferers:
            fraction = overlap_fraction(channel, source.center_mhz, source.bandwidth_mhz)
            if fraction <= 0.0 or not source.is_on(t):
                continue
            total += dbm_to_mw(source.received_power_dbm) * fraction
        return total

    def sinr(
        self,
        link: RadioLink,
        tx: TxParams,
        interferers: Sequence[InterferenceSource],
        t: int,
    ) -> float:
        """Signal over noise plus overlapping co-channel interference, in dB."""
        signal = self.rssi(link, tx, t)
        noise_mw = dbm_to_mw(self.noise_floor_dbm) + self.interference_mw(tx.channel, interferers, t)
        return signal - mw_to_dbm(noise_mw)

    def transmit(
        self,
        link: RadioLink,
        tx: TxParams,
        length_bits: int,
        interferers: Sequence[InterferenceSource],
        t: int,
        rng: np.random.Generator,
    ) -> Reception:
        """
        Decide one packet and report what the receiver saw.

        Exactly one uniform draw is consumed per packet whatever the
        conditions, so changing interference never shifts later draws.
        """
        if length_bits <= 0:
            raise ConfigurationError(f"packet length must be > 0 bits, got {length_bits}")
        rssi = self.rssi(link, tx, t)
        sinr = self.sinr(link, tx, interferers, t)
        p = self.ber_curve.bit_error_probability(sinr)
        draw = rng.random()
        if rssi < self.sensitivity_dbm:
            success = 0.0
        else:
            success = (1.0 - p) ** length_bits * (1.0 - self.packet_error_rate)
        outcome = PacketOutcome.DELIVERED if draw < success else PacketOutcome.CORRUPTED
        return Reception(outcome, rssi, sinr, p)

    def packet_outcome(
        self,
        link: RadioLink,
        tx: TxParams,
        length_bits: int,
        interferers: Sequence[InterferenceSource],
        t: int,
        rng: np.random.Generator,
    ) -> PacketOutcome:
        """Delivered with probability (1 - p)^L, p from the BER curve at the SINR."""
        return self.transmit(link, tx, length_bits, interferers, t, rng).outcome
