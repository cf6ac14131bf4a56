"""
Physical layer: channel plan, BER curves and the intra-vehicle radio model.
"""

from .ber import BerCurve, FixedBer, NoncoherentFskBer, TabulatedBer, ber_from_config
from .channel import (
    COHERENCE_PROFILES,
    ChannelModel,
    Compartment,
    InterferenceSource,
    PacketOutcome,
    RadioLink,
    Reception,
    TxParams,
    friis_path_loss_db,
    link_key,
)
from .channels import (
    ADVERTISING_CHANNELS,
    DATA_CHANNEL_COUNT,
    channel_frequency,
    is_advertising,
    overlap_fraction,
)

__all__ = [
    "ADVERTISING_CHANNELS",
    "BerCurve",
    "COHERENCE_PROFILES",
    "ChannelModel",
    "Compartment",
    "DATA_CHANNEL_COUNT",
    "FixedBer",
    "InterferenceSource",
    "NoncoherentFskBer",
    "PacketOutcome",
    "RadioLink",
    "Reception",
    "TabulatedBer",
    "TxParams",
    "ber_from_config",
    "channel_frequency",
    "friis_path_loss_db",
    "is_advertising",
    "link_key",
    "overlap_fraction",
]
