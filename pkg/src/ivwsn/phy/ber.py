"""
Bit-error-rate curves: SINR (dB) -> per-bit error probability.
"""
import math
from typing import Any, Iterable, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError


class BerCurve:
    """Interface for pluggable BER models."""

    name = "abstract"

    def bit_error_probability(self, sinr_db: float) -> float:
        raise NotImplementedError


class NoncoherentFskBer(BerCurve):
    """Noncoherent binary FSK: p = 1/2 * exp(-SNR/2), SNR linear."""

    name = "noncoherent-fsk"

    def bit_error_probability(self, sinr_db: float) -> float:
        snr = 10.0 ** (sinr_db / 10.0)
        return min(1.0, max(0.0, 0.5 * math.exp(-snr / 2.0)))


class FixedBer(BerCurve):
    """Same error probability at every SINR; handy for calibrated experiments."""

    name = "fixed"

    def __init__(self, probability: float) -> None:
        if not 0.0 <= probability <= 1.0:
            raise ConfigurationError(f"bit error probability {probability} outside [0, 1]")
        self.probability = probability

    def bit_error_probability(self, sinr_db: float) -> float:
        return self.probability


class TabulatedBer(BerCurve):
    """
    Measured curve given as (sinr_db, ber) points, linearly interpolated in dB.

    Outside the table the end values are held.
    """

    name = "table"

    def __init__(self, points: Iterable[Sequence[float]]) -> None:
        pairs: Sequence[Tuple[float, float]] = sorted(
            (float(p[0]), float(p[1])) for p in points
        )
        if len(pairs) < 2:
            raise ConfigurationError("a BER table needs at least two points")
        if any(not 0.0 <= ber <= 1.0 for _, ber in pairs):
            raise ConfigurationError("BER table values must lie in [0, 1]")
        self._sinr = np.array([p[0] for p in pairs])
        self._ber = np.array([p[1] for p in pairs])

    def bit_error_probability(self, sinr_db: float) -> float:
        return float(np.interp(sinr_db, self._sinr, self._ber))


def ber_from_config(value: Any) -> BerCurve:
    """
    Build a curve from its scenario representation.

    ``"noncoherent-fsk"`` selects the default model, a number selects
    :class:`FixedBer`, and a list of pairs selects :class:`TabulatedBer`.
    """
    if value is None or value == NoncoherentFskBer.name:
        return NoncoherentFskBer()
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return FixedBer(float(value))
    if isinstance(value, (list, tuple)):
        return TabulatedBer(value)
    raise ConfigurationError(f"unknown BER model {value!r}")
