"""
RSSI handler: per-key median filter and region classification.
"""
import logging
from collections import deque
from typing import Deque, Dict, Optional, Tuple

import numpy as np

from .model import PkeConfig, RegionClass

logger = logging.getLogger(__name__)


class RssiHandler:
    """
    Classifies each active key from the median of its last RSSI samples.

    Until the window is full the key is treated as region B. Once in region C
    a key stays there until the median drops to ``threshold - hysteresis``.
    """

    def __init__(self, config: PkeConfig) -> None:
        self.config = config
        self._windows: Dict[str, Deque[float]] = {}
        self._regions: Dict[str, RegionClass] = {}
        self._last_c_us: Dict[str, int] = {}
        self.ignored_samples = 0

    def activate(self, key_id: str) -> None:
        self._windows[key_id] = deque(maxlen=self.config.rssi_window)
        self._regions[key_id] = RegionClass.B
        self._last_c_us.pop(key_id, None)

    def deactivate(self, key_id: str) -> None:
        self._windows.pop(key_id, None)
        self._regions.pop(key_id, None)
        self._last_c_us.pop(key_id, None)

    def smoothed(self, key_id: str) -> Optional[float]:
        window = self._windows.get(key_id)
        if not window or len(window) < self.config.rssi_window:
            return None
        return float(np.median(np.fromiter(window, dtype=float)))

    def update(self, key_id: str, rssi_dbm: float, t: int) -> RegionClass:
        """Push one sample taken at connection event ``t`` and reclassify."""
        window = self._windows.get(key_id)
        if window is None:
            self.ignored_samples += 1
            logger.warning(f"RSSI sample for inactive key {key_id} ignored")
            return RegionClass.A
        window.append(rssi_dbm)
        median = self.smoothed(key_id)
        if median is None:
            region = RegionClass.B
        elif self._regions.get(key_id) is RegionClass.C:
            exit_level = self.config.rssi_threshold_dbm - self.config.hysteresis_db
            region = RegionClass.C if median > exit_level else RegionClass.B
        else:
            region = RegionClass.C if median > self.config.rssi_threshold_dbm else RegionClass.B
        if region is not self._regions.get(key_id):
            logger.debug(f"key {key_id} now in region {region.value} (median {median} dBm)")
        self._regions[key_id] = region
        if region is RegionClass.C:
            self._last_c_us[key_id] = t
        return region

    def region(self, key_id: str) -> RegionClass:
        return self._regions.get(key_id, RegionClass.A)

    def last_region_c_us(self, key_id: str) -> Optional[int]:
        return self._last_c_us.get(key_id)

    def best_region_c(self) -> Optional[Tuple[str, int]]:
        """Key in region C with the freshest region-C sample, with that sample's time."""
        candidates = [
            (t, key) for key, t in self._last_c_us.items() if self._regions.get(key) is RegionClass.C
        ]
        if not candidates:
            return None
        t, key = max(candidates)
        return key, t
