"""
Vehicle-side PKE state: lock state, unlock decisions and the auto-lock timer.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

from ..sim.engine import EventHandle, EventKind, Simulator
from .manager import ConnectionManager
from .model import PkeConfig, RegionClass
from .rssi import RssiHandler

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PullDecision:
    time_us: int
    unlocked: bool
    key_id: Optional[str] = None
    latency_us: Optional[int] = None


@dataclass(frozen=True)
class LockEvent:
    time_us: int
    empty_since_us: int


class PkeController:
    """
    Args:
        sim: Event engine, used to arm the lock timer
        config: PKE settings
        manager: Connection manager holding the active key list
        rssi: RSSI handler holding the regions
    """

    def __init__(
        self, sim: Simulator, config: PkeConfig, manager: ConnectionManager, rssi: RssiHandler
    ) -> None:
        self.sim = sim
        self.config = config
        self.manager = manager
        self.rssi = rssi
        self.locked = True
        self.decisions: List[PullDecision] = []
        self.lock_events: List[LockEvent] = []
        self.empty_since_us: Optional[int] = None
        self._timer: Optional[EventHandle] = None

    def handle_pull(self, t: int) -> PullDecision:
        """Unlock iff some active key is in region C right now."""
        best = self.rssi.best_region_c()
        if best is not None and self.manager.is_active(best[0]):
            key_id, c_time = best
            decision = PullDecision(t, True, key_id, t - c_time)
            self.locked = False
            logger.info(f"pull at {t} us: unlock by key {key_id} (latency {t - c_time} us)")
        else:
            decision = PullDecision(t, False)
            logger.info(f"pull at {t} us: denied")
        self.decisions.append(decision)
        return decision

    def region(self, key_id: str) -> RegionClass:
        if not self.manager.is_active(key_id):
            return RegionClass.A
        return self.rssi.region(key_id)

    def on_key_connected(self, t: int) -> None:
        if self._timer is not None:
            self._timer.cancel()
            self._timer = None
            logger.debug(f"lock timer cancelled at {t} us")
        self.empty_since_us = None

    def on_key_disconnected(self, t: int) -> None:
        """Arm the timer when the last active key goes away."""
        if self.manager.active or self.empty_since_us is not None:
            return
        self.empty_since_us = t
        deadline = t + self.config.lock_timeout_us
        self._timer = self.sim.schedule(
            deadline, EventKind.TIMER, lambda: self.lock_timer(self.sim.now), "lock timer"
        )
        logger.debug(f"lock timer armed at {t} us")

    def lock_timer(self, t: int) -> bool:
        """Lock if the active list has been empty for the whole timeout."""
        self._timer = None
        if self.manager.active or self.empty_since_us is None:
            return False
        if t - self.empty_since_us < self.config.lock_timeout_us:
            return False
        self.locked = True
        self.lock_events.append(LockEvent(t, self.empty_since_us))
        logger.info(f"vehicle locked at {t} us, no key since {self.empty_since_us} us")
        return True
