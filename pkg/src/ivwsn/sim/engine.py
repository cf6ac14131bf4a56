"""
Deterministic discrete-event engine.

Time is an integer count of microseconds since the start of the run; one
microsecond is one bit at 1 Mbps, so packet boundaries land on exact ticks.
Events with equal time are dispatched in insertion order.
"""
import heapq
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, List, Optional

from ..errors import SchedulingError

logger = logging.getLogger(__name__)

US_PER_MS = 1_000
US_PER_S = 1_000_000


class EventKind(Enum):
    """What an event stands for; used in logs and for filtering."""

    PACKET_START = "packet-start"
    PACKET_END = "packet-end"
    CONNECTION_ANCHOR = "connection-anchor"
    SENSOR_READ = "sensor-read"
    USER_ACTION = "user-action"
    TIMER = "timer"
    ADVERTISING = "advertising"
    SCAN = "scan"


@dataclass(order=True)
class Event:
    time: int
    sequence: int
    kind: EventKind = field(compare=False)
    action: Callable[[], Any] = field(compare=False, repr=False)
    label: str = field(default="", compare=False)
    cancelled: bool = field(default=False, compare=False)


class EventHandle:
    """Returned by :meth:`Simulator.schedule`; cancels exactly one event."""

    def __init__(self, event: Event) -> None:
        self._event = event

    @property
    def time(self) -> int:
        return self._event.time

    @property
    def active(self) -> bool:
        return not self._event.cancelled

    def cancel(self) -> None:
        self._event.cancelled = True


class Simulator:
    """
    Global clock plus ordered event queue for one simulation run.

    A run owns all of its state; parallel sweeps build one Simulator each.
    """

    def __init__(self) -> None:
        self._queue: List[Event] = []
        self._now = 0
        self._sequence = 0
        self._dispatching = False
        self.dispatched = 0

    @property
    def now(self) -> int:
        """Current simulated time in microseconds."""
        return self._now

    @property
    def pending(self) -> int:
        return sum(1 for event in self._queue if not event.cancelled)

    def schedule(
        self,
        time: int,
        kind: EventKind,
        action: Callable[[], Any],
        label: str = "",
    ) -> EventHandle:
        """
        Enqueue an event.

        Args:
            time: Absolute dispatch time in microseconds
            kind: Event descriptor
            action: Zero-argument callable run at dispatch
            label: Free text for debug logs

        Returns:
            Handle that can cancel the event before it fires

        Raises:
            SchedulingError: if time lies before now
        """
        time = int(time)
        if time < self._now:
            raise SchedulingError(
                f"cannot schedule {kind.value} at {time} us, clock is at {self._now} us"
            )
        event = Event(time, self._sequence, kind, action, label)
        self._sequence += 1
        heapq.heappush(self._queue, event)
        return EventHandle(event)

    def schedule_in(
        self,
        delay: int,
        kind: EventKind,
        action: Callable[[], Any],
        label: str = "",
    ) -> EventHandle:
        """Enqueue an event ``delay`` microseconds from now."""
        return self.schedule(self._now + int(delay), kind, action, label)

    def cancel(self, handle: EventHandle) -> None:
        handle.cancel()

    def run_until(self, t: int) -> int:
        """
        Dispatch every event with time <= t, then set the clock to t.

        Args:
            t: Horizon in microseconds

        Returns:
            Number of events dispatched (cancelled events are not counted)
        """
        t = int(t)
        if t < self._now:
            raise SchedulingError(f"run_until({t}) is before now ({self._now})")
        if self._dispatching:
            raise SchedulingError("run_until called from inside an event action")
        count = 0
        self._dispatching = True
        try:
            while self._queue and self._queue[0].time <= t:
                event = heapq.heappop(self._queue)
                if event.cancelled:
                    continue
                self._now = event.time
                logger.debug(f"t={event.time} dispatch {event.kind.value} {event.label}")
                event.action()
                count += 1
        finally:
            self._dispatching = False
        self._now = t
        self.dispatched += count
        return count

    def peek(self) -> Optional[int]:
        """Time of the next live event, or None."""
        for event in sorted(self._queue):
            if not event.cancelled:
                return event.time
        return None
