"""
Discrete-event core: clock, event queue and seeded random streams.
"""

from .engine import US_PER_MS, US_PER_S, Event, EventHandle, EventKind, Simulator
from .rng import RngStreams

__all__ = [
    "Event",
    "EventHandle",
    "EventKind",
    "RngStreams",
    "Simulator",
    "US_PER_MS",
    "US_PER_S",
]
