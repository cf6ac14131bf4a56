"""
Tests for the discrete-event engine and the named random streams.
"""

import numpy as np
import pytest

from ivwsn.errors import SchedulingError
from ivwsn.sim.engine import US_PER_S, EventKind, Simulator
from ivwsn.sim.rng import CHANNEL, TRAFFIC, RngStreams


class TestSimulator:
    """Test cases for event ordering, cancellation and run_until."""

    def test_same_time_runs_before_later_events(self):
        """An event at now() fires before an event scheduled later in time."""
        sim = Simulator()
        order = []
        sim.schedule(10, EventKind.TIMER, lambda: order.append("later"))
        sim.schedule(0, EventKind.TIMER, lambda: order.append("now"))
        sim.run_until(10)
        assert order == ["now", "later"]

    def test_ties_dispatch_in_insertion_order(self):
        """Two events at 500 us scheduled A then B dispatch A then B."""
        sim = Simulator()
        order = []
        sim.schedule(500, EventKind.TIMER, lambda: order.append("A"))
        sim.schedule(500, EventKind.TIMER, lambda: order.append("B"))
        sim.run_until(500)
        assert order == ["A", "B"]

    def test_tie_order_follows_insertion_for_any_permutation(self):
        """Permuting insertion of equal-time events permutes dispatch the same way."""
        for labels in (["a", "b", "c"], ["c", "a", "b"], ["b", "c", "a"]):
            sim = Simulator()
            order = []
            for label in labels:
                sim.schedule(7, EventKind.TIMER, lambda x=label: order.append(x))
            sim.run_until(7)
            assert order == labels

    def test_cancelled_event_never_fires(self):
        """cancel(handle) before dispatch drops the event."""
        sim = Simulator()
        fired = []
        handle = sim.schedule(100, EventKind.TIMER, lambda: fired.append(1))
        sim.cancel(handle)
        assert sim.run_until(1_000) == 0
        assert fired == []
        assert not handle.active

    def test_schedule_in_past_is_rejected(self):
        """Scheduling before the clock raises SchedulingError."""
        sim = Simulator()
        sim.run_until(1_000)
        with pytest.raises(SchedulingError):
            sim.schedule(999, EventKind.TIMER, lambda: None)

    def test_run_until_backwards_is_rejected(self):
        """run_until cannot move the clock back."""
        sim = Simulator()
        sim.run_until(1_000)
        with pytest.raises(SchedulingError):
            sim.run_until(10)

    def test_nested_run_until_is_rejected(self):
        """An event action cannot drive the clock itself; the engine stays usable afterwards."""
        sim = Simulator()
        sim.schedule(10, EventKind.TIMER, lambda: sim.run_until(20))
        with pytest.raises(SchedulingError, match="inside an event"):
            sim.run_until(100)
        assert sim.run_until(200) == 0

    def test_empty_queue_advances_clock(self):
        """Empty queue, run_until(10^6): nothing dispatched, clock at 10^6 us."""
        sim = Simulator()
        assert sim.run_until(US_PER_S) == 0
        assert sim.now == US_PER_S

    def test_future_event_not_dispatched(self):
        """An event at 2 s is not dispatched by run_until(1 s)."""
        sim = Simulator()
        sim.schedule(2 * US_PER_S, EventKind.TIMER, lambda: None)
        assert sim.run_until(US_PER_S) == 0
        assert sim.pending == 1
        assert sim.peek() == 2 * US_PER_S

    def test_periodic_events_count(self):
        """1000 periodic events of period 2 s all dispatch by 2000 s."""
        sim = Simulator()
        period = 2 * US_PER_S
        remaining = [1000]

        def tick():
            remaining[0] -= 1
            if remaining[0]:
                sim.schedule_in(period, EventKind.SENSOR_READ, tick)

        sim.schedule(period, EventKind.SENSOR_READ, tick)
        assert sim.run_until(2000 * US_PER_S) == 1000
        assert sim.dispatched == 1000

    def test_dispatch_times_are_monotonic(self):
        """The clock seen by actions never goes backwards."""
        sim = Simulator()
        seen = []
        for t in (50, 10, 30, 10, 40):
            sim.schedule(t, EventKind.TIMER, lambda: seen.append(sim.now))
        sim.run_until(100)
        assert seen == sorted(seen)


class TestRngStreams:
    """Test cases for per-consumer random streams."""

    def test_same_seed_and_name_repeat(self):
        """Identical (seed, stream) pairs give identical draws."""
        a = RngStreams(42).stream(CHANNEL).random(5)
        b = RngStreams(42).stream(CHANNEL).random(5)
        assert np.array_equal(a, b)

    def test_streams_are_independent_of_use_order(self):
        """Drawing from one stream does not shift another."""
        first = RngStreams(7)
        first.stream(TRAFFIC).random(100)
        shifted = first.stream(CHANNEL).random(3)
        clean = RngStreams(7).stream(CHANNEL).random(3)
        assert np.array_equal(shifted, clean)

    def test_distinct_names_differ(self):
        """Different stream names give different sequences."""
        streams = RngStreams(1)
        assert not np.array_equal(streams.stream(CHANNEL).random(4), streams.stream(TRAFFIC).random(4))

    def test_keyed_generator_is_reproducible(self):
        """A keyed cell gives the same draw however often it is rebuilt."""
        streams = RngStreams(3)
        assert streams.keyed(CHANNEL, (1, 2)).random() == streams.keyed(CHANNEL, (1, 2)).random()

    def test_negative_seed_rejected(self):
        """Seeds are 64-bit unsigned."""
        with pytest.raises(ValueError):
            RngStreams(-1)
