"""
Battery-lifetime model of a slave node.

A node spends a fixed charge per connection event and sleeps in between:

    I_avg = (I_event * t_event + I_sleep * (T_interval - t_event)) / T_interval
    life  = capacity / I_avg

Currents are handled in mA, durations in ms, so charge comes out in mA*ms.
"""
import logging
from dataclasses import dataclass

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

MS_PER_HOUR = 3_600_000
HOURS_PER_DAY = 24
DAYS_PER_YEAR = 365


@dataclass(frozen=True)
class EnergyParams:
    """
    Args:
        event_current_ma: Average current during a connection event
        event_duration_ms: Average duration of a connection event
        sleep_current_ua: Sleep current between events, in uA
        battery_capacity_mah: Battery capacity
    """

    event_current_ma: float = 10.655
    event_duration_ms: float = 2.348
    sleep_current_ua: float = 0.9
    battery_capacity_mah: float = 230.0

    def __post_init__(self) -> None:
        for name in ("event_current_ma", "event_duration_ms", "sleep_current_ua", "battery_capacity_mah"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"energy parameter {name} must be > 0")

    @property
    def sleep_current_ma(self) -> float:
        return self.sleep_current_ua / 1000.0


def average_current(params: EnergyParams, interval_ms: float) -> float:
    """Average current in mA at one connection event per ``interval_ms``."""
    if interval_ms <= params.event_duration_ms:
        raise ConfigurationError(
            f"connection interval {interval_ms} ms must exceed the event duration "
            f"{params.event_duration_ms} ms"
        )
    charge = (
        params.event_current_ma * params.event_duration_ms
        + params.sleep_current_ma * (interval_ms - params.event_duration_ms)
    )
    return charge / interval_ms


def battery_life(params: EnergyParams, average_current_ma: float) -> float:
    """Hours until the battery is empty."""
    if average_current_ma <= 0:
        raise ConfigurationError("average current must be > 0")
    return params.battery_capacity_mah / average_current_ma


def round_current_ma(current_ma: float) -> float:
    """Current rounded to 3 decimals, the precision the headline figures use."""
    return round(current_ma, 3)


@dataclass(frozen=True)
class LifetimeBreakdown:
    hours: float

    @property
    def days(self) -> float:
        return self.hours / HOURS_PER_DAY

    @property
    def years(self) -> float:
        return self.days / DAYS_PER_YEAR


def lifetime_breakdown(hours: float) -> LifetimeBreakdown:
    return LifetimeBreakdown(hours)


@dataclass(frozen=True)
class EnergyReport:
    node: str
    events: int
    duration_ms: float
    consumed_mah: float
    average_current_ma: float
    projected_life_hours: float


def measured_energy(events: int, duration_ms: float, params: EnergyParams, node: str = "") -> EnergyReport:
    """
    Energy actually spent by a node over a run.

    Every event costs the same charge whatever happened on the air; the rest
    of the run is sleep.
    """
    if duration_ms <= 0:
        raise ConfigurationError("run duration must be > 0 ms")
    if events < 0:
        raise ConfigurationError("event count must be >= 0")
    awake_ms = events * params.event_duration_ms
    if awake_ms > duration_ms:
        raise ConfigurationError(
            f"{events} events of {params.event_duration_ms} ms do not fit in {duration_ms} ms"
        )
    charge = events * params.event_current_ma * params.event_duration_ms + (
        (duration_ms - awake_ms) * params.sleep_current_ma
    )
    avg = charge / duration_ms
    report = EnergyReport(
        node=node,
        events=events,
        duration_ms=duration_ms,
        consumed_mah=charge / MS_PER_HOUR,
        average_current_ma=avg,
        projected_life_hours=battery_life(params, avg),
    )
    logger.debug(f"{node}: {events} events, I_avg {avg:.6f} mA, life {report.projected_life_hours:.0f} h")
    return report
