"""
Tests for the battery-lifetime model.
"""

import pytest

from ivwsn.energy import (
    EnergyParams,
    average_current,
    battery_life,
    lifetime_breakdown,
    measured_energy,
    round_current_ma,
)
from ivwsn.errors import ConfigurationError
from ivwsn.metrics import ModelEnergy


class TestAverageCurrent:
    """Test cases for the closed-form average current."""

    def test_two_second_interval(self):
        """Default parameters at 2 s: 0.013408 mA, 0.013 mA rounded."""
        current = average_current(EnergyParams(), 2000)
        assert current == pytest.approx(0.013408, abs=5e-7)
        assert round_current_ma(current) == 0.013

    def test_one_second_interval(self):
        """Default parameters at 1 s: about 0.02592 mA."""
        assert average_current(EnergyParams(), 1000) == pytest.approx(0.02592, abs=5e-6)

    def test_constant_current(self):
        """Sleeping at the event current gives that current at any interval."""
        params = EnergyParams(event_current_ma=0.5, sleep_current_ua=500.0)
        for interval in (10, 100, 5000):
            assert average_current(params, interval) == pytest.approx(0.5)

    def test_longer_interval_draws_less(self):
        """Average current falls as the interval grows."""
        currents = [average_current(EnergyParams(), ms) for ms in (100, 500, 2000, 10000)]
        assert currents == sorted(currents, reverse=True)

    def test_interval_must_exceed_event(self):
        """An interval no longer than the event itself is rejected."""
        with pytest.raises(ConfigurationError):
            average_current(EnergyParams(), 2.348)

    @pytest.mark.parametrize(
        "field", ["event_current_ma", "event_duration_ms", "sleep_current_ua", "battery_capacity_mah"]
    )
    def test_parameters_must_be_positive(self, field):
        """Every energy parameter is strictly positive."""
        with pytest.raises(ConfigurationError):
            EnergyParams(**{field: 0})


class TestBatteryLife:
    """Test cases for lifetime projection."""

    def test_rounded_headline_life(self):
        """230 mAh at 0.013 mA lasts about 17692 h, two years."""
        hours = battery_life(EnergyParams(), 0.013)
        assert hours == pytest.approx(17692, abs=1)
        breakdown = lifetime_breakdown(hours)
        assert breakdown.days == pytest.approx(737.2, abs=0.1)
        assert breakdown.years == pytest.approx(2.02, abs=0.01)

    def test_model_energy_uses_rounded_current(self):
        """The rounded figure derives life from the 3-decimal current."""
        params = EnergyParams()
        current = average_current(params, 2000)
        model = ModelEnergy("tyre", 2000, current, battery_life(params, current))
        assert model.rounded_current_ma == 0.013
        assert model.rounded_life_hours == pytest.approx(17692.3, abs=0.1)
        assert model.life_hours == pytest.approx(17154, abs=1)

    def test_zero_current_rejected(self):
        """Life is undefined at zero current."""
        with pytest.raises(ConfigurationError):
            battery_life(EnergyParams(), 0.0)


class TestMeasuredEnergy:
    """Test cases for the energy spent over a run."""

    def test_lossless_run_matches_closed_form(self):
        """1000 events in 2000 s agree with the 2 s closed form within 0.1%."""
        params = EnergyParams()
        report = measured_energy(1000, 2_000_000.0, params, "tyre")
        closed = average_current(params, 2000)
        assert report.average_current_ma == pytest.approx(closed, rel=1e-3)
        assert report.projected_life_hours == pytest.approx(battery_life(params, closed), rel=1e-3)
        assert report.node == "tyre"

    def test_zero_events_sleeps(self):
        """No events means sleep current only: about 255,555 h."""
        report = measured_energy(0, 1_000_000.0, EnergyParams())
        assert report.average_current_ma == pytest.approx(0.0009)
        assert report.projected_life_hours == pytest.approx(255_555.6, abs=0.1)

    def test_charge_in_mah(self):
        """One event costs I_event * t_event of charge."""
        params = EnergyParams(sleep_current_ua=1e-9)
        report = measured_energy(1, 10.0, params)
        assert report.consumed_mah == pytest.approx(10.655 * 2.348 / 3_600_000, rel=1e-6)

    def test_events_must_fit(self):
        """More event time than run time is a configuration error."""
        with pytest.raises(ConfigurationError):
            measured_energy(10, 20.0, EnergyParams())

    def test_bad_inputs(self):
        """Negative events and empty runs are rejected."""
        with pytest.raises(ConfigurationError):
            measured_energy(-1, 100.0, EnergyParams())
        with pytest.raises(ConfigurationError):
            measured_energy(0, 0.0, EnergyParams())
