"""
Tests for the command-line entry point, application settings and utilities.
"""

import csv
import logging

import pytest

import ivwsn.main
from ivwsn.config import Config
from ivwsn.errors import InvariantViolation
from ivwsn.main import EXIT_ERROR, EXIT_INFEASIBLE, EXIT_INVARIANT, EXIT_OK, main
from ivwsn.runner import SWEEP_COLUMNS
from ivwsn.utils import parse_values, setup_logging


@pytest.fixture
def settings(tmp_path):
    """An empty settings file, so no user configuration leaks into the run."""
    path = tmp_path / "settings.yaml"
    path.write_text("logging:\n  level: WARNING\n", encoding="utf-8")
    return str(path)


class TestRunCommand:
    """Test cases for ``ivwsn run``."""

    def test_run_template(self, settings, tmp_path, capsys):
        """A template run prints the summary and writes its artifacts."""
        out = tmp_path / "out"
        code = main(["--config", settings, "run", "template:paper-delay", "--out", str(out)])
        assert code == EXIT_OK
        assert "transmission delay 160 us" in capsys.readouterr().out
        assert (out / "metrics.csv").exists()
        assert not (out / "trace.csv").exists()

    def test_seed_and_trace_flags(self, settings, tmp_path, capsys):
        """--seed reaches the summary; --trace writes the packet trace."""
        out = tmp_path / "out"
        code = main(
            [
                "--config", settings, "run", "paper-delay",
                "--seed", "5", "--until", "0.5", "--trace", "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        assert "seed: 5" in capsys.readouterr().out
        assert (out / "trace.csv").exists()

    def test_infeasible_deadline(self, settings, tmp_path, capsys):
        """A deadline shorter than the worst-case delay exits with status 2."""
        code = main(
            [
                "--config", settings, "run", "template:paper-delay", "--out", str(tmp_path),
                "--set", "piconets.0.sensors.0.deadline_ms=0.5",
            ]
        )
        assert code == EXIT_INFEASIBLE
        assert "schedule infeasible" in capsys.readouterr().err

    def test_invariant_violation(self, settings, tmp_path, monkeypatch, capsys):
        """A broken runtime invariant exits with status 3."""

        def broken(*args, **kwargs):
            raise InvariantViolation("in-order-delivery", "sequence 3 after 4")

        monkeypatch.setattr(ivwsn.main, "run_scenario", broken)
        code = main(["--config", settings, "run", "template:paper-delay", "--out", str(tmp_path)])
        assert code == EXIT_INVARIANT
        assert "in-order-delivery" in capsys.readouterr().err

    def test_unknown_field(self, settings, tmp_path, capsys):
        """Invalid scenario input exits with status 1 and names the key."""
        argv = ["--config", settings, "run", "paper-delay", "--out", str(tmp_path), "--set", "run.speed=3"]
        code = main(argv)
        assert code == EXIT_ERROR
        assert "speed" in capsys.readouterr().err

    def test_malformed_set(self, settings, tmp_path):
        """--set needs KEY=VALUE."""
        argv = ["--config", settings, "run", "paper-delay", "--out", str(tmp_path), "--set", "run.seed"]
        assert main(argv) == EXIT_ERROR

    def test_missing_scenario_file(self, settings, tmp_path):
        """A path that does not exist is bad input."""
        assert main(["--config", settings, "run", str(tmp_path / "absent.yaml")]) == EXIT_ERROR


class TestSweepCommand:
    """Test cases for ``ivwsn sweep``."""

    def test_sweep_writes_csv(self, settings, tmp_path, capsys):
        """One row per value and seed."""
        code = main(
            [
                "--config", settings, "sweep", "template:paper-delay", "--param", "run.duration_s",
                "--values", "0.2,0.4", "--seeds", "2", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        assert "4 rows written" in capsys.readouterr().out
        with (tmp_path / "sweep.csv").open(newline="") as f:
            rows = list(csv.DictReader(f))
        assert [r["value"] for r in rows] == ["0.2", "0.2", "0.4", "0.4"]
        assert list(rows[0]) == SWEEP_COLUMNS

    def test_empty_values(self, settings, tmp_path, capsys):
        """No values, no rows, still success."""
        code = main(
            [
                "--config", settings, "sweep", "paper-delay",
                "--param", "run.seed", "--values", "", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        assert "0 rows written" in capsys.readouterr().out

    def test_unknown_param(self, settings, tmp_path):
        """An unknown sweep key fails before anything runs."""
        code = main(
            [
                "--config", settings, "sweep", "paper-delay",
                "--param", "radio.power", "--values", "1", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_ERROR
        assert not (tmp_path / "sweep.csv").exists()


class TestScheduleAndTemplates:
    """Test cases for ``ivwsn schedule`` and ``ivwsn templates``."""

    def test_schedule(self, settings, tmp_path, capsys):
        """The schedule is printed and written without running."""
        code = main(["--config", settings, "schedule", "template:multi-piconet", "--out", str(tmp_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "utilization" in out
        assert out.count("sensor_id=") == 6
        assert (tmp_path / "schedule.csv").exists()

    def test_schedule_without_sensors(self, settings, capsys):
        """Keyless entry alone has no schedule."""
        assert main(["--config", settings, "schedule", "paper-pke"]) == EXIT_OK
        assert "no sensors" in capsys.readouterr().out

    def test_infeasible_schedule(self, settings, tmp_path, write_scenario, capsys):
        """The schedule command shares the infeasible exit status."""
        path = write_scenario(
            """
            nodes:
              - {id: ecu, role: central}
              - {id: tyre, role: peripheral}
            piconets:
              - master: ecu
                sensors:
                  - {id: tyre, read_period_ms: 100, deadline_ms: 0.2}
            """
        )
        assert main(["--config", settings, "schedule", str(path)]) == EXIT_INFEASIBLE
        assert "tyre" in capsys.readouterr().err

    def test_templates(self, settings, capsys):
        """Every shipped template is listed."""
        assert main(["--config", settings, "templates"]) == EXIT_OK
        out = capsys.readouterr().out
        for name in ("paper-delay", "paper-energy", "paper-afh", "paper-pke", "multi-piconet"):
            assert name in out


class TestConfig:
    """Test cases for application settings."""

    def test_defaults(self, tmp_path):
        """Missing settings fall back to defaults."""
        config = Config(str(tmp_path / "absent.yaml"))
        assert config.get_output_dir() == "out"
        assert config.get_sweep_workers() == 1
        assert config.get_templates_dir() is None

    def test_file_values(self, tmp_path):
        """Dotted keys read nested values."""
        path = tmp_path / "settings.yaml"
        path.write_text("sweep:\n  workers: 4\noutput:\n  dir: results\n", encoding="utf-8")
        config = Config(str(path))
        assert config.get_sweep_workers() == 4
        assert config.get_output_dir() == "results"
        assert config.get("sweep.missing", "x") == "x"

    def test_environment_overrides_file(self, tmp_path, monkeypatch):
        """SWEEP_WORKERS beats the file."""
        path = tmp_path / "settings.yaml"
        path.write_text("sweep:\n  workers: 4\n", encoding="utf-8")
        monkeypatch.setenv("SWEEP_WORKERS", "2")
        assert Config(str(path)).get_sweep_workers() == 2

    def test_invalid_workers(self, tmp_path, monkeypatch):
        """Unparseable worker counts fall back to one."""
        monkeypatch.setenv("SWEEP_WORKERS", "many")
        assert Config(str(tmp_path / "absent.yaml")).get_sweep_workers() == 1

    def test_broken_file(self, tmp_path):
        """An unreadable settings file is ignored."""
        path = tmp_path / "settings.yaml"
        path.write_text("sweep: [1, 2\n", encoding="utf-8")
        assert Config(str(path)).get_log_level() == "INFO"


class TestUtils:
    """Test cases for utility functions."""

    def test_setup_logging(self):
        """All documented levels are accepted."""
        for level in ("DEBUG", "INFO", "WARNING", "ERROR"):
            setup_logging(level)
        setup_logging("bogus")
        assert logging.getLogger("ivwsn").getEffectiveLevel() >= logging.NOTSET

    @pytest.mark.parametrize(
        "text, values",
        [("500,1000, 2000", ["500", "1000", "2000"]), ("", []), (" , ", []), ("-55", ["-55"])],
    )
    def test_parse_values(self, text, values):
        """Comma-separated values, blanks dropped."""
        assert parse_values(text) == values
