"""
Tests for scenario files: parsing, validation with line numbers, templates
and dotted overrides.
"""

import pytest

from ivwsn.errors import ConfigurationError, ScenarioError
from ivwsn.scenario.loader import (
    apply_override,
    list_templates,
    load_scenario,
    parse_document,
    parse_override_value,
    resolve_reference,
)
from ivwsn.sim.engine import US_PER_S

TINY = """
name: tiny
run: {duration_s: 2, seed: 3}
nodes:
  - {id: ecu, role: central}
  - {id: tyre, role: peripheral}
piconets:
  - master: ecu
    sensors:
      - {id: tyre, read_period_ms: 500}
"""


class TestLoadScenario:
    """Test cases for loading and validating scenario files."""

    def test_minimal_scenario(self, write_scenario):
        """A small file loads into typed settings."""
        scenario = load_scenario(str(write_scenario(TINY)))
        assert scenario.name == "tiny"
        assert (scenario.run.seed, scenario.run.duration_us) == (3, 2 * US_PER_S)
        (spec,) = scenario.sensor_specs()
        assert (spec.sensor_id, spec.master, spec.read_period_us) == ("tyre", "ecu", 500_000)
        assert scenario.sensor_nodes() == {"tyre": "tyre"}
        assert scenario.node("tyre").roles == ("peripheral",)

    def test_name_defaults_to_file_stem(self, write_scenario):
        """Without a name the file name is used."""
        path = write_scenario(TINY.replace("name: tiny\n", ""), name="door-sensors.yaml")
        assert load_scenario(str(path)).name == "door-sensors"

    def test_unknown_field_names_line(self, write_scenario):
        """Unknown fields are reported with their key and line."""
        path = write_scenario(TINY.replace("run:", "colour: red\nrun:"))
        with pytest.raises(ScenarioError) as info:
            load_scenario(str(path))
        error = info.value
        assert (error.key, error.line) == ("colour", 2)
        assert str(error).startswith(f"{path}:2: colour: unknown field")

    def test_tx_power_out_of_range(self, write_scenario):
        """12 dBm is above the allowed transmit power."""
        path = write_scenario(
            TINY.replace("{id: tyre, role: peripheral}", "{id: tyre, role: peripheral, tx_power_dbm: 12}")
        )
        with pytest.raises(ScenarioError) as info:
            load_scenario(str(path))
        assert info.value.key == "nodes.1.tx_power_dbm"
        assert info.value.line == 5

    def test_nothing_to_simulate(self, write_scenario):
        """Nodes alone, without piconets or keyless entry, are rejected."""
        path = write_scenario("nodes:\n  - {id: ecu, role: central}\n")
        with pytest.raises(ScenarioError, match="nothing to simulate"):
            load_scenario(str(path))

    def test_destination_must_be_master(self, write_scenario):
        """Sensors only report to their own master."""
        path = write_scenario(TINY.replace("read_period_ms: 500}", "read_period_ms: 500, destination: tyre}"))
        with pytest.raises(ScenarioError) as info:
            load_scenario(str(path))
        assert info.value.key == "piconets.0.sensors.0.destination"

    def test_undefined_sensor_node(self, write_scenario):
        """A sensor on a node that does not exist is rejected."""
        path = write_scenario(
            TINY.replace("{id: tyre, read_period_ms: 500}", "{id: brake, read_period_ms: 500}")
        )
        with pytest.raises(ScenarioError, match="undefined node 'brake'"):
            load_scenario(str(path))

    def test_master_needs_central_role(self, write_scenario):
        """Piconet masters are centrals."""
        path = write_scenario(TINY.replace("{id: ecu, role: central}", "{id: ecu, role: observer}"))
        with pytest.raises(ScenarioError, match="must have role central"):
            load_scenario(str(path))

    def test_wrong_type(self, write_scenario):
        """Values that do not convert are reported with the expected type."""
        path = write_scenario(TINY.replace("duration_s: 2", "duration_s: long"))
        with pytest.raises(ScenarioError, match="expected float"):
            load_scenario(str(path))

    def test_payload_too_large(self, write_scenario):
        """Payloads above 37 bytes do not fit a data frame."""
        path = write_scenario(TINY.replace("read_period_ms: 500}", "read_period_ms: 500, payload_bytes: 38}"))
        with pytest.raises(ScenarioError) as info:
            load_scenario(str(path))
        assert info.value.key == "piconets.0.sensors.0.payload_bytes"

    def test_packet_bytes(self, write_scenario):
        """A sensor may declare its total packet length; it reaches the sensor spec."""
        path = write_scenario(
            TINY.replace("read_period_ms: 500}", "read_period_ms: 500, payload_bytes: 8, packet_bytes: 20}")
        )
        (spec,) = load_scenario(str(path)).sensor_specs()
        assert (spec.payload_bytes, spec.total_bytes, spec.packet_bytes) == (8, 20, 20)

    def test_packet_bytes_too_short(self, write_scenario):
        """A total length below payload plus frame overhead is reported on its key."""
        path = write_scenario(
            TINY.replace("read_period_ms: 500}", "read_period_ms: 500, payload_bytes: 12, packet_bytes: 20}")
        )
        with pytest.raises(ScenarioError, match="22..47") as info:
            load_scenario(str(path))
        assert info.value.key == "piconets.0.sensors.0.packet_bytes"

    def test_interferer_coupling_is_path_loss_only(self, write_scenario):
        """Interferers couple through path_loss_db; a placement field is not accepted."""
        path = write_scenario(
            TINY + "interferers:\n  - {center_mhz: 2428, bandwidth_mhz: 10, position: trunk}\n"
        )
        with pytest.raises(ScenarioError, match="path_loss_db") as info:
            load_scenario(str(path))
        assert info.value.key == "interferers.0.position"

    def test_cross_compartment_loss_floor(self, write_scenario):
        """Cross-compartment links lose at least 80 dB."""
        path = write_scenario(
            TINY + "links:\n  - {a: ecu, b: tyre, path_loss_db: 60, relation: cross}\n"
        )
        with pytest.raises(ScenarioError) as info:
            load_scenario(str(path))
        assert info.value.key == "links.0.path_loss_db"

    def test_automatic_afh_needs_window(self, write_scenario):
        """Automatic classification has no window to work with otherwise."""
        path = write_scenario(TINY + "afh: {auto: true}\n")
        with pytest.raises(ScenarioError, match="needs a window"):
            load_scenario(str(path))

    def test_parse_error_has_line(self, write_scenario):
        """Broken YAML is reported with a line number."""
        path = write_scenario("name: x\nrun: [1, 2\nnodes: []\n")
        with pytest.raises(ScenarioError) as info:
            load_scenario(str(path))
        assert info.value.line is not None

    def test_top_level_must_be_mapping(self):
        """A list document is not a scenario."""
        with pytest.raises(ScenarioError):
            parse_document("- a\n- b\n", "list.yaml")

    def test_relative_trace_csv(self, write_scenario, tmp_path):
        """Trace CSV paths are relative to the scenario file."""
        walk = "time_s,distance_m,action\n0,30,\n10,1,\n12,,pull\n"
        (tmp_path / "walk.csv").write_text(walk, encoding="utf-8")
        path = write_scenario(
            """
            nodes:
              - {id: car, role: central}
              - {id: fob, role: peripheral}
            pke:
              central: car
              keys:
                - {id: fob, pass_code: "1234", address: "0a:0b:0c:0d"}
              traces:
                - {key: fob, csv: walk.csv}
            """
        )
        scenario = load_scenario(str(path))
        (key,) = scenario.pke.keys
        assert key.address == b"\x0a\x0b\x0c\x0d"
        assert key.pass_code == b"1234"
        assert scenario.pke.traces[0].distance_at(10 * US_PER_S) == 1.0

    def test_scenario_errors_are_configuration_errors(self):
        """Scenario problems share the configuration-error exit path."""
        assert issubclass(ScenarioError, ConfigurationError)


class TestOverrides:
    """Test cases for dotted-key overrides."""

    def test_override_applied_before_validation(self, write_scenario):
        """Overrides change the loaded scenario."""
        path = write_scenario(TINY)
        scenario = load_scenario(
            str(path), {"run.seed": 9, "piconets.0.sensors.0.read_period_ms": 1000}
        )
        assert scenario.run.seed == 9
        assert scenario.sensor_specs()[0].read_period_us == 1_000_000

    def test_override_does_not_touch_input(self):
        """The original document is left as it was."""
        data = {"run": {"seed": 1}}
        assert apply_override(data, "run.seed", 2) == {"run": {"seed": 2}}
        assert data == {"run": {"seed": 1}}

    def test_missing_top_level_section_created(self):
        """Known sections may be introduced by an override."""
        assert apply_override({}, "afh.window", 100) == {"afh": {"window": 100}}

    def test_unknown_path_rejected(self):
        """Paths through keys that do not exist are errors."""
        with pytest.raises(ScenarioError) as info:
            apply_override({"run": {}}, "radio.power", 3)
        assert info.value.key == "radio"

    def test_bad_list_index(self):
        """List segments must name an existing element."""
        with pytest.raises(ScenarioError):
            apply_override({"nodes": [{"id": "a"}]}, "nodes.3.id", "b")

    def test_unknown_leaf_fails_validation(self, write_scenario):
        """A new leaf key still has to pass field validation."""
        with pytest.raises(ScenarioError, match="unknown field"):
            load_scenario(str(write_scenario(TINY)), {"run.speed": 3})

    @pytest.mark.parametrize("text, value", [("1000", 1000), ("0.5", 0.5), ("true", True), ("abc", "abc")])
    def test_override_values_are_yaml_scalars(self, text, value):
        """Command-line values are read as YAML scalars."""
        assert parse_override_value(text) == value


class TestTemplates:
    """Test cases for the shipped scenario templates."""

    def test_shipped_templates(self):
        """The evaluation templates are all present."""
        names = set(list_templates())
        assert {"paper-delay", "paper-energy", "paper-afh", "paper-pke", "multi-piconet"} <= names

    @pytest.mark.parametrize("name", sorted(list_templates()))
    def test_template_loads(self, name):
        """Every shipped template validates."""
        scenario = load_scenario(f"template:{name}")
        assert scenario.source == f"template:{name}"

    def test_unknown_template(self):
        """Unknown template names list the available ones."""
        with pytest.raises(ScenarioError, match="available"):
            resolve_reference("template:nope")

    def test_bare_name_resolves(self):
        """A bare template name works when no such file exists."""
        assert resolve_reference("paper-delay").stem == "paper-delay"

    def test_extra_directory_shadows(self, tmp_path, write_scenario):
        """Templates in an extra directory override shipped ones by name."""
        write_scenario(TINY, name="paper-delay.yaml")
        assert load_scenario("template:paper-delay", templates_dir=str(tmp_path)).name == "tiny"

    def test_missing_file(self, tmp_path):
        """A missing scenario file is a scenario error."""
        with pytest.raises(ScenarioError, match="not found"):
            resolve_reference(str(tmp_path / "absent.yaml"))

    def test_with_run_copies(self):
        """Changing run settings leaves the original scenario alone."""
        scenario = load_scenario("template:paper-delay")
        other = scenario.with_run(seed=99, duration_s=1.0)
        assert other.run.seed == 99 and other.run.duration_s == 1.0
        assert scenario.run.seed != 99 or scenario.run.duration_s != 1.0
