"""
Scenario files: YAML parsing with line tracking, template lookup, dotted
overrides and validation into :class:`Scenario`.
"""
import copy
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import yaml

from ..energy import EnergyParams
from ..errors import ConfigurationError, ScenarioError
from ..link.device import GapRole
from ..link.packet import DATA_LENGTH_BOUNDS, DATA_OVERHEAD_BYTES, MAX_DATA_PAYLOAD
from ..phy.ber import ber_from_config
from ..phy.channel import (
    COHERENCE_PROFILES,
    CROSS_COMPARTMENT_MIN_LOSS_DB,
    MAX_TX_POWER_DBM,
    MIN_TX_POWER_DBM,
    InterferenceSource,
)
from ..pke.mobility import MobilityTrace
from ..pke.model import PkeConfig
from .model import (
    AfhSettings,
    ChannelSettings,
    ExplicitEntry,
    LinkSpec,
    LossRule,
    NodeSpec,
    PiconetSpec,
    PkeKeySpec,
    PkeSettings,
    RunSettings,
    Scenario,
    ScheduleSettings,
    SensorConfig,
    ms_to_us,
)

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / "templates"
TEMPLATE_PREFIX = "template:"

Lines = Dict[str, int]


def list_templates(extra_dir: Optional[str] = None) -> Dict[str, Path]:
    """Template name -> file; templates in ``extra_dir`` shadow shipped ones."""
    found: Dict[str, Path] = {}
    for directory in (TEMPLATE_DIR, Path(extra_dir) if extra_dir else None):
        if directory is None or not directory.is_dir():
            continue
        for path in sorted(directory.glob("*.yaml")):
            found[path.stem] = path
    return dict(sorted(found.items()))


def resolve_reference(reference: str, extra_dir: Optional[str] = None) -> Path:
    """A file path, ``template:NAME`` or a bare template name."""
    templates = list_templates(extra_dir)
    if reference.startswith(TEMPLATE_PREFIX):
        name = reference[len(TEMPLATE_PREFIX):]
        if name not in templates:
            raise ScenarioError(f"unknown template {name!r}; available: {', '.join(templates)}")
        return templates[name]
    path = Path(reference)
    if path.exists():
        return path
    if reference in templates:
        return templates[reference]
    raise ScenarioError(f"scenario file not found: {reference}")


def _line_index(node: yaml.Node, path: str, lines: Lines) -> None:
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            child = f"{path}.{key_node.value}" if path else str(key_node.value)
            lines[child] = key_node.start_mark.line + 1
            _line_index(value_node, child, lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            child = f"{path}.{i}" if path else str(i)
            lines[child] = item.start_mark.line + 1
            _line_index(item, child, lines)


def parse_document(text: str, source: str) -> Tuple[Dict[str, Any], Lines]:
    """Parse YAML text; returns the data and a dotted-path -> line map."""
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ScenarioError(f"parse error: {problem}", line=line, source=source) from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping at top level", source=source)
    lines: Lines = {}
    if root is not None:
        _line_index(root, "", lines)
    return data, lines


def parse_override_value(text: str) -> Any:
    """Values given on the command line are read as YAML scalars."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def apply_override(data: Dict[str, Any], dotted_key: str, value: Any) -> Dict[str, Any]:
    """
    Set ``dotted_key`` (``a.b.0.c``) in a copy of ``data``.

    Raises:
        ScenarioError: a path segment does not exist
    """
    result = copy.deepcopy(data)
    parts = dotted_key.split(".")
    target: Any = result
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        walked = ".".join(parts[: i + 1])
        if isinstance(target, list):
            try:
                index = int(part)
                target[index]
            except (ValueError, IndexError):
                raise ScenarioError("no such list element", key=walked) from None
            if last:
                target[index] = value
            else:
                target = target[index]
        elif isinstance(target, dict):
            if last:
                target[part] = value
            elif part not in target:
                if i == 0 and part in _TOP_LEVEL:
                    target[part] = {}
                else:
                    raise ScenarioError("unknown key", key=walked)
                target = target[part]
            else:
                target = target[part]
        else:
            raise ScenarioError("cannot descend into a scalar", key=walked)
    return result


class _Section:
    """A mapping inside the document, with its dotted path for diagnostics."""

    def __init__(self, data: Any, path: str, lines: Lines, source: str) -> None:
        self.path = path
        self.lines = lines
        self.source = source
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise self.error("must be a mapping")
        self.data = data

    def full(self, key: Optional[str]) -> str:
        if key is None:
            return self.path
        return f"{self.path}.{key}" if self.path else key

    def error(self, message: str, key: Optional[str] = None) -> ScenarioError:
        full = self.full(key)
        line = self.lines.get(full, self.lines.get(self.path))
        return ScenarioError(message, key=full or None, line=line, source=self.source)

    def check_keys(self, allowed: Sequence[str]) -> None:
        for key in self.data:
            if key not in allowed:
                raise self.error(f"unknown field (allowed: {', '.join(allowed)})", str(key))

    def has(self, key: str) -> bool:
        return self.data.get(key) is not None

    def get(self, key: str, default: Any = None, kind: Any = None) -> Any:
        value = self.data.get(key)
        if value is None:
            return default
        if kind is None:
            return value
        if kind is bool:
            if not isinstance(value, bool):
                raise self.error("expected true or false", key)
            return value
        if kind in (int, float) and isinstance(value, bool):
            raise self.error(f"expected {kind.__name__}", key)
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise self.error("expected an integer", key)
        try:
            return kind(value)
        except (TypeError, ValueError):
            raise self.error(f"expected {kind.__name__}, got {value!r}", key) from None

    def require(self, key: str, kind: Any = None) -> Any:
        if not self.has(key):
            raise self.error("required field missing", key)
        return self.get(key, kind=kind)

    def section(self, key: str) -> "_Section":
        return _Section(self.data.get(key), self.full(key), self.lines, self.source)

    def sections(self, key: str) -> List["_Section"]:
        value = self.data.get(key)
        if value is None:
            return []
        if not isinstance(value, list):
            raise self.error("expected a list", key)
        return [
            _Section(item, f"{self.full(key)}.{i}", self.lines, self.source) for i, item in enumerate(value)
        ]

    def raw_list(self, key: str) -> List[Any]:
        value = self.data.get(key)
        if value is None:
            return []
        if not isinstance(value, list):
            raise self.error("expected a list", key)
        return value

    @contextmanager
    def guard(self, key: Optional[str] = None) -> Iterator[None]:
        """Turn validation errors raised by domain types into located errors."""
        try:
            yield
        except ScenarioError:
            raise
        except ConfigurationError as e:
            raise self.error(str(e), key) from None


_TOP_LEVEL = (
    "name",
    "run",
    "channel",
    "loss_rule",
    "nodes",
    "links",
    "piconets",
    "schedule",
    "afh",
    "interferers",
    "energy",
    "pke",
)


def _pass_code(value: Any) -> Optional[bytes]:
    if value is None:
        return None
    return str(value).encode("utf-8")


def _run(sec: _Section) -> RunSettings:
    sec.check_keys(("duration_s", "seed", "trace"))
    run = RunSettings(
        duration_s=sec.get("duration_s", 10.0, float),
        seed=sec.get("seed", 1, int),
        trace=sec.get("trace", False, bool),
    )
    if run.duration_s <= 0:
        raise sec.error("must be > 0", "duration_s")
    if not 0 <= run.seed < 2**64:
        raise sec.error("must be a 64-bit unsigned integer", "seed")
    return run


def _channel(sec: _Section) -> ChannelSettings:
    sec.check_keys(
        (
            "noise_floor_dbm",
            "sensitivity_dbm",
            "ber",
            "shadowing_correlation",
            "packet_error_rate",
            "coherence_profile",
        )
    )
    correlation = sec.get("shadowing_correlation", "independent", str)
    if correlation not in ("independent", "correlated"):
        raise sec.error("expected independent or correlated", "shadowing_correlation")
    profile = sec.get("coherence_profile", "highway", str)
    if profile not in COHERENCE_PROFILES:
        raise sec.error(f"expected one of {', '.join(COHERENCE_PROFILES)}", "coherence_profile")
    per = sec.get("packet_error_rate", 0.0, float)
    if not 0.0 <= per <= 1.0:
        raise sec.error("must lie in [0, 1]", "packet_error_rate")
    ber = sec.get("ber", "noncoherent-fsk")
    with sec.guard("ber"):
        ber_from_config(ber)
    return ChannelSettings(
        noise_floor_dbm=sec.get("noise_floor_dbm", -100.0, float),
        sensitivity_dbm=sec.get("sensitivity_dbm", -90.0, float),
        ber=ber,
        correlated_shadowing=correlation == "correlated",
        packet_error_rate=per,
        coherence_profile=profile,
    )


def _loss_rule(sec: _Section) -> LossRule:
    sec.check_keys(("same_compartment_db", "cross_compartment_db", "shadowing_sigma_db", "coherence_time_s"))
    rule = LossRule(
        same_compartment_db=sec.get("same_compartment_db", 40.0, float),
        cross_compartment_db=sec.get("cross_compartment_db", CROSS_COMPARTMENT_MIN_LOSS_DB, float),
        shadowing_sigma_db=sec.get("shadowing_sigma_db", 0.0, float),
        coherence_time_s=sec.get("coherence_time_s", None, float),
    )
    if rule.same_compartment_db < 0:
        raise sec.error("must be >= 0", "same_compartment_db")
    if rule.cross_compartment_db < CROSS_COMPARTMENT_MIN_LOSS_DB:
        raise sec.error(f"must be >= {CROSS_COMPARTMENT_MIN_LOSS_DB} dB", "cross_compartment_db")
    if rule.shadowing_sigma_db < 0:
        raise sec.error("must be >= 0", "shadowing_sigma_db")
    return rule


def _node(sec: _Section) -> NodeSpec:
    sec.check_keys(("id", "role", "compartment", "tx_power_dbm", "distance_m"))
    roles = sec.require("role")
    roles = tuple(roles) if isinstance(roles, list) else (roles,)
    valid = {r.value for r in GapRole}
    for role in roles:
        if role not in valid:
            raise sec.error(f"unknown role {role!r} (allowed: {', '.join(sorted(valid))})", "role")
    if "central" in roles and "peripheral" in roles:
        raise sec.error("a node cannot be both central and peripheral", "role")
    tx = sec.get("tx_power_dbm", 0.0, float)
    if not MIN_TX_POWER_DBM <= tx <= MAX_TX_POWER_DBM:
        raise sec.error(f"{tx} dBm outside [{MIN_TX_POWER_DBM}, {MAX_TX_POWER_DBM}]", "tx_power_dbm")
    distance = sec.get("distance_m", None, float)
    if distance is not None and distance < 0:
        raise sec.error("must be >= 0", "distance_m")
    return NodeSpec(
        node_id=sec.require("id", str),
        roles=tuple(str(r) for r in roles),
        compartment=sec.get("compartment", "cabin", str),
        tx_power_dbm=tx,
        distance_m=distance,
    )


def _link(sec: _Section) -> LinkSpec:
    sec.check_keys(("a", "b", "path_loss_db", "shadowing_sigma_db", "coherence_time_s", "relation"))
    relation = sec.get("relation", "same", str)
    if relation not in ("same", "cross"):
        raise sec.error("expected same or cross", "relation")
    loss = sec.require("path_loss_db", float)
    if loss < 0:
        raise sec.error("must be >= 0", "path_loss_db")
    if relation == "cross" and loss < CROSS_COMPARTMENT_MIN_LOSS_DB:
        raise sec.error(
            f"cross-compartment loss must be >= {CROSS_COMPARTMENT_MIN_LOSS_DB} dB", "path_loss_db"
        )
    return LinkSpec(
        a=sec.require("a", str),
        b=sec.require("b", str),
        path_loss_db=loss,
        shadowing_sigma_db=sec.get("shadowing_sigma_db", None, float),
        coherence_time_s=sec.get("coherence_time_s", None, float),
        relation=relation,
    )


def _sensor(sec: _Section, master: str) -> SensorConfig:
    sec.check_keys(
        (
            "id",
            "node",
            "read_period_ms",
            "read_phase_ms",
            "payload_bytes",
            "packet_bytes",
            "priority",
            "deadline_ms",
            "destination",
        )
    )
    sensor_id = sec.require("id", str)
    destination = sec.get("destination", master, str)
    if destination != master:
        raise sec.error(
            f"sensor data must go to the piconet master {master}; slaves never talk to each other",
            "destination",
        )
    payload = sec.get("payload_bytes", 10, int)
    if not 0 <= payload <= MAX_DATA_PAYLOAD:
        raise sec.error(f"must lie in 0..{MAX_DATA_PAYLOAD}", "payload_bytes")
    packet_bytes = sec.get("packet_bytes", None, int)
    low, high = DATA_OVERHEAD_BYTES + payload, DATA_LENGTH_BOUNDS[1]
    if packet_bytes is not None and not low <= packet_bytes <= high:
        raise sec.error(f"must lie in {low}..{high} for a {payload}-byte payload", "packet_bytes")
    config = SensorConfig(
        sensor_id=sensor_id,
        node=sec.get("node", sensor_id, str),
        read_period_ms=sec.require("read_period_ms", float),
        read_phase_ms=sec.get("read_phase_ms", 0.0, float),
        payload_bytes=payload,
        priority=sec.get("priority", 0, int),
        deadline_ms=sec.get("deadline_ms", None, float),
        destination=destination,
        packet_bytes=packet_bytes,
    )
    with sec.guard():
        config.to_spec(master)
    return config


def _piconet(sec: _Section) -> PiconetSpec:
    sec.check_keys(("master", "capacity", "supervision_events", "sensors"))
    master = sec.require("master", str)
    capacity = sec.get("capacity", 8, int)
    if capacity < 1:
        raise sec.error("must be >= 1", "capacity")
    supervision = sec.get("supervision_events", 6, int)
    if supervision < 1:
        raise sec.error("must be >= 1", "supervision_events")
    sensors = tuple(_sensor(s, master) for s in sec.sections("sensors"))
    if len(sensors) > capacity:
        raise sec.error(f"{len(sensors)} sensors exceed capacity {capacity}", "sensors")
    return PiconetSpec(master, capacity, sensors, supervision)


def _schedule(sec: _Section) -> ScheduleSettings:
    sec.check_keys(("align", "event_airtime_us", "hop_increment_base", "range_groups", "explicit"))
    groups = None
    if sec.has("range_groups"):
        groups = tuple(tuple(str(m) for m in g) for g in sec.raw_list("range_groups"))
    explicit = []
    for e in sec.sections("explicit"):
        e.check_keys(("sensor", "anchor_offset_ms", "hop_increment", "start_channel"))
        explicit.append(
            ExplicitEntry(
                sensor=e.require("sensor", str),
                anchor_offset_ms=e.require("anchor_offset_ms", float),
                hop_increment=e.require("hop_increment", int),
                start_channel=e.get("start_channel", 0, int),
            )
        )
    airtime = sec.get("event_airtime_us", None, int)
    if airtime is not None and airtime <= 0:
        raise sec.error("must be > 0", "event_airtime_us")
    base = sec.get("hop_increment_base", 5, int)
    if not 5 <= base <= 16:
        raise sec.error("must lie in 5..16", "hop_increment_base")
    return ScheduleSettings(
        align=sec.get("align", True, bool),
        event_airtime_us=airtime,
        hop_increment_base=base,
        range_groups=groups,
        explicit=tuple(explicit),
    )


def _afh(sec: _Section) -> AfhSettings:
    sec.check_keys(("window", "threshold", "auto"))
    afh = AfhSettings(
        window=sec.get("window", None, int),
        threshold=sec.get("threshold", 0.5, float),
        auto=sec.get("auto", False, bool),
    )
    if afh.window is not None and afh.window <= 0:
        raise sec.error("must be > 0 events", "window")
    if not 0.0 <= afh.threshold <= 1.0:
        raise sec.error("must lie in [0, 1]", "threshold")
    if afh.auto and afh.window is None:
        raise sec.error("automatic AFH needs a window", "auto")
    return afh


def _interferer(sec: _Section) -> InterferenceSource:
    sec.check_keys(
        (
            "center_mhz",
            "bandwidth_mhz",
            "tx_power_dbm",
            "path_loss_db",
            "period_ms",
            "on_fraction",
            "phase_ms",
        )
    )
    with sec.guard():
        return InterferenceSource(
            center_mhz=sec.require("center_mhz", float),
            bandwidth_mhz=sec.require("bandwidth_mhz", float),
            tx_power_dbm=sec.get("tx_power_dbm", 20.0, float),
            path_loss_db=sec.get("path_loss_db", 40.0, float),
            period_us=ms_to_us(sec.get("period_ms", 0.0, float)),
            on_fraction=sec.get("on_fraction", 1.0, float),
            phase_us=ms_to_us(sec.get("phase_ms", 0.0, float)),
        )


def _energy(sec: _Section) -> EnergyParams:
    sec.check_keys(("event_current_ma", "event_duration_ms", "sleep_current_ua", "battery_capacity_mah"))
    defaults = EnergyParams()
    with sec.guard():
        return EnergyParams(
            event_current_ma=sec.get("event_current_ma", defaults.event_current_ma, float),
            event_duration_ms=sec.get("event_duration_ms", defaults.event_duration_ms, float),
            sleep_current_ua=sec.get("sleep_current_ua", defaults.sleep_current_ua, float),
            battery_capacity_mah=sec.get("battery_capacity_mah", defaults.battery_capacity_mah, float),
        )


def _trace(sec: _Section, base_dir: Path) -> MobilityTrace:
    sec.check_keys(("key", "waypoints", "actions", "csv"))
    key = sec.require("key", str)
    with sec.guard():
        if sec.has("csv"):
            path = Path(sec.get("csv", kind=str))
            if not path.is_absolute():
                path = base_dir / path
            return MobilityTrace.from_csv(key, path)
        return MobilityTrace.from_seconds(
            key,
            [tuple(p) for p in sec.raw_list("waypoints")],
            [tuple(a) for a in sec.raw_list("actions")],
        )


def _pke(sec: _Section, base_dir: Path) -> PkeSettings:
    sec.check_keys(
        (
            "central",
            "rssi_threshold_dbm",
            "lock_timeout_s",
            "rssi_window",
            "hysteresis_db",
            "connection_interval_ms",
            "supervision_events",
            "advertising_interval_ms",
            "excess_loss_db",
            "nominal_range_m",
            "keys",
            "traces",
        )
    )
    defaults = PkeConfig()
    with sec.guard():
        config = PkeConfig(
            rssi_threshold_dbm=sec.get("rssi_threshold_dbm", defaults.rssi_threshold_dbm, float),
            lock_timeout_s=sec.get("lock_timeout_s", defaults.lock_timeout_s, float),
            rssi_window=sec.get("rssi_window", defaults.rssi_window, int),
            connection_interval_ms=sec.get("connection_interval_ms", defaults.connection_interval_ms, float),
            nominal_range_m=sec.get("nominal_range_m", defaults.nominal_range_m, float),
            hysteresis_db=sec.get("hysteresis_db", defaults.hysteresis_db, float),
            supervision_events=sec.get("supervision_events", defaults.supervision_events, int),
            advertising_interval_ms=sec.get(
                "advertising_interval_ms", defaults.advertising_interval_ms, float
            ),
            excess_loss_db=sec.get("excess_loss_db", defaults.excess_loss_db, float),
        )
    keys = []
    for k in sec.sections("keys"):
        k.check_keys(("id", "address", "pass_code", "advertised_pass_code", "valid"))
        pass_code = _pass_code(k.get("pass_code")) or b""
        address = None
        if k.has("address"):
            try:
                address = bytes.fromhex(k.get("address", kind=str).replace(":", ""))
            except ValueError:
                raise k.error("expected hex digits", "address") from None
            if len(address) != 4:
                raise k.error("a device address is 4 bytes", "address")
        keys.append(
            PkeKeySpec(
                node=k.require("id", str),
                address=address,
                pass_code=pass_code,
                device_pass_code=_pass_code(k.get("advertised_pass_code")),
                valid=k.get("valid", True, bool),
            )
        )
    traces = tuple(_trace(t, base_dir) for t in sec.sections("traces"))
    return PkeSettings(sec.require("central", str), config, tuple(keys), traces)


def _check_references(scenario: Scenario, root: _Section) -> None:
    ids = [n.node_id for n in scenario.nodes]
    seen = set()
    for i, node_id in enumerate(ids):
        if node_id in seen:
            raise root.error(f"duplicate node id {node_id}", f"nodes.{i}.id")
        seen.add(node_id)
    roles = {n.node_id: set(n.roles) for n in scenario.nodes}

    def need(node_id: str, key: str, role: Optional[str] = None) -> None:
        if node_id not in roles:
            raise root.error(f"undefined node {node_id!r}", key)
        if role is not None and role not in roles[node_id]:
            raise root.error(f"node {node_id!r} must have role {role}", key)

    for i, link in enumerate(scenario.links):
        need(link.a, f"links.{i}.a")
        need(link.b, f"links.{i}.b")
    sensor_nodes: Dict[str, str] = {}
    sensor_ids = set()
    for i, piconet in enumerate(scenario.piconets):
        need(piconet.master, f"piconets.{i}.master", "central")
        for j, sensor in enumerate(piconet.sensors):
            key = f"piconets.{i}.sensors.{j}"
            need(sensor.node, f"{key}.node" if sensor.node != sensor.sensor_id else f"{key}.id", "peripheral")
            if sensor.sensor_id in sensor_ids:
                raise root.error(f"duplicate sensor id {sensor.sensor_id}", f"{key}.id")
            if sensor.node in sensor_nodes:
                raise root.error(
                    f"node {sensor.node} already serves sensor {sensor_nodes[sensor.node]}", f"{key}.node"
                )
            sensor_ids.add(sensor.sensor_id)
            sensor_nodes[sensor.node] = sensor.sensor_id
    if scenario.schedule.range_groups:
        masters = {p.master for p in scenario.piconets}
        for i, group in enumerate(scenario.schedule.range_groups):
            for master in group:
                if master not in masters:
                    raise root.error(f"{master!r} is not a piconet master", f"schedule.range_groups.{i}")
    for i, entry in enumerate(scenario.schedule.explicit):
        if entry.sensor not in sensor_ids:
            raise root.error(f"undefined sensor {entry.sensor!r}", f"schedule.explicit.{i}.sensor")
    if scenario.schedule.explicit and {e.sensor for e in scenario.schedule.explicit} != sensor_ids:
        raise root.error("an explicit schedule must list every sensor", "schedule.explicit")
    if scenario.pke is not None:
        need(scenario.pke.central, "pke.central", "central")
        key_nodes = set()
        for i, key in enumerate(scenario.pke.keys):
            need(key.node, f"pke.keys.{i}.id", "peripheral")
            if key.node in sensor_nodes:
                raise root.error(f"{key.node} is already a sensor node", f"pke.keys.{i}.id")
            key_nodes.add(key.node)
        for i, trace in enumerate(scenario.pke.traces):
            if trace.key_id not in key_nodes:
                raise root.error(f"trace for undefined key {trace.key_id!r}", f"pke.traces.{i}.key")


def build_scenario(
    data: Dict[str, Any], lines: Lines, source: str, base_dir: Optional[Path] = None
) -> Scenario:
    """Validate a parsed document."""
    root = _Section(data, "", lines, source)
    root.check_keys(_TOP_LEVEL)
    base_dir = base_dir or Path.cwd()
    scenario = Scenario(
        name=root.get("name", Path(source).stem, str),
        run=_run(root.section("run")),
        channel=_channel(root.section("channel")),
        loss_rule=_loss_rule(root.section("loss_rule")),
        nodes=tuple(_node(s) for s in root.sections("nodes")),
        links=tuple(_link(s) for s in root.sections("links")),
        piconets=tuple(_piconet(s) for s in root.sections("piconets")),
        schedule=_schedule(root.section("schedule")),
        afh=_afh(root.section("afh")),
        interferers=tuple(_interferer(s) for s in root.sections("interferers")),
        energy=_energy(root.section("energy")),
        pke=_pke(root.section("pke"), base_dir) if root.has("pke") else None,
        source=source,
        raw=copy.deepcopy(data),
    )
    if not scenario.piconets and scenario.pke is None:
        raise root.error("no piconets and no pke section: nothing to simulate", "piconets")
    _check_references(scenario, root)
    return scenario


def load_scenario(
    reference: str,
    overrides: Optional[Dict[str, Any]] = None,
    templates_dir: Optional[str] = None,
) -> Scenario:
    """
    Load and validate a scenario.

    Args:
        reference: File path, ``template:NAME`` or template name
        overrides: Dotted key -> value, applied before validation
        templates_dir: Extra template directory

    Raises:
        ScenarioError: parse error, unknown field or invalid value
    """
    path = resolve_reference(reference, templates_dir)
    source = str(path) if not path.is_relative_to(TEMPLATE_DIR) else f"template:{path.stem}"
    text = path.read_text(encoding="utf-8")
    data, lines = parse_document(text, source)
    for key, value in (overrides or {}).items():
        data = apply_override(data, key, value)
    scenario = build_scenario(data, lines, source, path.parent)
    logger.info(f"scenario {scenario.name} loaded from {source}")
    return scenario
