"""
Scenario execution: builds the radio model, devices, schedule and
applications of one scenario, runs the event loop and writes artifacts.
Seed sweeps fan runs out over a process pool.
"""
import csv
import itertools
import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .errors import InvariantViolation
from .link.connection import Connection, ConnectionParams, QueuedPayload
from .link.controller import LinkLayer
from .link.device import Device
from .link.trace import PacketTrace
from .metrics.collector import MetricsCollector
from .metrics.report import RunReport, finalize_run, format_summary, write_energy_csv, write_metrics_csv
from .phy.ber import ber_from_config
from .phy.channel import ChannelModel, Compartment, RadioLink, friis_path_loss_db
from .pke.app import PkeApplication
from .pke.model import KeyRecord
from .scenario.loader import load_scenario, parse_override_value
from .scenario.model import NodeSpec, Scenario, ms_to_us
from .scheduler.model import Schedule, SensorSpec
from .scheduler.planner import build_schedule, schedule_from_explicit
from .scheduler.verify import aggregate_throughput, hyperperiod, verify_collision_free
from .sim.engine import US_PER_MS, EventKind, Simulator
from .sim.rng import TRAFFIC, RngStreams

logger = logging.getLogger(__name__)

HEADLINE_COLUMNS = [
    "delivery_ratio",
    "packet_success_ratio",
    "deliveries",
    "retransmissions",
    "mean_delay_us",
    "max_delay_us",
    "goodput_bps",
    "average_current_ma",
    "life_hours",
    "pulls",
    "unlocks",
    "denials",
    "max_decision_latency_us",
    "lock_events",
]
SWEEP_COLUMNS = ["param", "value", "seed"] + HEADLINE_COLUMNS


def plan_schedule(scenario: Scenario) -> Optional[Schedule]:
    """
    Schedule of every sensor in the scenario, or None without sensors.

    An explicit schedule section is checked as written; otherwise the
    greedy planner places the sensors.
    """
    sensors = scenario.sensor_specs()
    if not sensors:
        return None
    settings = scenario.schedule
    if settings.explicit:
        slots = {
            e.sensor: (ms_to_us(e.anchor_offset_ms), e.hop_increment, e.start_channel)
            for e in settings.explicit
        }
        return schedule_from_explicit(sensors, slots, settings.event_airtime_us, settings.range_groups)
    return build_schedule(
        sensors,
        event_airtime=settings.event_airtime_us,
        align=settings.align,
        range_groups=settings.range_groups,
        hop_increment_base=settings.hop_increment_base,
    )


def _default_loss(scenario: Scenario, a: NodeSpec, b: NodeSpec) -> Tuple[float, Compartment]:
    rule = scenario.loss_rule
    if a.compartment != b.compartment:
        return rule.cross_compartment_db, Compartment.CROSS
    for near, far in ((a, b), (b, a)):
        if "central" in near.roles and far.distance_m is not None:
            return friis_path_loss_db(far.distance_m), Compartment.SAME
    return rule.same_compartment_db, Compartment.SAME


def build_channel_model(scenario: Scenario, rng_streams: RngStreams) -> ChannelModel:
    """Explicit links first; every other node pair gets the loss rule."""
    settings = scenario.channel
    rule = scenario.loss_rule
    default_coherence = rule.coherence_time_s or settings.coherence_time_s
    model = ChannelModel(
        rng_streams,
        noise_floor_dbm=settings.noise_floor_dbm,
        sensitivity_dbm=settings.sensitivity_dbm,
        ber_curve=ber_from_config(settings.ber),
        correlated_shadowing=settings.correlated_shadowing,
        packet_error_rate=settings.packet_error_rate,
        interferers=scenario.interferers,
    )
    for spec in scenario.links:
        model.add_link(
            RadioLink(
                spec.a,
                spec.b,
                spec.path_loss_db,
                spec.shadowing_sigma_db if spec.shadowing_sigma_db is not None else rule.shadowing_sigma_db,
                spec.coherence_time_s or default_coherence,
                Compartment(spec.relation),
            )
        )
    for a, b in itertools.combinations(scenario.nodes, 2):
        if model.has_link(a.node_id, b.node_id):
            continue
        loss, relation = _default_loss(scenario, a, b)
        model.add_link(
            RadioLink(a.node_id, b.node_id, loss, rule.shadowing_sigma_db, default_coherence, relation)
        )
    return model


@dataclass
class RunResult:
    scenario: Scenario
    report: RunReport
    schedule: Optional[Schedule]
    trace: PacketTrace
    pke: Dict[str, float] = field(default_factory=dict)
    artifacts: Dict[str, Path] = field(default_factory=dict)

    @property
    def summary(self) -> str:
        return format_summary(self.report, self.scenario.name, self.scenario.run.seed)

    def headline(self) -> Dict[str, Union[int, float, str]]:
        """One sweep row's worth of figures."""
        report = self.report
        sensors = list(report.sensors.values())
        delivered = sum(s.delivered for s in sensors)
        row: Dict[str, Union[int, float, str]] = {
            "delivery_ratio": report.delivery_ratio,
            "packet_success_ratio": report.packet_success_ratio,
            "deliveries": delivered,
            "retransmissions": report.retransmissions,
            "mean_delay_us": (
                sum(s.mean_delay_us * s.delivered for s in sensors) / delivered if delivered else ""
            ),
            "max_delay_us": max((s.max_delay_us for s in sensors), default=""),
            "goodput_bps": sum(report.goodput_bps.values()),
            "average_current_ma": "",
            "life_hours": "",
        }
        if report.energy_model:
            n = len(report.energy_model)
            row["average_current_ma"] = sum(m.average_current_ma for m in report.energy_model) / n
            row["life_hours"] = sum(m.life_hours for m in report.energy_model) / n
        for key in HEADLINE_COLUMNS[9:]:
            row[key] = self.pke.get(key, "")
        return row


class SimulationRun:
    """
    One isolated run of a scenario.

    Args:
        scenario: Validated scenario; its ``run`` section fixes seed and duration
    """

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.rng_streams = RngStreams(scenario.run.seed)
        self.sim = Simulator()
        self.trace = PacketTrace(enabled=scenario.run.trace)
        self.channel_model = build_channel_model(scenario, self.rng_streams)
        self.link_layer = LinkLayer(self.sim, self.channel_model, self.rng_streams, self.trace)
        distances = {n.node_id: n.distance_m for n in scenario.nodes if n.distance_m is not None}
        self.collector = MetricsCollector(self.link_layer, distances)
        self.schedule: Optional[Schedule] = None
        self.pke_app: Optional[PkeApplication] = None
        self.connections: Dict[str, Connection] = {}
        self._scheduled_bps = 0.0

    def _add_devices(self) -> None:
        key_specs = {k.node: k for k in self.scenario.pke.keys} if self.scenario.pke else {}
        for node in self.scenario.nodes:
            kwargs: Dict[str, Any] = {"tx_power_dbm": node.tx_power_dbm}
            key = key_specs.get(node.node_id)
            if key is not None:
                kwargs["address"] = key.address or b""
                code = key.device_pass_code if key.device_pass_code is not None else key.pass_code
                kwargs["pass_code"] = code or None
            self.link_layer.add_device(Device.with_roles(node.node_id, node.roles, **kwargs))

    def _plan(self) -> None:
        self.schedule = plan_schedule(self.scenario)
        if self.schedule is None:
            return
        self.schedule.require_feasible()
        throughput = aggregate_throughput(self.schedule)
        horizon, capped = hyperperiod(e.interval_us for e in self.schedule.entries)
        collisions = verify_collision_free(self.schedule, horizon)
        if collisions:
            first = collisions[0]
            raise InvariantViolation(
                "tdma-collision-free",
                f"{first.first} and {first.second} collide on channel {first.channel} at {first.time_us} us",
            )
        logger.info(
            f"schedule verified to {horizon} us{' (capped)' if capped else ''}: "
            f"{float(throughput.bits_per_second):.1f} bps scheduled"
        )
        self._scheduled_bps = float(throughput.bits_per_second)

    def _start_sensor(self, spec: SensorSpec, node: str) -> None:
        rng = self.rng_streams.stream(f"{TRAFFIC}:{spec.sensor_id}")
        sequence = itertools.count()
        link = f"{spec.master}-{node}"

        def read() -> None:
            payload = QueuedPayload(
                data=rng.bytes(spec.payload_bytes),
                source=spec.sensor_id,
                enqueued_us=self.sim.now,
                priority=spec.priority,
                sequence=next(sequence),
                packet_bytes=spec.total_bytes,
            )
            self.collector.on_reading(spec.sensor_id, link, payload)
            conn = self.connections.get(spec.sensor_id)
            if conn is not None and conn.open:
                self.link_layer.enqueue(conn, node, payload)
            self.sim.schedule_in(spec.read_period_us, EventKind.SENSOR_READ, read, spec.sensor_id)

        self.sim.schedule(spec.read_phase_us, EventKind.SENSOR_READ, read, spec.sensor_id)

    def _connect_sensors(self) -> None:
        if self.schedule is None:
            return
        afh = self.scenario.afh
        nodes = self.scenario.sensor_nodes()
        specs = {s.sensor_id: s for s in self.scenario.sensor_specs()}
        piconets = {p.master: p for p in self.scenario.piconets}
        # readings at an anchor's instant are queued before the anchor fires
        for entry in self.schedule.entries:
            self._start_sensor(specs[entry.sensor_id], nodes[entry.sensor_id])
        for entry in self.schedule.entries:
            piconet = piconets[entry.master]
            params = ConnectionParams(
                interval_us=entry.interval_us,
                hop_increment=entry.hop_increment,
                channel_map=entry.channel_map,
                first_channel=entry.start_channel,
                supervision_events=piconet.supervision_events,
                afh_window=afh.window,
                afh_threshold=afh.threshold,
                afh_auto=afh.auto,
            )
            self.connections[entry.sensor_id] = self.link_layer.establish(
                entry.master, nodes[entry.sensor_id], params, entry.anchor_offset_us, piconet.capacity
            )

    def _start_pke(self) -> None:
        pke = self.scenario.pke
        if pke is None:
            return
        keys = [
            KeyRecord(k.node, self.link_layer.device(k.node).address, k.pass_code)
            for k in pke.keys
            if k.valid
        ]
        self.pke_app = PkeApplication(
            self.link_layer, pke.central, pke.config, keys, [k.node for k in pke.keys], pke.traces
        )
        self.pke_app.start()

    def run(self) -> RunResult:
        """
        Raises:
            ScheduleInfeasible: the sensors cannot all be placed
            CapacityExceeded: the schedule exceeds the 37-channel bound
            InvariantViolation: a runtime invariant broke during the run
        """
        scenario = self.scenario
        self._add_devices()
        self._plan()
        self._connect_sensors()
        self._start_pke()
        duration = scenario.run.duration_us
        dispatched = self.sim.run_until(duration)
        logger.info(
            f"run of {scenario.name} finished: {dispatched} events in {duration} us "
            f"(seed {scenario.run.seed})"
        )

        slaves = list(scenario.sensor_nodes().values())
        if scenario.pke is not None:
            slaves += [k.node for k in scenario.pke.keys]
        intervals = {}
        if self.schedule is not None:
            nodes = scenario.sensor_nodes()
            intervals = {nodes[e.sensor_id]: e.interval_us / US_PER_MS for e in self.schedule.entries}
        report = finalize_run(self.collector.log(), duration, scenario.energy, sorted(slaves), intervals)
        pke: Dict[str, float] = {}
        if self.schedule is not None:
            report.extra["scheduled_bps"] = self._scheduled_bps
            report.extra["schedule_utilization"] = self.schedule.utilization
        if self.pke_app is not None:
            pke = self.pke_app.headline()
            report.extra.update({f"pke_{k}": v for k, v in pke.items()})
        return RunResult(scenario, report, self.schedule, self.trace, pke)


def run_scenario(scenario: Scenario, out_dir: Optional[Union[str, Path]] = None) -> RunResult:
    """Run once; writes artifacts when ``out_dir`` is given."""
    result = SimulationRun(scenario).run()
    if out_dir is not None:
        write_artifacts(result, out_dir)
    return result


def write_artifacts(result: RunResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = {
        "metrics": write_metrics_csv(result.report, out / "metrics.csv"),
        "energy": write_energy_csv(result.report, out / "energy.csv"),
    }
    if result.schedule is not None:
        artifacts["schedule"] = result.schedule.write_csv(out / "schedule.csv")
    if result.trace.enabled:
        artifacts["trace"] = result.trace.write_csv(out / "trace.csv")
    summary = out / "summary.txt"
    summary.write_text(result.summary, encoding="utf-8")
    artifacts["summary"] = summary
    result.artifacts = artifacts
    logger.info(f"artifacts written to {out}: {', '.join(sorted(artifacts))}")
    return artifacts


def _sweep_job(job: Tuple[int, str, int, Scenario]) -> Tuple[int, int, Dict[str, Union[int, float, str]]]:
    index, value, seed, scenario = job
    result = SimulationRun(scenario.with_run(seed=seed)).run()
    row: Dict[str, Union[int, float, str]] = {"value": value, "seed": seed}
    row.update(result.headline())
    return index, seed, row


def sweep(
    reference: str,
    param: str,
    values: Sequence[str],
    seeds: int = 1,
    workers: int = 1,
    templates_dir: Optional[str] = None,
    duration_s: Optional[float] = None,
) -> List[Dict[str, Union[int, float, str]]]:
    """
    Cartesian runs over ``values`` of ``param`` and ``seeds`` consecutive seeds.

    Every scenario variant is loaded and validated before any run starts,
    so an unknown key fails fast.

    Returns:
        Rows sorted by (value order, seed)
    """
    if seeds < 1:
        raise ValueError("seeds must be >= 1")
    jobs = []
    for index, text in enumerate(values):
        scenario = load_scenario(reference, {param: parse_override_value(text)}, templates_dir)
        if duration_s is not None:
            scenario = scenario.with_run(duration_s=duration_s)
        base = scenario.run.seed
        jobs += [(index, text, base + i, scenario) for i in range(seeds)]
    logger.info(f"sweep of {param}: {len(values)} values x {seeds} seeds on {workers} workers")
    if workers > 1 and len(jobs) > 1:
        with Pool(workers) as pool:
            results = pool.map(_sweep_job, jobs)
    else:
        results = [_sweep_job(job) for job in jobs]
    rows = []
    for _, _, row in sorted(results, key=lambda r: (r[0], r[1])):
        row["param"] = param
        rows.append(row)
    return rows


def _fmt(value: Union[int, float, str]) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_sweep_csv(rows: Sequence[Dict[str, Union[int, float, str]]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in SWEEP_COLUMNS})
    return path
