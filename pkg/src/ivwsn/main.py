"""
Command-line entry point.

    ivwsn run <scenario> [--seed N] [--until SECONDS] [--out DIR] [--trace]
    ivwsn sweep <scenario> --param KEY --values LIST [--seeds N] [--workers N]
    ivwsn schedule <scenario> [--out DIR]
    ivwsn templates

A scenario is a YAML file path, ``template:NAME`` or a bare template name.
Exit status: 0 success, 1 bad input or unexpected error, 2 infeasible
schedule, 3 runtime invariant violation.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .config import Config, get_config
from .errors import CapacityExceeded, ConfigurationError, InvariantViolation, ScheduleInfeasible
from .runner import plan_schedule, run_scenario, sweep, write_sweep_csv
from .scenario.loader import list_templates, load_scenario, parse_override_value
from .utils import parse_values, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_INVARIANT = 3


def _overrides(pairs: List[str]) -> dict:
    result = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {pair!r}")
        result[key.strip()] = parse_override_value(value)
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ivwsn", description="BLE intra-vehicular sensor network simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="application settings file (YAML)")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one simulation")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int)
    run.add_argument("--until", type=float, metavar="SECONDS", help="simulated duration")
    run.add_argument("--out", metavar="DIR")
    run.add_argument("--trace", action="store_true", help="write the packet trace CSV")
    run.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override a scenario key"
    )

    sw = sub.add_parser("sweep", help="run a parameter sweep")
    sw.add_argument("scenario")
    sw.add_argument("--param", required=True, metavar="KEY", help="dotted scenario key")
    sw.add_argument("--values", required=True, metavar="LIST", help="comma-separated values")
    sw.add_argument("--seeds", type=int, default=1, metavar="N")
    sw.add_argument("--workers", type=int, metavar="N")
    sw.add_argument("--until", type=float, metavar="SECONDS")
    sw.add_argument("--out", metavar="DIR")

    sched = sub.add_parser("schedule", help="build and print a schedule without running")
    sched.add_argument("scenario")
    sched.add_argument("--out", metavar="DIR")

    sub.add_parser("templates", help="list built-in scenario templates")
    return parser


def cmd_run(args: argparse.Namespace, config: Config) -> int:
    scenario = load_scenario(args.scenario, _overrides(args.set), config.get_templates_dir())
    scenario = scenario.with_run(seed=args.seed, duration_s=args.until, trace=True if args.trace else None)
    out = Path(args.out or config.get_output_dir())
    result = run_scenario(scenario, out)
    sys.stdout.write(result.summary)
    logger.info(f"wrote {', '.join(str(p) for p in result.artifacts.values())}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: Config) -> int:
    values = parse_values(args.values)
    workers = args.workers or config.get_sweep_workers()
    rows = sweep(
        args.scenario,
        args.param,
        values,
        seeds=args.seeds,
        workers=workers,
        templates_dir=config.get_templates_dir(),
        duration_s=args.until,
    )
    path = write_sweep_csv(rows, Path(args.out or config.get_output_dir()) / "sweep.csv")
    sys.stdout.write(f"{len(rows)} rows written to {path}\n")
    return EXIT_OK


def cmd_schedule(args: argparse.Namespace, config: Config) -> int:
    scenario = load_scenario(args.scenario, templates_dir=config.get_templates_dir())
    schedule = plan_schedule(scenario)
    if schedule is None:
        sys.stdout.write("no sensors to schedule\n")
        return EXIT_OK
    for row in schedule.to_rows():
        sys.stdout.write(" ".join(f"{k}={v}" for k, v in row.items()) + "\n")
    sys.stdout.write(f"utilization {schedule.utilization:.6f}\n")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        schedule.write_csv(out / "schedule.csv")
    schedule.require_feasible()
    return EXIT_OK


def cmd_templates(args: argparse.Namespace, config: Config) -> int:
    for name, path in list_templates(config.get_templates_dir()).items():
        sys.stdout.write(f"{name}\t{path}\n")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "schedule": cmd_schedule,
    "templates": cmd_templates,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the exit status."""
    args = build_parser().parse_args(argv)
    config = get_config(args.config)
    setup_logging(args.log_level or config.get_log_level())

    try:
        return COMMANDS[args.command](args, config)
    except (ScheduleInfeasible, CapacityExceeded) as e:
        sys.stderr.write(f"schedule infeasible:\n{e}\n")
        return EXIT_INFEASIBLE
    except InvariantViolation as e:
        sys.stderr.write(f"invariant violated: {e.invariant}\n{e.detail}\n")
        return EXIT_INVARIANT
    except ConfigurationError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Error: {e}", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
