"""CLI entry point for ioncoupler."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from ioncoupler import __version__
from ioncoupler.errors import (
    ConfigError,
    CouplerError,
    NumericalError,
    UnsupportedConfigurationError,
    ValidationError,
)

logger = logging.getLogger("ioncoupler")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_NOT_DERIVABLE = 3

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

# Beyond this a simulation would run for hours in pure Python.
MAX_SIMULATION_STEPS = 50_000_000


class _Parser(argparse.ArgumentParser):
    """Usage errors map to the validation exit code instead of argparse's 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ValidationError(f"{self.prog}: {message}")


def _setup_logging() -> None:
    from rich.console import Console
    from rich.logging import RichHandler

    name = os.environ.get("COUPLER_LOG", "warn").strip().lower()
    level = LOG_LEVELS.get(name)
    handler = RichHandler(
        console=Console(stderr=True),
        show_time=False,
        show_path=False,
        markup=False,
    )
    logging.basicConfig(
        level=level or logging.WARNING,
        format="%(message)s",
        handlers=[handler],
        force=True,
    )
    if level is None:
        logger.warning("unknown COUPLER_LOG value %r, using 'warn'", name)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="coupler",
        description="Coupling between two trapped ions through a floating disk-wire-disk conductor",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="Evaluate the linear and/or lumped model")
    compute.add_argument("config", type=Path, help="JSON configuration file")
    compute.add_argument("--model", choices=["linear", "lumped", "both"], default="both")
    compute.add_argument("--format", default="json", help="json, csv or text (default: json)")
    compute.add_argument(
        "--no-timestamp", action="store_true", help="Omit the timestamp for reproducible output"
    )

    sweep = sub.add_parser("sweep", help="Evaluate the models over a one-parameter grid (CSV)")
    sweep.add_argument("config", type=Path, help="JSON configuration file")
    sweep.add_argument("--param", required=True, help="Sweepable field, e.g. r1_m")
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--scale", choices=["linear", "log"], default="linear")
    sweep.add_argument("--model", choices=["linear", "lumped", "both"], default="both")
    sweep.add_argument("--workers", type=int, default=1, help="Grid points evaluated in parallel")

    simulate = sub.add_parser("simulate", help="Integrate the coupled oscillators (CSV)")
    simulate.add_argument("config", type=Path, help="JSON configuration file")
    simulate.add_argument(
        "--coupling-ratio",
        type=float,
        default=None,
        help="Use gamma = ratio * k instead of the linear-model gamma",
    )
    simulate.add_argument(
        "--duration", type=float, default=None, help="Seconds (default: 1.5 exchange times)"
    )
    simulate.add_argument(
        "--steps-per-period", type=int, default=200, help="Steps per fast period (default: 200)"
    )
    simulate.add_argument("--method", choices=["verlet", "verlet4"], default="verlet4")
    simulate.add_argument("--record-every", type=int, default=1)
    simulate.add_argument(
        "--summary", action="store_true", help="Print exchange-time summary instead of samples"
    )

    oracle = sub.add_parser("oracle", help="Plane-window versus finite-disk induced charge (CSV)")
    oracle.add_argument("--config", type=Path, default=None, help="Take r1 and d_eq1 from here")
    oracle.add_argument("--radius", type=float, default=None, help="Disk radius in m")
    oracle.add_argument("--heights", type=float, nargs="+", default=None, help="Heights in m")
    oracle.add_argument("--rings", type=int, default=256)
    oracle.add_argument("--charge-multiple", type=int, default=1)

    causal = sub.add_parser("causal", help="Causal-equality notation tools")
    causal_sub = causal.add_subparsers(dest="causal_command", required=True)
    check = causal_sub.add_parser("check", help="Check claims of a derivation script")
    check.add_argument("script", type=Path)
    check.add_argument("--json", action="store_true", help="Emit the verdict report as JSON")
    compose = causal_sub.add_parser("compose", help="Compose two relations")
    compose.add_argument("first")
    compose.add_argument("second")
    return parser


# --- subcommands ---


def _cmd_compute(args: argparse.Namespace) -> int:
    from ioncoupler.config import load_config
    from ioncoupler.report import FORMATS, build_report, emit_report

    if args.format not in FORMATS:
        raise ValidationError(
            f"unknown output format {args.format!r} (expected one of {', '.join(FORMATS)})"
        )
    config = load_config(args.config)
    report = build_report(config, args.model, timestamp=not args.no_timestamp)
    sys.stdout.write(emit_report(report, args.format))
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    from ioncoupler.config import load_config
    from ioncoupler.report import run_sweep

    config = load_config(args.config)
    result = run_sweep(
        config,
        args.param,
        args.start,
        args.stop,
        args.steps,
        scale=args.scale,
        model=args.model,
        workers=args.workers,
    )
    sys.stdout.write(result.to_csv())
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    from ioncoupler.config import load_config
    from ioncoupler.dynamics import (
        exchange_time,
        normal_modes,
        simulate,
        step_count,
        system_from_config,
    )
    from ioncoupler.linear import rabi_coupling
    from ioncoupler.report import format_float, trajectory_csv

    config = load_config(args.config)
    system = system_from_config(config, coupling_ratio=args.coupling_ratio)
    if args.steps_per_period < 100:
        raise ValidationError("--steps-per-period must be at least 100")
    dt = system.fast_period / args.steps_per_period

    try:
        modes = normal_modes(system)
    except UnsupportedConfigurationError:
        modes = None
    duration = args.duration
    if duration is None:
        if modes is None or modes.splitting == 0.0:
            raise ValidationError("--duration is required when no exchange time can be predicted")
        duration = 1.5 * math.pi / abs(modes.splitting)
    if duration / dt > MAX_SIMULATION_STEPS:
        raise ValidationError(
            f"{duration / dt:.3g} steps requested; use --coupling-ratio (e.g. 1e-3) "
            "or a shorter --duration"
        )

    trajectory = simulate(system, duration, dt, args.method, args.record_every)
    if not args.summary:
        sys.stdout.write(trajectory_csv(trajectory))
        return EXIT_OK

    lines = [
        f"dt_s {format_float(dt)}",
        f"steps {step_count(duration, dt)}",
        f"energy_drift {format_float(trajectory.relative_energy_drift)}",
        f"exchange_time_s {format_float(exchange_time(trajectory))}",
    ]
    if modes is not None and modes.splitting != 0.0:
        rabi = rabi_coupling(
            system.gamma, system.m1, math.sqrt(system.k1 / system.m1)
        )
        lines.append(f"pi_over_splitting_s {format_float(math.pi / abs(modes.splitting))}")
        lines.append(f"t_swap_s {format_float(rabi.t_swap)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    from ioncoupler.config import load_config
    from ioncoupler.core import CODATA
    from ioncoupler.oracle import compare_rows
    from ioncoupler.report import oracle_csv

    radius = args.radius
    heights = args.heights
    if args.config is not None:
        config = load_config(args.config)
        radius = radius if radius is not None else config.geometry.r1
        heights = heights if heights is not None else [config.geometry.d_eq1]
    if radius is None or heights is None:
        raise ValidationError("oracle needs --radius and --heights, or --config")
    if args.charge_multiple < 1:
        raise ValidationError("--charge-multiple must be >= 1")
    q = args.charge_multiple * CODATA.elementary_charge
    sys.stdout.write(oracle_csv(compare_rows(q, heights, radius, args.rings)))
    return EXIT_OK


def _cmd_causal(args: argparse.Namespace) -> int:
    from ioncoupler.causal import check_derivation, compose, parse_relation

    if args.causal_command == "compose":
        result = compose(parse_relation(args.first), parse_relation(args.second))
        sys.stdout.write(f"{result}\n")
        return EXIT_OK

    try:
        script = args.script.read_text(encoding="utf-8")
    except OSError as e:
        message = f"cannot read derivation script {args.script}: {e.strerror or e}"
        raise ConfigError([message]) from e
    report = check_derivation(script)
    sys.stdout.write(report.to_json() if args.json else report.to_text())
    for error in report.errors:
        print(f"error: {args.script}: {error}", file=sys.stderr)
    if report.errors:
        return EXIT_VALIDATION
    return EXIT_OK if report.all_derivable else EXIT_NOT_DERIVABLE


_COMMANDS = {
    "compute": _cmd_compute,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "oracle": _cmd_oracle,
    "causal": _cmd_causal,
}


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        if e.source:
            print(f"error: invalid configuration {e.source}", file=sys.stderr)
        for message in e.errors:
            print(f"error: {message}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as e:
        print(f"error: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CouplerError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ArithmeticError as e:
        print(f"error: numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
