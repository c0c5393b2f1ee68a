"""Run reports: computing model sections and serializing them as JSON, CSV or text."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Literal

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ioncoupler import __version__
from ioncoupler.config import CouplerConfig, with_parameter
from ioncoupler.dynamics import TRAJECTORY_COLUMNS, Trajectory
from ioncoupler.errors import CouplerError, NumericalError, ValidationError
from ioncoupler.linear import directional_gammas, linear_elements
from ioncoupler.lumped import LumpedElements, lumped_model
from ioncoupler.oracle import OracleRow

logger = logging.getLogger(__name__)

Model = Literal["linear", "lumped", "both"]
MODELS = ("linear", "lumped", "both")
FORMATS = ("json", "csv", "text")
SECTIONS = ("config", "linear", "lumped", "ratios")

ORACLE_COLUMNS = ("d_m", "r_m", "q_c", "q_analytic_c", "q_bem_c", "rel_diff")

_LUMPED_SETTING_PATHS = {
    "eta": "lumped.eta",
    "gamma_factor": "lumped.gamma_factor",
    "plate_separation1": "lumped.plate_separation1_m",
    "plate_separation2": "lumped.plate_separation2_m",
    "oscillation_energy": "lumped.oscillation_energy_j",
    "eta_from_zeta": "lumped.eta_from_zeta",
}


def format_float(value: float) -> str:
    """Scientific notation, 12 significant digits; ``inf``, ``-inf`` or ``nan`` otherwise."""
    return f"{value:.11e}"


@dataclass(frozen=True)
class RunReport:
    model: str
    config: dict[str, Any]
    linear: dict[str, float] | None = None
    lumped: dict[str, float] | None = None
    ratios: dict[str, float] | None = None
    provenance: dict[str, str] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "model": self.model,
            "config": self.config,
            "provenance": dict(self.provenance),
            "warnings": list(self.warnings),
        }
        for name in ("linear", "lumped", "ratios"):
            section = getattr(self, name)
            if section is not None:
                doc[name] = dict(section)
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> RunReport:
        return cls(
            model=doc["model"],
            config=doc["config"],
            linear=doc.get("linear"),
            lumped=doc.get("lumped"),
            ratios=doc.get("ratios"),
            provenance=dict(doc.get("provenance", {})),
            warnings=tuple(doc.get("warnings", ())),
        )


# --- section builders ---


def linear_section(config: CouplerConfig) -> dict[str, float]:
    elements = linear_elements(config)
    directional = directional_gammas(config)
    caps = config.capacitances
    return {
        "a12_c_per_m": elements.a12,
        "zeta_dimensionless": elements.zeta,
        "a34_n_per_c": elements.a34,
        "gamma_n_per_m": elements.gamma,
        "gamma_2to1_n_per_m": directional.backward,
        "g_rad_per_s": elements.rabi_g,
        "t_swap_s": elements.t_swap,
        "c_disk1_f": caps.c_disk1,
        "c_wire_f": caps.c_wire,
        "c_disk2_f": caps.c_disk2,
        "c_total_f": caps.total,
    }


def _ion_entries(prefix: str, elements: LumpedElements) -> dict[str, float]:
    return {
        f"{prefix}_c_hyb_a_f": elements.c_hyb_a,
        f"{prefix}_l_hyb_a_h": elements.l_hyb_a,
        f"{prefix}_c_hyb_b_f": elements.c_hyb_b,
        f"{prefix}_l_hyb_b_h": elements.l_hyb_b,
        f"{prefix}_c_hyb_b_actual_f": elements.c_hyb_b_actual,
        f"{prefix}_plate_separation_m": elements.plate_separation,
        f"{prefix}_oscillation_energy_j": elements.oscillation_energy,
    }


def lumped_section(config: CouplerConfig) -> dict[str, float]:
    model = lumped_model(config)
    section = {
        **_ion_entries("ion1", model.ion1),
        **_ion_entries("ion2", model.ion2),
        "eta_dimensionless": model.ion1.eta,
        "gamma_factor_dimensionless": model.gamma_factor,
        "gamma_plate_exact_n_per_m": model.gamma_plate.exact,
        "gamma_plate_approx_n_per_m": model.gamma_plate.approximate,
        "gamma_plate_charge_form_n_per_m": model.gamma_plate.charge_form,
        "gamma_plate_corrected_n_per_m": model.gamma_plate.corrected,
    }
    return section


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        logger.warning("plate-model gamma is zero; the gamma ratio is not finite")
        return math.nan if numerator == 0.0 else math.copysign(math.inf, numerator)
    return numerator / denominator


def ratios_section(linear: Mapping[str, float], lumped: Mapping[str, float]) -> dict[str, float]:
    return {
        "gamma_linear_over_plate_dimensionless": _ratio(
            linear["gamma_n_per_m"], lumped["gamma_plate_exact_n_per_m"]
        ),
        "g_rad_per_s": linear["g_rad_per_s"],
        "t_swap_s": linear["t_swap_s"],
    }


def evaluate_section(
    name: str, builder: Callable[[CouplerConfig], dict[str, float]], config: CouplerConfig
) -> dict[str, float]:
    """Run a section builder, reporting float overflow and division by zero as NumericalError."""
    try:
        return builder(config)
    except CouplerError:
        raise
    except ArithmeticError as e:
        raise NumericalError(
            f"{name} model is not representable in double precision",
            f"{type(e).__name__}: {e}",
        ) from e


def _unused_lumped_fields(config: CouplerConfig) -> list[str]:
    defaults = type(config.lumped)()
    return [
        path
        for attr, path in _LUMPED_SETTING_PATHS.items()
        if getattr(config.lumped, attr) != getattr(defaults, attr)
    ]


def build_report(config: CouplerConfig, model: Model = "both", timestamp: bool = True) -> RunReport:
    """Evaluate the selected model sections for a validated configuration."""
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r} (expected one of {', '.join(MODELS)})")
    warnings: list[str] = []
    linear = lumped = ratios = None
    if model in ("linear", "both"):
        linear = evaluate_section("linear", linear_section, config)
    if model in ("lumped", "both"):
        lumped = evaluate_section("lumped", lumped_section, config)
    if linear is not None and lumped is not None:
        ratios = ratios_section(linear, lumped)
    if model == "linear":
        for path in _unused_lumped_fields(config):
            message = f"{path} is ignored by model 'linear'"
            logger.warning(message)
            warnings.append(message)

    provenance = {"tool_version": __version__}
    if timestamp:
        provenance["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return RunReport(
        model=model,
        config=config.to_dict(),
        linear=linear,
        lumped=lumped,
        ratios=ratios,
        provenance=provenance,
        warnings=tuple(warnings),
    )


# --- serialization ---


def _json_value(value: Any, level: int) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = format_float(value)
        # JSON has no non-finite numbers; use the same spelling as the CSV cell.
        return text if math.isfinite(value) else json.dumps(text)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_json_value(value[k], level + 1)}"
            for k in sorted(value)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{_json_value(v, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(report: RunReport) -> str:
    """Stable-key-ordered JSON; floats carry 12 significant digits."""
    return _json_value(report.to_dict(), 0) + "\n"


def _flatten(prefix: str, value: Any, out: dict[str, Any]) -> None:
    if isinstance(value, Mapping):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}", value[key], out)
    else:
        out[prefix] = value


def flatten_report(report: RunReport) -> dict[str, Any]:
    """``section.key`` -> value for every CSV column, in header order."""
    doc = report.to_dict()
    out: dict[str, Any] = {}
    for section in SECTIONS:
        if section in doc:
            _flatten(section, doc[section], out)
    return out


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buffer.getvalue()


def to_csv(report: RunReport) -> str:
    flat = flatten_report(report)
    return write_csv(list(flat), [list(flat.values())])


def _section_table(title: str, values: Mapping[str, Any]) -> Table:
    table = Table(title=title, show_lines=False)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right", style="green")
    for key, value in values.items():
        table.add_row(key, f"{value:.6e}" if isinstance(value, float) else str(value))
    return table


def to_text(report: RunReport) -> str:
    """Aligned human-readable tables."""
    buffer = io.StringIO()
    console = Console(file=buffer, width=100, color_system=None, force_terminal=False)
    console.print(Panel(f"[bold]ioncoupler report[/bold]  model: {report.model}"))
    config_flat: dict[str, Any] = {}
    _flatten("config", report.config, config_flat)
    console.print(_section_table("Configuration", config_flat))
    if report.linear is not None:
        console.print(_section_table("Linear elements", report.linear))
    if report.lumped is not None:
        console.print(_section_table("Lumped elements", report.lumped))
    if report.ratios is not None:
        console.print(_section_table("Comparison", report.ratios))
    for warning in report.warnings:
        console.print(f"warning: {warning}")
    for key, value in sorted(report.provenance.items()):
        console.print(f"{key}: {value}")
    return buffer.getvalue()


def emit_report(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    if fmt == "text":
        return to_text(report)
    raise ValidationError(f"unknown output format {fmt!r} (expected one of {', '.join(FORMATS)})")


# --- sweeps ---


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    values: tuple[float, ...]
    rows: tuple[dict[str, float], ...]

    @property
    def header(self) -> list[str]:
        return [self.parameter, *self.rows[0]] if self.rows else [self.parameter]

    def column(self, name: str) -> list[float]:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        return write_csv(
            self.header,
            ([value, *row.values()] for value, row in zip(self.values, self.rows, strict=True)),
        )


def sweep_grid(start: float, stop: float, steps: int, scale: str = "linear") -> np.ndarray:
    if steps < 2:
        raise ValidationError(f"steps must be >= 2, got {steps}")
    if scale == "linear":
        return np.linspace(start, stop, steps)
    if scale == "log":
        if start <= 0.0 or stop <= 0.0:
            raise ValidationError("log sweeps need positive bounds")
        return np.geomspace(start, stop, steps)
    raise ValidationError(f"unknown scale {scale!r} (expected linear or log)")


def _sweep_point(config: CouplerConfig, parameter: str, value: float, model: Model) -> dict:
    point = with_parameter(config, parameter, value)
    row: dict[str, float] = {}
    linear = lumped = None
    if model in ("linear", "both"):
        linear = evaluate_section("linear", linear_section, point)
        row.update({f"linear.{k}": v for k, v in linear.items()})
    if model in ("lumped", "both"):
        lumped = evaluate_section("lumped", lumped_section, point)
        row.update({f"lumped.{k}": v for k, v in lumped.items()})
    if linear is not None and lumped is not None:
        row.update({f"ratios.{k}": v for k, v in ratios_section(linear, lumped).items()})
    return row


def run_sweep(
    config: CouplerConfig,
    parameter: str,
    start: float,
    stop: float,
    steps: int,
    scale: str = "linear",
    model: Model = "both",
    workers: int = 1,
) -> SweepResult:
    """Evaluate the models on a one-parameter grid.

    Grid points may run on a thread pool; rows stay in grid order.
    """
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r} (expected one of {', '.join(MODELS)})")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    grid = [float(v) for v in sweep_grid(start, stop, steps, scale)]
    with_parameter(config, parameter, grid[0])
    logger.info("sweeping %s over %d points with %d worker(s)", parameter, len(grid), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda v: _sweep_point(config, parameter, v, model), grid))
    return SweepResult(parameter=parameter, values=tuple(grid), rows=tuple(rows))


# --- other CSV outputs ---


def oracle_csv(rows: Iterable[OracleRow]) -> str:
    return write_csv(ORACLE_COLUMNS, rows)


def trajectory_csv(trajectory: Trajectory) -> str:
    return write_csv(TRAJECTORY_COLUMNS, trajectory.rows())
