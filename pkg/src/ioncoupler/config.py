"""Configuration file loading and validation.

A configuration is one JSON document with sections ``ion1``, ``ion2``, ``trap1``,
``trap2`` and ``geometry``, plus optional ``lumped`` and ``zeta_strategy``. Units
are part of every field name; trap frequencies are given in Hz and converted to
angular frequency on load.
"""

from __future__ import annotations

import copy
import functools
import json
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ioncoupler.core import (
    CODATA,
    CouplingGeometry,
    HarmonicTrap,
    IonSpecies,
    PhysicalConstants,
    SelfCapacitances,
    self_capacitances,
)
from ioncoupler.errors import ConfigError, ValidationError
from ioncoupler.linear import DEFAULT_ZETA_STRATEGY, ZETA_STRATEGIES

logger = logging.getLogger(__name__)

ION_FIELDS = ("mass_kg", "charge_multiple")
TRAP_FIELDS = ("frequency_hz",)
GEOMETRY_FIELDS = ("r1_m", "r2_m", "d_eq1_m", "d_eq2_m", "wire_length_m", "wire_radius_m")
LUMPED_FIELDS = (
    "eta",
    "gamma_factor",
    "plate_separation1_m",
    "plate_separation2_m",
    "oscillation_energy_j",
    "eta_from_zeta",
)
TOP_LEVEL_SECTIONS = ("ion1", "ion2", "trap1", "trap2", "geometry", "lumped", "zeta_strategy")

# Sweep parameter name -> (section, field) locations it overrides.
SWEEPABLE_PARAMETERS: dict[str, tuple[tuple[str, str], ...]] = {
    "r1_m": (("geometry", "r1_m"),),
    "r2_m": (("geometry", "r2_m"),),
    "d_eq1_m": (("geometry", "d_eq1_m"),),
    "d_eq2_m": (("geometry", "d_eq2_m"),),
    "wire_length_m": (("geometry", "wire_length_m"),),
    "frequency_hz": (("trap1", "frequency_hz"), ("trap2", "frequency_hz")),
}


@dataclass(frozen=True)
class LumpedSettings:
    """Inputs only the lumped-element model uses. ``None`` means "use the default"."""

    eta: float | None = None
    gamma_factor: float = 1.0
    plate_separation1: float | None = None
    plate_separation2: float | None = None
    oscillation_energy: float | None = None
    eta_from_zeta: bool = False

    def __post_init__(self) -> None:
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"eta must lie in [0, 1], got {self.eta!r}")
        if self.gamma_factor <= 0.0:
            raise ValidationError(f"gamma_factor must be positive, got {self.gamma_factor!r}")

    @property
    def is_default(self) -> bool:
        return self == LumpedSettings()


@dataclass(frozen=True)
class CouplerConfig:
    ion1: IonSpecies
    ion2: IonSpecies
    trap1: HarmonicTrap
    trap2: HarmonicTrap
    geometry: CouplingGeometry
    lumped: LumpedSettings = field(default_factory=LumpedSettings)
    zeta_strategy: str = DEFAULT_ZETA_STRATEGY
    constants: PhysicalConstants = CODATA

    @property
    def charge1(self) -> float:
        return self.ion1.charge(self.constants)

    @property
    def charge2(self) -> float:
        return self.ion2.charge(self.constants)

    @property
    def spring_constant1(self) -> float:
        return self.trap1.spring_constant(self.ion1)

    @property
    def spring_constant2(self) -> float:
        return self.trap2.spring_constant(self.ion2)

    @functools.cached_property
    def capacitances(self) -> SelfCapacitances:
        return self_capacitances(self.geometry, constants=self.constants)

    @property
    def equal_traps(self) -> bool:
        return math.isclose(
            self.trap1.angular_frequency, self.trap2.angular_frequency, rel_tol=1e-12
        )

    def to_dict(self) -> dict[str, Any]:
        """The configuration as a JSON-ready document, inverse of ``validate_config``."""
        doc: dict[str, Any] = {
            "ion1": {"mass_kg": self.ion1.mass_kg, "charge_multiple": self.ion1.charge_multiple},
            "ion2": {"mass_kg": self.ion2.mass_kg, "charge_multiple": self.ion2.charge_multiple},
            "trap1": {"frequency_hz": self.trap1.frequency_hz},
            "trap2": {"frequency_hz": self.trap2.frequency_hz},
            "geometry": {
                "r1_m": self.geometry.r1,
                "r2_m": self.geometry.r2,
                "d_eq1_m": self.geometry.d_eq1,
                "d_eq2_m": self.geometry.d_eq2,
                "wire_length_m": self.geometry.wire_length,
                "wire_radius_m": self.geometry.wire_radius,
            },
            "zeta_strategy": self.zeta_strategy,
        }
        if not self.lumped.is_default:
            lumped: dict[str, Any] = {"gamma_factor": self.lumped.gamma_factor}
            optional = {
                "eta": self.lumped.eta,
                "plate_separation1_m": self.lumped.plate_separation1,
                "plate_separation2_m": self.lumped.plate_separation2,
                "oscillation_energy_j": self.lumped.oscillation_energy,
            }
            lumped.update({k: v for k, v in optional.items() if v is not None})
            if self.lumped.eta_from_zeta:
                lumped["eta_from_zeta"] = True
            doc["lumped"] = lumped
        return doc


# --- validation ---


def _read_section(
    document: Mapping[str, Any],
    name: str,
    fields: tuple[str, ...],
    errors: list[str],
    *,
    required: bool = True,
) -> Mapping[str, Any] | None:
    if name not in document:
        if required:
            errors.append(f"{name}: missing required section")
        return None
    section = document[name]
    if not isinstance(section, Mapping):
        errors.append(f"{name}: expected an object, got {type(section).__name__}")
        return None
    for key in section:
        if key not in fields:
            errors.append(f"{name}.{key}: unknown field (expected one of {', '.join(fields)})")
    return section


def _read_number(
    section: Mapping[str, Any] | None,
    path: str,
    errors: list[str],
    *,
    required: bool = True,
    positive: bool = True,
) -> float | None:
    if section is None:
        return None
    key = path.rsplit(".", 1)[-1]
    if key not in section:
        if required:
            errors.append(f"{path}: missing required field")
        return None
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{path}: expected a number, got {type(value).__name__}")
        return None
    value = float(value)
    if not math.isfinite(value):
        errors.append(f"{path}: must be finite, got {value!r}")
        return None
    if positive and value <= 0.0:
        errors.append(f"{path}: must be positive, got {value!r}")
        return None
    return value


def _read_ion(document: Mapping[str, Any], name: str, errors: list[str]) -> IonSpecies | None:
    section = _read_section(document, name, ION_FIELDS, errors)
    mass = _read_number(section, f"{name}.mass_kg", errors)
    if section is None:
        return None
    multiple = section.get("charge_multiple")
    if multiple is None:
        errors.append(f"{name}.charge_multiple: missing required field")
        return None
    if isinstance(multiple, bool) or not isinstance(multiple, int):
        errors.append(f"{name}.charge_multiple: expected an integer, got {multiple!r}")
        return None
    if multiple < 1:
        errors.append(f"{name}.charge_multiple: must be >= 1, got {multiple}")
        return None
    if mass is None:
        return None
    return IonSpecies(mass_kg=mass, charge_multiple=multiple)


def _read_trap(document: Mapping[str, Any], name: str, errors: list[str]) -> HarmonicTrap | None:
    section = _read_section(document, name, TRAP_FIELDS, errors)
    frequency = _read_number(section, f"{name}.frequency_hz", errors)
    return None if frequency is None else HarmonicTrap.from_frequency_hz(frequency)


def _read_geometry(document: Mapping[str, Any], errors: list[str]) -> CouplingGeometry | None:
    section = _read_section(document, "geometry", GEOMETRY_FIELDS, errors)
    values = {key: _read_number(section, f"geometry.{key}", errors) for key in GEOMETRY_FIELDS}
    if any(v is None for v in values.values()):
        return None
    length = values["wire_length_m"]
    radius = values["wire_radius_m"]
    assert length is not None and radius is not None
    if length <= radius:
        errors.append(
            f"geometry.wire_length_m: must exceed geometry.wire_radius_m "
            f"({length!r} <= {radius!r})"
        )
        return None
    return CouplingGeometry(
        r1=values["r1_m"],  # type: ignore[arg-type]
        r2=values["r2_m"],  # type: ignore[arg-type]
        d_eq1=values["d_eq1_m"],  # type: ignore[arg-type]
        d_eq2=values["d_eq2_m"],  # type: ignore[arg-type]
        wire_length=length,
        wire_radius=radius,
    )


def _read_lumped(document: Mapping[str, Any], errors: list[str]) -> LumpedSettings | None:
    section = _read_section(document, "lumped", LUMPED_FIELDS, errors, required=False)
    if section is None:
        return None if "lumped" in document else LumpedSettings()
    count = len(errors)
    eta = _read_number(section, "lumped.eta", errors, required=False, positive=False)
    if eta is not None and not 0.0 <= eta <= 1.0:
        errors.append(f"lumped.eta: must lie in [0, 1], got {eta!r}")
    gamma_factor = _read_number(section, "lumped.gamma_factor", errors, required=False)
    sep1 = _read_number(section, "lumped.plate_separation1_m", errors, required=False)
    sep2 = _read_number(section, "lumped.plate_separation2_m", errors, required=False)
    energy = _read_number(section, "lumped.oscillation_energy_j", errors, required=False)
    eta_from_zeta = section.get("eta_from_zeta", False)
    if not isinstance(eta_from_zeta, bool):
        errors.append(f"lumped.eta_from_zeta: expected true or false, got {eta_from_zeta!r}")
    elif eta_from_zeta and "eta" in section:
        errors.append("lumped.eta: cannot be combined with lumped.eta_from_zeta")
    if len(errors) > count:
        return None
    return LumpedSettings(
        eta=eta,
        gamma_factor=1.0 if gamma_factor is None else gamma_factor,
        plate_separation1=sep1,
        plate_separation2=sep2,
        oscillation_energy=energy,
        eta_from_zeta=bool(eta_from_zeta),
    )


def validate_config(document: Any, source: str = "") -> CouplerConfig:
    """Build a CouplerConfig from a parsed document.

    Every violation is collected, with its field path, before a single
    ConfigError is raised.
    """
    if not isinstance(document, Mapping):
        raise ConfigError([f"top level: expected an object, got {type(document).__name__}"], source)
    errors: list[str] = []
    for key in document:
        if key not in TOP_LEVEL_SECTIONS:
            errors.append(f"{key}: unknown section")

    ion1 = _read_ion(document, "ion1", errors)
    ion2 = _read_ion(document, "ion2", errors)
    trap1 = _read_trap(document, "trap1", errors)
    trap2 = _read_trap(document, "trap2", errors)
    geometry = _read_geometry(document, errors)
    lumped = _read_lumped(document, errors)

    strategy = document.get("zeta_strategy", DEFAULT_ZETA_STRATEGY)
    if not isinstance(strategy, str) or strategy not in ZETA_STRATEGIES:
        known = ", ".join(sorted(ZETA_STRATEGIES))
        errors.append(f"zeta_strategy: unknown strategy {strategy!r} (known: {known})")

    if errors:
        raise ConfigError(errors, source)
    assert ion1 and ion2 and trap1 and trap2 and geometry and lumped

    config = CouplerConfig(
        ion1=ion1,
        ion2=ion2,
        trap1=trap1,
        trap2=trap2,
        geometry=geometry,
        lumped=lumped,
        zeta_strategy=strategy,
    )
    _ = config.capacitances
    logger.debug("validated configuration %s", source or "<document>")
    return config


def load_config(path: Path | str) -> CouplerConfig:
    """Read and validate a JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"cannot read configuration file {path}: {e.strerror or e}"]) from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            [f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}"], str(path)
        ) from e
    return validate_config(document, source=str(path))


def with_parameter(config: CouplerConfig, name: str, value: float) -> CouplerConfig:
    """Return a copy of ``config`` with one sweepable parameter replaced.

    ``frequency_hz`` sets both traps.
    """
    try:
        locations = SWEEPABLE_PARAMETERS[name]
    except KeyError:
        known = ", ".join(SWEEPABLE_PARAMETERS)
        raise ValidationError(f"unknown sweep parameter {name!r} (sweepable: {known})") from None
    document = copy.deepcopy(config.to_dict())
    for section, key in locations:
        document[section][key] = value
    return validate_config(document, source=f"{name}={value!r}")
