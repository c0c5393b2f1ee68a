"""Physical constants, ion/trap/geometry types and self-capacitance estimators."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

from scipy import constants as codata

from ioncoupler.errors import ValidationError

logger = logging.getLogger(__name__)


def require_positive(name: str, value: float) -> float:
    """Return ``value`` as a float, raising ValidationError unless it is finite and > 0."""
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{name} must be a positive finite number, got {value!r}")
    return value


def require_non_negative(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise ValidationError(f"{name} must be a non-negative finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used by every model."""

    elementary_charge: float
    vacuum_permittivity: float
    reduced_planck: float

    def __post_init__(self) -> None:
        require_positive("elementary_charge", self.elementary_charge)
        require_positive("vacuum_permittivity", self.vacuum_permittivity)
        require_positive("reduced_planck", self.reduced_planck)

    @property
    def coulomb_constant(self) -> float:
        """1/(4 pi eps0) in N m^2 / C^2."""
        return 1.0 / (4.0 * math.pi * self.vacuum_permittivity)


CODATA = PhysicalConstants(
    elementary_charge=codata.e,
    vacuum_permittivity=codata.epsilon_0,
    reduced_planck=codata.hbar,
)


@dataclass(frozen=True)
class IonSpecies:
    """A trapped ion: mass and charge as a multiple of e."""

    mass_kg: float
    charge_multiple: int = 1

    def __post_init__(self) -> None:
        require_positive("mass_kg", self.mass_kg)
        if isinstance(self.charge_multiple, bool) or not isinstance(self.charge_multiple, int):
            raise ValidationError(
                f"charge_multiple must be an integer, got {self.charge_multiple!r}"
            )
        if self.charge_multiple < 1:
            raise ValidationError(f"charge_multiple must be >= 1, got {self.charge_multiple}")

    def charge(self, constants: PhysicalConstants = CODATA) -> float:
        return self.charge_multiple * constants.elementary_charge


@dataclass(frozen=True)
class HarmonicTrap:
    """Axial harmonic confinement, described by its angular frequency."""

    angular_frequency: float

    def __post_init__(self) -> None:
        require_positive("angular_frequency", self.angular_frequency)

    @classmethod
    def from_frequency_hz(cls, frequency_hz: float) -> HarmonicTrap:
        return cls(2.0 * math.pi * require_positive("frequency_hz", frequency_hz))

    @property
    def frequency_hz(self) -> float:
        return self.angular_frequency / (2.0 * math.pi)

    def spring_constant(self, ion: IonSpecies) -> float:
        """k = m w^2."""
        return ion.mass_kg * self.angular_frequency**2

    def ground_state_energy(self, constants: PhysicalConstants = CODATA) -> float:
        return 0.5 * constants.reduced_planck * self.angular_frequency


@dataclass(frozen=True)
class CouplingGeometry:
    """Disk-wire-disk conductor. Disks and wire are ideal zero-thickness conductors."""

    r1: float
    r2: float
    d_eq1: float
    d_eq2: float
    wire_length: float
    wire_radius: float

    def __post_init__(self) -> None:
        for name in ("r1", "r2", "d_eq1", "d_eq2", "wire_length", "wire_radius"):
            require_positive(name, getattr(self, name))

    def mirrored(self) -> CouplingGeometry:
        """The same conductor seen from ion 2."""
        return CouplingGeometry(
            r1=self.r2,
            r2=self.r1,
            d_eq1=self.d_eq2,
            d_eq2=self.d_eq1,
            wire_length=self.wire_length,
            wire_radius=self.wire_radius,
        )


@dataclass(frozen=True)
class SelfCapacitances:
    """Isolated self-capacitances of the three conductor pieces, in farad."""

    c_disk1: float
    c_wire: float
    c_disk2: float

    def __post_init__(self) -> None:
        require_non_negative("c_disk1", self.c_disk1)
        require_non_negative("c_wire", self.c_wire)
        require_non_negative("c_disk2", self.c_disk2)

    @property
    def total(self) -> float:
        return self.c_disk1 + self.c_wire + self.c_disk2

    def reversed(self) -> SelfCapacitances:
        return SelfCapacitances(c_disk1=self.c_disk2, c_wire=self.c_wire, c_disk2=self.c_disk1)


# --- self-capacitance estimators ---


def disk_self_capacitance(r: float, constants: PhysicalConstants = CODATA) -> float:
    """Isolated thin disk of radius ``r``: C = 8 eps0 r."""
    r = require_positive("r", r)
    return 8.0 * constants.vacuum_permittivity * r


def wire_self_capacitance(
    length: float, radius: float, constants: PhysicalConstants = CODATA
) -> float:
    """Isolated thin straight wire: C = 2 pi eps0 L / ln(L/a).

    Valid for L/a well above e; shorter, fatter wires are computed but logged as
    outside the thin-wire regime.
    """
    length = require_positive("wire_length", length)
    radius = require_positive("wire_radius", radius)
    if length <= radius:
        raise ValidationError(
            f"wire_length ({length!r}) must exceed wire_radius ({radius!r})"
        )
    aspect = length / radius
    if aspect <= math.e:
        logger.warning(
            "wire aspect ratio L/a = %.3g is outside the thin-wire regime (L/a > e)", aspect
        )
    return 2.0 * math.pi * constants.vacuum_permittivity * length / math.log(aspect)


@dataclass(frozen=True)
class CapacitanceEstimators:
    """Swappable formulas for the disk and wire self-capacitances."""

    disk: Callable[[float, PhysicalConstants], float] = disk_self_capacitance
    wire: Callable[[float, float, PhysicalConstants], float] = wire_self_capacitance


ISOLATED_CONDUCTORS = CapacitanceEstimators()


def self_capacitances(
    geometry: CouplingGeometry,
    estimators: CapacitanceEstimators = ISOLATED_CONDUCTORS,
    constants: PhysicalConstants = CODATA,
) -> SelfCapacitances:
    """Self-capacitances of both disks and the wire; disk-wire proximity is neglected."""
    return SelfCapacitances(
        c_disk1=estimators.disk(geometry.r1, constants),
        c_wire=estimators.wire(geometry.wire_length, geometry.wire_radius, constants),
        c_disk2=estimators.disk(geometry.r2, constants),
    )
