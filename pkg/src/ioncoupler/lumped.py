"""Lumped-element (equivalent circuit) description of a trapped ion.

Two ways of mapping an oscillating ion onto an LC resonator are implemented:
the energy route (``method1_*``) and the parallel-plate induced-current route
(``method2_elements``). Both resonate at the trap frequency by construction.
The floating-conductor correction ``eta`` and the parallel-plate coupling
strength are included so the circuit picture can be compared with the
linear-element model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

from ioncoupler.core import CODATA, PhysicalConstants, require_positive
from ioncoupler.errors import ValidationError

if TYPE_CHECKING:
    from ioncoupler.config import CouplerConfig
    from ioncoupler.core import HarmonicTrap, IonSpecies

logger = logging.getLogger(__name__)

# Relative tolerance for declaring an implied charge equal to the real one.
CHARGE_MATCH_TOLERANCE = 1e-6


class Method2Elements(NamedTuple):
    c_hyb_b: float
    l_hyb_b: float


class ParallelPlateGamma(NamedTuple):
    exact: float
    approximate: float
    charge_form: float
    corrected: float


class DriveContradiction(NamedTuple):
    implied_e_squared: float
    actual_e_squared: float
    equal: bool


class DriveCurrents(NamedTuple):
    shockley: float
    plate_drive: float


@dataclass(frozen=True)
class LumpedElements:
    """Equivalent-circuit elements for one ion, SI units."""

    c_hyb_a: float
    l_hyb_a: float
    c_hyb_b: float
    l_hyb_b: float
    eta: float
    c_hyb_b_actual: float
    plate_separation: float
    oscillation_energy: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"eta must lie in [0, 1], got {self.eta!r}")
        if self.c_hyb_b_actual > self.c_hyb_b * (1.0 + 1e-15):
            raise ValidationError("corrected capacitance exceeds the uncorrected one")


@dataclass(frozen=True)
class LumpedModel:
    ion1: LumpedElements
    ion2: LumpedElements
    gamma_plate: ParallelPlateGamma
    gamma_factor: float


# --- method 1: energy route ---


def method1_capacitance(
    energy: float, charge_multiple: int = 1, constants: PhysicalConstants = CODATA
) -> float:
    """C = (n e)^2 / (2 E)."""
    energy = require_positive("energy", energy)
    if charge_multiple < 1:
        raise ValidationError(f"charge_multiple must be >= 1, got {charge_multiple}")
    charge = charge_multiple * constants.elementary_charge
    return charge**2 / (2.0 * energy)


def method1_inductance(omega: float, c_hyb_a: float) -> float:
    """L = 1 / (w^2 C), the inductance resonating with ``c_hyb_a`` at ``omega``."""
    omega = require_positive("omega", omega)
    c_hyb_a = require_positive("c_hyb_a", c_hyb_a)
    return 1.0 / (omega**2 * c_hyb_a)


# --- method 2: induced-current route ---


def shockley_current(v_z: float, d: float, q: float) -> float:
    """Current between two grounded parallel plates a distance ``d`` apart: q v_z / d."""
    d = require_positive("d", d)
    return q * v_z / d


def method2_elements(mass: float, omega: float, d: float, q: float) -> Method2Elements:
    """C = q^2 / (m w^2 d^2) and L = m d^2 / q^2."""
    mass = require_positive("mass", mass)
    omega = require_positive("omega", omega)
    d = require_positive("d", d)
    q = require_positive("q", abs(q))
    return Method2Elements(
        c_hyb_b=q**2 / (mass * omega**2 * d**2),
        l_hyb_b=mass * d**2 / q**2,
    )


def _require_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"eta must lie in [0, 1], got {eta!r}")
    return eta


def corrected_capacitance(c_hyb_b: float, eta: float) -> float:
    """eta C: a floating pickup conductor sees only part of the induced current."""
    return _require_eta(eta) * c_hyb_b


def corrected_inductance(l_hyb_b: float, eta: float) -> float:
    """L / eta, the inductance that still resonates at w with the corrected capacitance."""
    eta = _require_eta(eta)
    if eta == 0.0:
        raise ValidationError("eta = 0 has no finite corrected inductance")
    return l_hyb_b / eta


def eta_from_zeta(zeta_value: float) -> float:
    """Estimate eta by the linear model's charge fraction. Heuristic, not a derived result."""
    return _require_eta(zeta_value)


# --- coupling through parallel plates ---


def gamma_parallel_plate(
    mass: float,
    omega: float,
    c1_hyb: float,
    c2_hyb: float,
    c_total: float,
    gamma_factor: float = 1.0,
    *,
    eta: float = 1.0,
    q: float | None = None,
    d: float | None = None,
) -> ParallelPlateGamma:
    """Coupling strength of the circuit picture, in several equivalent forms.

    ``exact``       m w^2 sqrt(C1 C2 / ((C1 + C)(C2 + C)))
    ``approximate`` m w^2 sqrt(C1 C2) / C, valid for C >> C1, C2
    ``charge_form`` Gamma^2 q^2 / (d^2 C); without ``q`` and ``d`` the equivalent
                    Gamma^2 m w^2 sqrt(C1 C2) / C is used
    ``corrected``   ``exact`` with C1, C2 replaced by eta C1, eta C2
    """
    mass = require_positive("mass", mass)
    omega = require_positive("omega", omega)
    c1_hyb = require_positive("c1_hyb", c1_hyb)
    c2_hyb = require_positive("c2_hyb", c2_hyb)
    c_total = require_positive("c_total", c_total)
    gamma_factor = require_positive("gamma_factor", gamma_factor)
    eta = _require_eta(eta)
    k = mass * omega**2

    # Square roots are taken per factor so that C1 C2 cannot underflow.
    exact = k * math.sqrt(c1_hyb / (c1_hyb + c_total)) * math.sqrt(c2_hyb / (c2_hyb + c_total))
    approximate = k * math.sqrt(c1_hyb) * math.sqrt(c2_hyb) / c_total
    if q is not None and d is not None:
        d = require_positive("d", d)
        charge_form = gamma_factor**2 * q**2 / (d**2 * c_total)
    else:
        charge_form = gamma_factor**2 * approximate
    c1_eta = eta * c1_hyb
    c2_eta = eta * c2_hyb
    corrected = k * math.sqrt(c1_eta / (c1_eta + c_total)) * math.sqrt(c2_eta / (c2_eta + c_total))
    return ParallelPlateGamma(
        exact=exact, approximate=approximate, charge_form=charge_form, corrected=corrected
    )


def plate_drive_current(
    mass: float,
    omega: float,
    area: float,
    v_z: float,
    q: float,
    constants: PhysicalConstants = CODATA,
) -> float:
    """Current that must charge two plates of area ``area`` to drive the ion at ``v_z``.

    Equal to 2 eps0 A m w^2 v_z / q.
    """
    mass = require_positive("mass", mass)
    omega = require_positive("omega", omega)
    area = require_positive("area", area)
    q = require_positive("q", abs(q))
    return 2.0 * constants.vacuum_permittivity * area * mass * omega**2 * v_z / q


def drive_currents(
    mass: float,
    omega: float,
    area: float,
    d: float,
    v_z: float,
    q: float,
    constants: PhysicalConstants = CODATA,
) -> DriveCurrents:
    return DriveCurrents(
        shockley=shockley_current(v_z, d, q),
        plate_drive=plate_drive_current(mass, omega, area, v_z, q, constants),
    )


def plate_drive_contradiction(
    mass: float,
    omega: float,
    area: float,
    d: float,
    constants: PhysicalConstants = CODATA,
) -> DriveContradiction:
    """Equate the Shockley current with the plate drive current and solve for e^2.

    The two currents agree only if e^2 = 2 eps0 A m w^2 d; ``equal`` reports
    whether that holds for the given inputs.
    """
    mass = require_positive("mass", mass)
    omega = require_positive("omega", omega)
    area = require_positive("area", area)
    d = require_positive("d", d)
    implied = 2.0 * constants.vacuum_permittivity * area * mass * omega**2 * d
    actual = constants.elementary_charge**2
    equal = math.isclose(implied, actual, rel_tol=CHARGE_MATCH_TOLERANCE)
    return DriveContradiction(implied_e_squared=implied, actual_e_squared=actual, equal=equal)


# --- per-configuration evaluation ---


def lumped_elements(
    ion: IonSpecies,
    trap: HarmonicTrap,
    plate_separation: float,
    eta: float = 1.0,
    oscillation_energy: float | None = None,
    constants: PhysicalConstants = CODATA,
) -> LumpedElements:
    """Both circuit mappings for one ion. Energy defaults to the ground state, hbar w / 2."""
    omega = trap.angular_frequency
    energy = (
        trap.ground_state_energy(constants) if oscillation_energy is None else oscillation_energy
    )
    c_hyb_a = method1_capacitance(energy, ion.charge_multiple, constants)
    l_hyb_a = method1_inductance(omega, c_hyb_a)
    c_hyb_b, l_hyb_b = method2_elements(
        ion.mass_kg, omega, plate_separation, ion.charge(constants)
    )
    return LumpedElements(
        c_hyb_a=c_hyb_a,
        l_hyb_a=l_hyb_a,
        c_hyb_b=c_hyb_b,
        l_hyb_b=l_hyb_b,
        eta=eta,
        c_hyb_b_actual=corrected_capacitance(c_hyb_b, eta),
        plate_separation=plate_separation,
        oscillation_energy=energy,
    )


def resolve_eta(config: CouplerConfig, zeta_value: float | None = None) -> float:
    """eta from the configuration: explicit value, zeta estimate, or 1 (no correction)."""
    settings = config.lumped
    if settings.eta is not None:
        return settings.eta
    if settings.eta_from_zeta:
        if zeta_value is None:
            from ioncoupler.linear import zeta

            zeta_value = zeta(config.capacitances, config.zeta_strategy)
        logger.info("estimating eta from zeta = %.6e", zeta_value)
        return eta_from_zeta(zeta_value)
    return 1.0


def lumped_model(config: CouplerConfig, zeta_value: float | None = None) -> LumpedModel:
    """Evaluate the lumped-element model for a validated configuration."""
    settings = config.lumped
    eta = resolve_eta(config, zeta_value)
    sep1 = settings.plate_separation1 or config.geometry.d_eq1
    sep2 = settings.plate_separation2 or config.geometry.d_eq2
    ion1 = lumped_elements(
        config.ion1, config.trap1, sep1, eta, settings.oscillation_energy, config.constants
    )
    ion2 = lumped_elements(
        config.ion2, config.trap2, sep2, eta, settings.oscillation_energy, config.constants
    )
    # The plate picture has a single m and w; ion 1 supplies them.
    gamma_plate = gamma_parallel_plate(
        config.ion1.mass_kg,
        config.trap1.angular_frequency,
        ion1.c_hyb_b,
        ion2.c_hyb_b,
        config.capacitances.total,
        settings.gamma_factor,
        eta=eta,
        q=config.charge1,
        d=sep1,
    )
    logger.debug(
        "lumped model: c_hyb_b=(%.6e, %.6e) gamma_plate=%.6e",
        ion1.c_hyb_b,
        ion2.c_hyb_b,
        gamma_plate.exact,
    )
    return LumpedModel(
        ion1=ion1, ion2=ion2, gamma_plate=gamma_plate, gamma_factor=settings.gamma_factor
    )
