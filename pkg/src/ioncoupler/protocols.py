"""Data reduction for the three isolated-element measurements.

Each linear element can be measured on its own:

1. displace ion 1 by ``z`` next to a grounded disk and integrate the current
   that flows to it, giving A12 = |Q| / |z|;
2. put a known charge on the floating conductor and measure how much drains
   off the far disk, giving zeta = drained / supplied;
3. put a known charge on the far disk and measure how far ion 2 moves, giving
   A34 = m w^2 z / Q_c.

``synthetic_bench`` produces the readings these experiments would return
under the model, so the reductions can be checked end to end.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

from ioncoupler.core import require_positive
from ioncoupler.errors import ValidationError
from ioncoupler.linear import ring_field, zeta
from ioncoupler.oracle import induced_charge_plane_window

if TYPE_CHECKING:
    from ioncoupler.config import CouplerConfig

logger = logging.getLogger(__name__)


class RecoveredElements(NamedTuple):
    a12: float
    zeta: float
    a34: float


@dataclass(frozen=True)
class BenchReadings:
    displacement: float  # m, ion 1 toward disk 1
    integrated_charge: float  # C, flowed to the grounded near disk
    charge_in: float  # C, supplied to the floating conductor
    charge_drained: float  # C, drained off the far disk
    far_disk_charge: float  # C, placed on disk 2 for the force measurement
    response_displacement: float  # m, ion 2 toward disk 2


def a12_from_displacement(z: float, integrated_charge: float) -> float:
    if z == 0.0:
        raise ValidationError("displacement must be non-zero")
    return abs(integrated_charge) / abs(z)


def zeta_from_drainage(charge_in: float, charge_drained: float) -> float:
    if charge_in == 0.0:
        raise ValidationError("supplied charge must be non-zero")
    ratio = charge_drained / charge_in
    if not 0.0 <= ratio <= 1.0:
        raise ValidationError(f"drained/supplied ratio {ratio!r} lies outside [0, 1]")
    return ratio


def a34_from_response(q_c: float, displacement: float, mass: float, omega: float) -> float:
    """Force per unit far-disk charge from the static displacement of ion 2."""
    if q_c == 0.0:
        raise ValidationError("far-disk charge must be non-zero")
    mass = require_positive("mass", mass)
    omega = require_positive("omega", omega)
    return mass * omega**2 * abs(displacement) / abs(q_c)


def synthetic_bench(config: CouplerConfig, z: float, v_supply: float = 1.0) -> BenchReadings:
    """Readings the three measurements would give, computed from first principles.

    The induced charge uses the finite displacement (not its linearisation), so
    the recovered A12 carries the next-order error in z / d_eq1.
    """
    geometry = config.geometry
    if z == 0.0:
        raise ValidationError("displacement must be non-zero")
    if abs(z) >= geometry.d_eq1:
        raise ValidationError("displacement must be smaller than d_eq1")
    q1 = config.charge1
    before = induced_charge_plane_window(q1, geometry.d_eq1, geometry.r1)
    after = induced_charge_plane_window(q1, geometry.d_eq1 - z, geometry.r1)
    integrated = after - before

    caps = config.capacitances
    charge_in = caps.total * v_supply
    drained = zeta(caps, config.zeta_strategy) * charge_in

    force = config.charge2 * ring_field(drained, geometry.r2, geometry.d_eq2, config.constants)
    response = force / config.spring_constant2
    logger.debug(
        "bench: dQ=%.6e C, drained %.6e of %.6e C, response %.6e m",
        integrated,
        drained,
        charge_in,
        response,
    )
    return BenchReadings(
        displacement=z,
        integrated_charge=integrated,
        charge_in=charge_in,
        charge_drained=drained,
        far_disk_charge=drained,
        response_displacement=response,
    )


def reduce_bench(readings: BenchReadings, mass: float, omega: float) -> RecoveredElements:
    return RecoveredElements(
        a12=a12_from_displacement(readings.displacement, readings.integrated_charge),
        zeta=zeta_from_drainage(readings.charge_in, readings.charge_drained),
        a34=a34_from_response(
            readings.far_disk_charge, readings.response_displacement, mass, omega
        ),
    )
