"""Linear-element coupling model.

The coupling between the two ions is the product of three linear responses:

* ``a12``  ion 1 displacement -> charge induced on the near disk (C/m),
* ``zeta`` charge entering the floating conductor -> charge on the far disk,
* ``a34``  far-disk charge -> axial force on ion 2 (N/C).

Their product ``gamma`` (N/m) does not depend on the ions' mass or trap frequency.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

from ioncoupler.core import (
    CODATA,
    PhysicalConstants,
    SelfCapacitances,
    require_non_negative,
    require_positive,
)
from ioncoupler.errors import UnsupportedConfigurationError, ValidationError

if TYPE_CHECKING:
    from ioncoupler.config import CouplerConfig

logger = logging.getLogger(__name__)

# Displacements above this fraction of d_eq1 leave the first-order regime.
LINEAR_RESPONSE_LIMIT = 0.1

DEFAULT_ZETA_STRATEGY = "far-disk-fraction"

ZetaStrategy = Callable[[SelfCapacitances], float]

ZETA_STRATEGIES: dict[str, ZetaStrategy] = {}


def register_zeta_strategy(name: str) -> Callable[[ZetaStrategy], ZetaStrategy]:
    """Register a capacitance-ratio formula for zeta under ``name``."""

    def decorator(func: ZetaStrategy) -> ZetaStrategy:
        if name in ZETA_STRATEGIES:
            raise ValueError(f"zeta strategy {name!r} is already registered")
        ZETA_STRATEGIES[name] = func
        return func

    return decorator


@register_zeta_strategy(DEFAULT_ZETA_STRATEGY)
def far_disk_fraction(capacitances: SelfCapacitances) -> float:
    """Share of the entering charge that settles on the far disk."""
    return capacitances.c_disk2 / capacitances.total


@dataclass(frozen=True)
class LinearElements:
    """Outputs of the linear-element model, SI units."""

    a12: float
    zeta: float
    a34: float
    gamma: float
    rabi_g: float
    t_swap: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.zeta <= 1.0:
            raise ValidationError(f"zeta must lie in [0, 1], got {self.zeta!r}")
        product = self.a12 * self.zeta * self.a34
        if not math.isclose(self.gamma, product, rel_tol=1e-12):
            raise ValidationError(
                f"gamma {self.gamma!r} is not a12 * zeta * a34 = {product!r}"
            )


@dataclass(frozen=True)
class InducedChargeResponse:
    """Charge response of the conductor to a small ion-1 displacement ``z``.

    ``z`` is positive toward the near disk. ``q_temp`` and ``q_c`` are the
    magnitudes of the charge imbalance (positive for positive ``q1`` and ``z``);
    the physical charges have the opposite sign to ``q1``.
    """

    q_temp: float
    q_c: float
    displacement: float
    beyond_linear_regime: bool = False

    @property
    def near_disk_charge(self) -> float:
        return -self.q_temp

    @property
    def far_disk_charge(self) -> float:
        return -self.q_c


class RabiCoupling(NamedTuple):
    g: float
    t_swap: float


class DirectionalGammas(NamedTuple):
    forward: float  # ion 1 drives ion 2
    backward: float  # ion 2 drives ion 1

    @property
    def asymmetric(self) -> bool:
        return not math.isclose(self.forward, self.backward, rel_tol=1e-12)


# --- linear elements ---


def a12(q1: float, r1: float, d_eq1: float) -> float:
    """Induced-charge response of the near disk: q1 r1^2 / (r1^2 + d_eq1^2)^(3/2)."""
    r1 = require_positive("r1", r1)
    d_eq1 = require_positive("d_eq1", d_eq1)
    return q1 * r1**2 / (r1**2 + d_eq1**2) ** 1.5


def zeta(capacitances: SelfCapacitances, strategy: str = DEFAULT_ZETA_STRATEGY) -> float:
    if capacitances.total <= 0.0:
        raise ValidationError("total self-capacitance must be positive to compute zeta")
    try:
        formula = ZETA_STRATEGIES[strategy]
    except KeyError:
        known = ", ".join(sorted(ZETA_STRATEGIES))
        raise ValidationError(f"unknown zeta strategy {strategy!r} (known: {known})") from None
    value = formula(capacitances)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"zeta strategy {strategy!r} returned {value!r}, outside [0, 1]")
    return value


def ring_field(
    q_c: float, r2: float, d_eq2: float, constants: PhysicalConstants = CODATA
) -> float:
    """Axial field of a charged ring of radius r2 at height d_eq2 on its axis."""
    r2 = require_positive("r2", r2)
    d_eq2 = require_positive("d_eq2", d_eq2)
    return constants.coulomb_constant * q_c * d_eq2 / (d_eq2**2 + r2**2) ** 1.5


def a34(q2: float, r2: float, d_eq2: float, constants: PhysicalConstants = CODATA) -> float:
    """Force on ion 2 per unit charge on the far disk."""
    return ring_field(q2, r2, d_eq2, constants)


def gamma(a12_value: float, zeta_value: float, a34_value: float) -> float:
    return a12_value * zeta_value * a34_value


def gamma_expanded(
    q1: float,
    q2: float,
    r1: float,
    r2: float,
    d_eq1: float,
    d_eq2: float,
    zeta_value: float,
    constants: PhysicalConstants = CODATA,
) -> float:
    """gamma written out as a single expression rather than a product of elements."""
    r1 = require_positive("r1", r1)
    r2 = require_positive("r2", r2)
    d_eq1 = require_positive("d_eq1", d_eq1)
    d_eq2 = require_positive("d_eq2", d_eq2)
    return (
        q1
        * q2
        * zeta_value
        * r1**2
        * d_eq2
        / (
            4.0
            * math.pi
            * constants.vacuum_permittivity
            * (r1**2 + d_eq1**2) ** 1.5
            * (r2**2 + d_eq2**2) ** 1.5
        )
    )


def rabi_coupling(
    gamma_value: float,
    mass: float,
    omega: float,
    omega2: float | None = None,
) -> RabiCoupling:
    """g = gamma / (2 m w) and the swap time pi / (2 g).

    Only defined for equal trap frequencies; pass ``omega2`` to have that checked.
    """
    mass = require_positive("mass", mass)
    omega = require_positive("omega", omega)
    if omega2 is not None and not math.isclose(omega, omega2, rel_tol=1e-12):
        raise UnsupportedConfigurationError(
            f"Rabi coupling needs equal trap frequencies, got {omega!r} and {omega2!r} rad/s"
        )
    g = gamma_value / (2.0 * mass * omega)
    t_swap = math.pi / (2.0 * abs(g)) if g != 0.0 else math.inf
    return RabiCoupling(g=g, t_swap=t_swap)


def linear_elements(config: CouplerConfig) -> LinearElements:
    """Evaluate the full linear-element model for a validated configuration."""
    geometry = config.geometry
    if not math.isclose(config.ion1.mass_kg, config.ion2.mass_kg, rel_tol=1e-12):
        raise UnsupportedConfigurationError(
            "Rabi coupling needs identical ion masses, got "
            f"{config.ion1.mass_kg!r} and {config.ion2.mass_kg!r} kg"
        )
    q1 = config.charge1
    q2 = config.charge2
    a12_value = a12(q1, geometry.r1, geometry.d_eq1)
    zeta_value = zeta(config.capacitances, config.zeta_strategy)
    a34_value = a34(q2, geometry.r2, geometry.d_eq2, config.constants)
    gamma_value = gamma(a12_value, zeta_value, a34_value)
    rabi = rabi_coupling(
        gamma_value,
        config.ion1.mass_kg,
        config.trap1.angular_frequency,
        config.trap2.angular_frequency,
    )
    logger.debug(
        "linear elements: a12=%.6e zeta=%.6e a34=%.6e gamma=%.6e",
        a12_value,
        zeta_value,
        a34_value,
        gamma_value,
    )
    return LinearElements(
        a12=a12_value,
        zeta=zeta_value,
        a34=a34_value,
        gamma=gamma_value,
        rabi_g=rabi.g,
        t_swap=rabi.t_swap,
    )


def directional_gammas(config: CouplerConfig) -> DirectionalGammas:
    """gamma for ion 1 driving ion 2 and for the reverse direction."""
    geometry = config.geometry
    caps = config.capacitances
    forward = gamma(
        a12(config.charge1, geometry.r1, geometry.d_eq1),
        zeta(caps, config.zeta_strategy),
        a34(config.charge2, geometry.r2, geometry.d_eq2, config.constants),
    )
    backward = gamma(
        a12(config.charge2, geometry.r2, geometry.d_eq2),
        zeta(caps.reversed(), config.zeta_strategy),
        a34(config.charge1, geometry.r1, geometry.d_eq1, config.constants),
    )
    return DirectionalGammas(forward=forward, backward=backward)


# --- charge bookkeeping on the floating conductor ---


def induced_charge_response(config: CouplerConfig, z: float) -> InducedChargeResponse:
    geometry = config.geometry
    if not math.isfinite(z):
        raise ValidationError(f"displacement must be finite, got {z!r}")
    q_temp = a12(config.charge1, geometry.r1, geometry.d_eq1) * z
    q_c = zeta(config.capacitances, config.zeta_strategy) * q_temp
    beyond = abs(z) > LINEAR_RESPONSE_LIMIT * geometry.d_eq1
    if beyond:
        logger.warning(
            "displacement %.3e m exceeds %.0f%% of d_eq1 (%.3e m); linear response is approximate",
            z,
            100 * LINEAR_RESPONSE_LIMIT,
            geometry.d_eq1,
        )
    return InducedChargeResponse(
        q_temp=q_temp, q_c=q_c, displacement=z, beyond_linear_regime=beyond
    )


def induced_charge_distribution(
    charge: float, capacitances: SelfCapacitances
) -> tuple[float, float, float]:
    """Split a charge over (disk1, wire, disk2) in proportion to self-capacitance."""
    total = capacitances.total
    if total <= 0.0:
        raise ValidationError("total self-capacitance must be positive")
    return (
        charge * capacitances.c_disk1 / total,
        charge * capacitances.c_wire / total,
        charge * capacitances.c_disk2 / total,
    )


def stored_energy(charges: Sequence[float], capacitances: Sequence[float]) -> float:
    """Electrostatic energy sum Q^2 / (2 C) over the conductor pieces."""
    if len(charges) != len(capacitances):
        raise ValidationError(
            f"got {len(charges)} charges for {len(capacitances)} capacitances"
        )
    energy = 0.0
    for index, (charge, capacitance) in enumerate(zip(charges, capacitances, strict=True)):
        capacitance = require_non_negative(f"capacitances[{index}]", capacitance)
        if capacitance == 0.0:
            if charge != 0.0:
                raise ValidationError(f"charge on zero capacitance at index {index}")
            continue
        energy += charge**2 / (2.0 * capacitance)
    return energy


def equivalent_capacitance(zeta_value: float) -> float:
    """1/zeta, the value obtained by reading the charge ratio as a capacitance."""
    if not 0.0 < zeta_value <= 1.0:
        raise ValidationError(f"zeta must lie in (0, 1], got {zeta_value!r}")
    return 1.0 / zeta_value
