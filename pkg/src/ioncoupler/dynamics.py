"""Two classical harmonic oscillators coupled through H_c = gamma x1 x2.

Integrates the equations of motion with a symplectic scheme and measures how
long it takes the energy of oscillator 1 to move over to oscillator 2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Literal, NamedTuple

import numpy as np
from numpy.typing import NDArray

from ioncoupler.core import require_positive
from ioncoupler.errors import NumericalError, UnsupportedConfigurationError, ValidationError

if TYPE_CHECKING:
    from ioncoupler.config import CouplerConfig

logger = logging.getLogger(__name__)

Method = Literal["verlet", "verlet4"]

MAX_STEP_FRACTION = 1e-2  # dt <= T_fast / 100
STRONG_COUPLING_FRACTION = 0.1
ENVELOPE_MIN_DEPTH = 1e-3

_CBRT2 = 2.0 ** (1.0 / 3.0)
# Fourth-order symmetric composition of three velocity-Verlet substeps.
_YOSHIDA_OUTER = 1.0 / (2.0 - _CBRT2)
_YOSHIDA_INNER = -_CBRT2 / (2.0 - _CBRT2)

_SUBSTEPS: dict[str, tuple[float, ...]] = {
    "verlet": (1.0,),
    "verlet4": (_YOSHIDA_OUTER, _YOSHIDA_INNER, _YOSHIDA_OUTER),
}

TRAJECTORY_COLUMNS = ("t_s", "x1_m", "v1_mps", "x2_m", "v2_mps", "e1_j", "e2_j", "etot_j")


@dataclass(frozen=True)
class OscillatorState:
    x1: float = 0.0
    v1: float = 0.0
    x2: float = 0.0
    v2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x1", "v1", "x2", "v2"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"initial {name} must be finite")

    def reversed(self) -> OscillatorState:
        """Same positions, velocities flipped."""
        return OscillatorState(self.x1, -self.v1, self.x2, -self.v2)


@dataclass(frozen=True)
class CoupledOscillatorSystem:
    """H = p1^2/2m1 + p2^2/2m2 + k1 x1^2/2 + k2 x2^2/2 + gamma x1 x2.

    A positive ``gamma`` pushes the oscillators apart; the exchange time only
    depends on ``|gamma|``.
    """

    m1: float
    m2: float
    k1: float
    k2: float
    gamma: float
    state: OscillatorState = field(default_factory=OscillatorState)

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "k1", "k2"):
            require_positive(name, getattr(self, name))
        if not math.isfinite(self.gamma):
            raise ValidationError(f"gamma must be finite, got {self.gamma!r}")
        k_min = min(self.k1, self.k2)
        if abs(self.gamma) >= k_min:
            raise ValidationError(
                f"|gamma| = {abs(self.gamma):.3e} N/m must be below min(k1, k2) = {k_min:.3e} N/m"
            )
        if abs(self.gamma) > STRONG_COUPLING_FRACTION * k_min:
            logger.warning(
                "|gamma|/min(k) = %.3g exceeds %.1f; weak-coupling results are approximate",
                abs(self.gamma) / k_min,
                STRONG_COUPLING_FRACTION,
            )

    def with_state(self, state: OscillatorState) -> CoupledOscillatorSystem:
        return replace(self, state=state)

    @property
    def dynamical_matrix(self) -> NDArray[np.float64]:
        return np.array(
            [
                [self.k1 / self.m1, self.gamma / self.m1],
                [self.gamma / self.m2, self.k2 / self.m2],
            ]
        )

    @property
    def fastest_frequency(self) -> float:
        eigenvalues = np.linalg.eigvals(self.dynamical_matrix).real
        return math.sqrt(float(eigenvalues.max()))

    @property
    def fast_period(self) -> float:
        return 2.0 * math.pi / self.fastest_frequency

    def energies(self, x1: float, v1: float, x2: float, v2: float) -> tuple[float, float]:
        """Per-oscillator energies; the coupling energy is shared equally."""
        coupling = 0.5 * self.gamma * x1 * x2
        e1 = 0.5 * self.m1 * v1 * v1 + 0.5 * self.k1 * x1 * x1 + coupling
        e2 = 0.5 * self.m2 * v2 * v2 + 0.5 * self.k2 * x2 * x2 + coupling
        return e1, e2

    def total_energy(self, state: OscillatorState | None = None) -> float:
        s = state or self.state
        return sum(self.energies(s.x1, s.v1, s.x2, s.v2))


class NormalModes(NamedTuple):
    omega_plus: float
    omega_minus: float
    splitting: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    dt: float
    method: str
    fast_frequency: float  # rad/s, fastest normal mode of the simulated system
    t: NDArray[np.float64]
    x1: NDArray[np.float64]
    v1: NDArray[np.float64]
    x2: NDArray[np.float64]
    v2: NDArray[np.float64]
    e1: NDArray[np.float64]
    e2: NDArray[np.float64]

    @property
    def e_total(self) -> NDArray[np.float64]:
        return self.e1 + self.e2

    @property
    def sample_interval(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else self.dt

    @property
    def relative_energy_drift(self) -> float:
        """max |E(t) - E(0)| / E(0)."""
        e_total = self.e_total
        return float(np.max(np.abs(e_total - e_total[0])) / abs(e_total[0]))

    @property
    def final_state(self) -> OscillatorState:
        return OscillatorState(
            float(self.x1[-1]), float(self.v1[-1]), float(self.x2[-1]), float(self.v2[-1])
        )

    def rows(self):
        """(t, x1, v1, x2, v2, e1, e2, e_total) tuples in TRAJECTORY_COLUMNS order."""
        columns = (self.t, self.x1, self.v1, self.x2, self.v2, self.e1, self.e2, self.e_total)
        return zip(*(c.tolist() for c in columns), strict=True)


def normal_modes(system: CoupledOscillatorSystem) -> NormalModes:
    """Symmetric and antisymmetric mode frequencies of an equal-oscillator pair."""
    if not (
        math.isclose(system.m1, system.m2, rel_tol=1e-12)
        and math.isclose(system.k1, system.k2, rel_tol=1e-12)
    ):
        raise UnsupportedConfigurationError(
            "normal-mode analysis needs equal masses and spring constants"
        )
    plus = math.sqrt((system.k1 + system.gamma) / system.m1)
    minus = math.sqrt((system.k1 - system.gamma) / system.m1)
    return NormalModes(omega_plus=plus, omega_minus=minus, splitting=plus - minus)


def simulate(
    system: CoupledOscillatorSystem,
    duration: float,
    dt: float,
    method: Method = "verlet4",
    record_every: int = 1,
) -> Trajectory:
    """Integrate from ``system.state`` for ``duration`` seconds with step ``dt``.

    ``verlet`` is plain velocity Verlet (second order); ``verlet4`` composes three
    Verlet substeps into a fourth-order symmetric step. Both are symplectic and
    time-reversible.
    """
    duration = require_positive("duration", duration)
    dt = require_positive("dt", dt)
    if record_every < 1:
        raise ValidationError(f"record_every must be >= 1, got {record_every}")
    try:
        weights = _SUBSTEPS[method]
    except KeyError:
        raise ValidationError(
            f"unknown integrator {method!r} (known: {', '.join(_SUBSTEPS)})"
        ) from None
    limit = MAX_STEP_FRACTION * system.fast_period
    if dt > limit * (1.0 + 1e-12):
        raise ValidationError(
            f"dt = {dt:.3e} s exceeds T_fast/100 = {limit:.3e} s for this system"
        )

    n_steps = step_count(duration, dt)
    n_records = n_steps // record_every + 1
    t = np.empty(n_records)
    out = np.empty((4, n_records))
    energies = np.empty((2, n_records))

    def record(index: int, step: int, x1: float, v1: float, x2: float, v2: float) -> None:
        if not all(math.isfinite(value) for value in (x1, v1, x2, v2)):
            raise NumericalError("state became non-finite", f"at step {step}")
        t[index] = step * dt
        out[:, index] = (x1, v1, x2, v2)
        energies[:, index] = system.energies(x1, v1, x2, v2)

    m1, m2, k1, k2, g = system.m1, system.m2, system.k1, system.k2, system.gamma
    x1, v1, x2, v2 = system.state.x1, system.state.v1, system.state.x2, system.state.v2
    subs = [w * dt for w in weights]

    record(0, 0, x1, v1, x2, v2)
    a1 = -(k1 * x1 + g * x2) / m1
    a2 = -(k2 * x2 + g * x1) / m2
    index = 1
    for step in range(1, n_steps + 1):
        for h in subs:
            v1 += 0.5 * h * a1
            v2 += 0.5 * h * a2
            x1 += h * v1
            x2 += h * v2
            a1 = -(k1 * x1 + g * x2) / m1
            a2 = -(k2 * x2 + g * x1) / m2
            v1 += 0.5 * h * a1
            v2 += 0.5 * h * a2
        if step % record_every == 0:
            record(index, step, x1, v1, x2, v2)
            index += 1

    logger.debug("simulated %d %s steps of %.3e s", n_steps, method, dt)
    return Trajectory(
        dt=dt,
        method=method,
        fast_frequency=system.fastest_frequency,
        t=t[:index],
        x1=out[0, :index],
        v1=out[1, :index],
        x2=out[2, :index],
        v2=out[3, :index],
        e1=energies[0, :index],
        e2=energies[1, :index],
    )


def energy_envelope(trajectory: Trajectory) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Upper envelope of E1: the maximum over blocks of half a fast period.

    Returns the times at which each block maximum occurs and the maxima.
    """
    e1 = trajectory.e1
    block = max(1, round((math.pi / trajectory.fast_frequency) / trajectory.sample_interval))
    n_blocks = len(e1) // block
    if n_blocks < 3:
        raise NumericalError(
            "trajectory too short to form an energy envelope",
            "increase the duration",
        )
    blocks = e1[: n_blocks * block].reshape(n_blocks, block)
    peaks = blocks.argmax(axis=1)
    offsets = np.arange(n_blocks) * block + peaks
    return trajectory.t[offsets], blocks[np.arange(n_blocks), peaks]


def step_count(duration: float, dt: float) -> int:
    return max(1, math.ceil(duration / dt - 1e-9))


def exchange_time(trajectory: Trajectory) -> float:
    """Time of the first minimum of the E1 envelope.

    The minimum is refined by a parabola through the envelope point at the
    minimum and its two neighbours.
    """
    times, envelope = energy_envelope(trajectory)
    running_max = np.maximum.accumulate(envelope)
    for j in range(1, len(envelope) - 1):
        if envelope[j] > envelope[j - 1] or envelope[j] >= envelope[j + 1]:
            continue
        depth = (running_max[j] - envelope[j]) / running_max[j]
        if depth <= ENVELOPE_MIN_DEPTH:
            continue
        offsets = times[j - 1 : j + 2] - times[j]
        a, b, _ = np.polyfit(offsets, envelope[j - 1 : j + 2], 2)
        if a <= 0.0:
            return float(times[j])
        return float(times[j] - b / (2.0 * a))
    raise NumericalError(
        "no minimum found in the oscillator-1 energy envelope",
        f"simulated {trajectory.t[-1]:.3e} s; try a longer duration or stronger coupling",
    )


def time_reversal_residual(
    system: CoupledOscillatorSystem,
    duration: float,
    dt: float,
    method: Method = "verlet4",
) -> float:
    """Integrate forward, flip velocities, integrate back; relative distance to the start.

    Distances are measured in the energy norm sum(k x^2 + m v^2).
    """
    n_steps = step_count(duration, dt)
    forward = simulate(system, duration, dt, method, record_every=n_steps)
    back = simulate(
        system.with_state(forward.final_state.reversed()),
        duration,
        dt,
        method,
        record_every=n_steps,
    )
    end = back.final_state.reversed()
    start = system.state
    num = (
        system.k1 * (end.x1 - start.x1) ** 2
        + system.m1 * (end.v1 - start.v1) ** 2
        + system.k2 * (end.x2 - start.x2) ** 2
        + system.m2 * (end.v2 - start.v2) ** 2
    )
    den = (
        system.k1 * start.x1**2
        + system.m1 * start.v1**2
        + system.k2 * start.x2**2
        + system.m2 * start.v2**2
    )
    if den == 0.0:
        raise ValidationError("time-reversal check needs a non-zero initial state")
    return math.sqrt(num / den)


def system_from_config(
    config: CouplerConfig,
    coupling_ratio: float | None = None,
    amplitude: float | None = None,
) -> CoupledOscillatorSystem:
    """Oscillator pair for a configuration, ion 1 displaced and both at rest.

    With ``coupling_ratio`` the coupling is ``ratio * min(k1, k2)`` instead of the
    linear-model gamma, which makes the exchange short enough to simulate.
    """
    k1 = config.spring_constant1
    k2 = config.spring_constant2
    if coupling_ratio is None:
        from ioncoupler.linear import linear_elements

        gamma = linear_elements(config).gamma
    else:
        gamma = coupling_ratio * min(k1, k2)
    if amplitude is None:
        amplitude = 0.01 * config.geometry.d_eq1
    return CoupledOscillatorSystem(
        m1=config.ion1.mass_kg,
        m2=config.ion2.mass_kg,
        k1=k1,
        k2=k2,
        gamma=gamma,
        state=OscillatorState(x1=amplitude),
    )
