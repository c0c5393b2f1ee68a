"""Independent induced-charge calculators used to check the linear model.

Three references for the charge induced by a point charge ``q`` at height ``d``
above the centre of a grounded conductor:

* the infinite grounded plane's image density integrated over a window of radius ``r``,
* the exact result for a finite grounded disk, ``-(2 q / pi) arctan(r / d)``,
* an axisymmetric boundary-element solve on annular rings (``induced_charge_bem``).

The BEM works in units of ``d`` with ``q = 1`` and the Coulomb constant factored
out, so the solve and its tolerances are scale free.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, special

from ioncoupler.core import require_positive
from ioncoupler.errors import NumericalError, ValidationError

logger = logging.getLogger(__name__)

Method = Literal["analytic-plane", "exact-disk", "bem-disk"]
Formulation = Literal["split", "direct"]

MIN_RINGS = 16
MAX_CONDITION = 1e12
MAX_RESIDUAL = 1e-10
DEFAULT_STEP_FRACTION = 1e-5
MAX_STEP_FRACTION = 1e-3
GRADING_RATIO = 1.15
MAX_GRADED_RINGS = 32
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True, eq=False)
class BemMesh:
    """Annular-ring discretisation of the disk and the solved surface density."""

    n_rings: int
    edges: NDArray[np.float64]  # m, from 0 to the disk radius
    collocation: NDArray[np.float64]  # m, ring area centroids
    density: NDArray[np.float64]  # C/m^2 per ring
    condition: float
    residual: float

    def __post_init__(self) -> None:
        if len(self.edges) != self.n_rings + 1:
            raise ValidationError("ring edges do not match n_rings")
        if not np.all(np.diff(self.edges) > 0.0):
            raise ValidationError("ring edges must be strictly increasing")
        if not np.all(np.isfinite(self.density)):
            raise NumericalError("surface density is not finite on every ring")

    @property
    def areas(self) -> NDArray[np.float64]:
        return np.pi * (self.edges[1:] ** 2 - self.edges[:-1] ** 2)


class BemResult(NamedTuple):
    total_charge: float
    mesh: BemMesh


@dataclass(frozen=True)
class InducedChargeCurve:
    samples: tuple[tuple[float, float], ...]  # (height m, induced charge C)
    source_charge: float
    window_radius: float
    method: Method

    @property
    def heights(self) -> list[float]:
        return [d for d, _ in self.samples]

    @property
    def charges(self) -> list[float]:
        return [q for _, q in self.samples]

    @property
    def is_monotone(self) -> bool:
        """|Q| strictly decreasing with height."""
        ordered = sorted(self.samples)
        mags = [abs(q) for _, q in ordered]
        return all(a > b for a, b in zip(mags, mags[1:]))


class OracleRow(NamedTuple):
    d_m: float
    r_m: float
    q_c: float
    q_analytic_c: float
    q_bem_c: float
    rel_diff: float


# --- closed forms ---


def induced_charge_plane_window(q: float, d: float, r: float) -> float:
    """Image-charge density of an infinite grounded plane integrated over radius ``r``.

    -q (1 - d / sqrt(d^2 + r^2)), evaluated without cancellation for r << d.
    """
    d = require_positive("d", d)
    r = require_positive("r", r)
    s = math.hypot(d, r)
    return -q * r**2 / (s * (s + d))


def induced_charge_disk_exact(q: float, d: float, r: float) -> float:
    """Total charge induced on a grounded disk of radius ``r`` by ``q`` on its axis."""
    d = require_positive("d", d)
    r = require_positive("r", r)
    return -2.0 * q / math.pi * math.atan2(r, d)


def a12_numeric(q: float, d_eq: float, r: float, step: float | None = None) -> float:
    """Central difference of the window charge with respect to height."""
    d_eq = require_positive("d_eq", d_eq)
    if step is None:
        step = DEFAULT_STEP_FRACTION * d_eq
    step = require_positive("step", step)
    if step > MAX_STEP_FRACTION * d_eq:
        raise ValidationError(
            f"step {step!r} m exceeds {MAX_STEP_FRACTION:g} of d_eq ({d_eq!r} m)"
        )
    below = induced_charge_plane_window(q, d_eq - step, r)
    above = induced_charge_plane_window(q, d_eq + step, r)
    return abs(below - above) / (2.0 * step)


# --- boundary elements ---


def graded_ring_edges(
    radius: float,
    n_rings: int,
    ratio: float = GRADING_RATIO,
    max_graded: int = MAX_GRADED_RINGS,
) -> NDArray[np.float64]:
    """Ring edges: uniform in the interior, geometrically shrinking toward the rim."""
    n_graded = min(n_rings // 4, max_graded)
    n_uniform = n_rings - n_graded
    shrink = 1.0 / ratio ** np.arange(n_graded)
    width = radius / (n_uniform + shrink.sum())
    widths = np.concatenate([np.full(n_uniform, width), width * shrink])
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    edges[-1] = radius
    return edges


def area_centroids(edges: NDArray[np.float64]) -> NDArray[np.float64]:
    inner, outer = edges[:-1], edges[1:]
    return (2.0 / 3.0) * (outer**3 - inner**3) / (outer**2 - inner**2)


def _ring_kernel(rho: float | NDArray, rho_src: float | NDArray) -> NDArray:
    """Azimuthal integral of 1/|x - x'| times rho': 4 rho' K(m) / (rho + rho').

    ``ellipkm1`` takes 1 - m = ((rho - rho') / (rho + rho'))^2 directly.
    """
    total = rho + rho_src
    return 4.0 * rho_src * special.ellipkm1(((rho - rho_src) / total) ** 2) / total


def _quad(func, lo: float, hi: float) -> float:
    value, _ = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
    return float(value)


def _self_term(rho: float, inner: float, outer: float) -> float:
    """Potential of a unit-density ring at a point inside it; log-singular at rho."""

    def f(x: float) -> float:
        return float(_ring_kernel(rho, x))

    return _quad(f, inner, rho) + _quad(f, rho, outer)


def _ring_potential(rho: float, inner: float, outer: float) -> float:
    """Potential of a unit-density ring at a point outside it, adaptive quadrature."""

    def f(x: float) -> float:
        return float(_ring_kernel(rho, x))

    return _quad(f, inner, outer)


def assemble_potential_matrix(
    edges: NDArray[np.float64], collocation: NDArray[np.float64]
) -> NDArray[np.float64]:
    """P[i, j]: potential at collocation radius i from unit density on ring j.

    The diagonal and the two neighbouring rings, where the logarithmic kernel
    singularity sits at or next to an endpoint, use adaptive quadrature at
    ``QUAD_EPSREL``. Farther rings use a 16-point Gauss-Legendre rule; there the
    kernel is smooth over the ring and the rule agrees with adaptive quadrature
    to about 1e-14 relative.
    """
    inner, outer = edges[:-1], edges[1:]
    half = 0.5 * (outer - inner)
    mid = 0.5 * (outer + inner)
    nodes = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    weights = half[:, None] * _GAUSS_WEIGHTS[None, :]
    n = len(collocation)
    matrix = np.empty((n, n))
    for i, rho in enumerate(collocation):
        matrix[i] = (_ring_kernel(rho, nodes) * weights).sum(axis=1)
        for j in (i - 1, i + 1):
            if 0 <= j < n:
                matrix[i, j] = _ring_potential(float(rho), float(inner[j]), float(outer[j]))
        matrix[i, i] = _self_term(float(rho), float(inner[i]), float(outer[i]))
    return matrix


def _plane_density(rho: float | NDArray) -> NDArray:
    """Image density of the infinite plane for q = 1 at height 1."""
    return -1.0 / (2.0 * np.pi * (rho**2 + 1.0) ** 1.5)


def _outside_potential(rho: float, radius: float) -> float:
    """Potential at rho < radius from the plane's image density beyond ``radius``."""

    def f(x: float) -> float:
        return float(_plane_density(x) * _ring_kernel(rho, x))

    return _quad(f, radius, 2.0 * radius) + _quad(f, 2.0 * radius, math.inf)


def induced_charge_bem(
    q: float,
    d: float,
    disk_radius: float,
    n_rings: int = 256,
    formulation: Formulation = "split",
) -> BemResult:
    """Total charge induced on a grounded zero-thickness disk by ``q`` on its axis.

    ``split`` solves only for the difference between the finite-disk density and
    the infinite plane's image density; ``direct`` solves for the full density
    with the point-charge potential on the right-hand side.
    """
    d = require_positive("d", d)
    disk_radius = require_positive("disk_radius", disk_radius)
    if n_rings < MIN_RINGS:
        raise ValidationError(f"n_rings must be >= {MIN_RINGS}, got {n_rings}")
    if formulation not in ("split", "direct"):
        raise ValidationError(f"unknown BEM formulation {formulation!r}")

    radius = disk_radius / d
    edges = graded_ring_edges(radius, n_rings)
    collocation = area_centroids(edges)
    areas = np.pi * (edges[1:] ** 2 - edges[:-1] ** 2)

    if q == 0.0:
        mesh = BemMesh(
            n_rings=n_rings,
            edges=edges * d,
            collocation=collocation * d,
            density=np.zeros(n_rings),
            condition=math.nan,
            residual=0.0,
        )
        return BemResult(0.0, mesh)

    matrix = assemble_potential_matrix(edges, collocation)
    condition = float(np.linalg.cond(matrix))
    if not math.isfinite(condition) or condition > MAX_CONDITION:
        raise NumericalError(
            "BEM potential matrix is ill-conditioned", f"condition estimate {condition:.3e}"
        )

    if formulation == "split":
        rhs = np.array([_outside_potential(float(rho), radius) for rho in collocation])
    else:
        rhs = -1.0 / np.sqrt(collocation**2 + 1.0)
    try:
        solved = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as e:
        raise NumericalError("BEM solve failed", f"condition estimate {condition:.3e}") from e

    # Source potential scale q / (4 pi eps0 d) is 1 in these units.
    residual = float(np.max(np.abs(matrix @ solved - rhs)))
    if residual > MAX_RESIDUAL:
        raise NumericalError(
            "BEM residual too large",
            f"residual {residual:.3e}, condition estimate {condition:.3e}",
        )

    if formulation == "split":
        window = -(radius**2) / (math.hypot(1.0, radius) * (math.hypot(1.0, radius) + 1.0))
        total = window + float(solved @ areas)
        density = solved + _plane_density(collocation)
    else:
        total = float(solved @ areas)
        density = solved
    logger.debug(
        "BEM %s: n_rings=%d r/d=%.3g cond=%.3e residual=%.3e Q/q=%.12f",
        formulation,
        n_rings,
        radius,
        condition,
        residual,
        total,
    )
    mesh = BemMesh(
        n_rings=n_rings,
        edges=edges * d,
        collocation=collocation * d,
        density=density * q / d**2,
        condition=condition,
        residual=residual,
    )
    return BemResult(total * q, mesh)


# --- curves and comparison tables ---


def induced_charge_curve(
    q: float,
    heights: Iterable[float],
    r: float,
    method: Method = "analytic-plane",
    n_rings: int = 256,
) -> InducedChargeCurve:
    samples = []
    for d in heights:
        if method == "analytic-plane":
            charge = induced_charge_plane_window(q, d, r)
        elif method == "exact-disk":
            charge = induced_charge_disk_exact(q, d, r)
        elif method == "bem-disk":
            charge = induced_charge_bem(q, d, r, n_rings).total_charge
        else:
            raise ValidationError(f"unknown induced-charge method {method!r}")
        samples.append((float(d), charge))
    return InducedChargeCurve(
        samples=tuple(samples), source_charge=q, window_radius=r, method=method
    )


def compare_rows(
    q: float, heights: Sequence[float], r: float, n_rings: int = 256
) -> list[OracleRow]:
    """Plane-window versus finite-disk BEM charge at each height."""
    rows = []
    for d in heights:
        analytic = induced_charge_plane_window(q, d, r)
        bem = induced_charge_bem(q, d, r, n_rings).total_charge
        rel_diff = (bem - analytic) / analytic if analytic != 0.0 else 0.0
        rows.append(OracleRow(float(d), float(r), q, analytic, bem, rel_diff))
    return rows
