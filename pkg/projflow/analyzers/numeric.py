"""
Floating-point cross-checks of flows.

Handles:
- Classical RK4 integration of a vector field, guarded against poles
- Area (Green) and volume (Gauss) conservation checks under phi^z
- Sampling of orbit curves {W = c} for plotting, with CSV output

Curve and surface images are differentiated exactly: the tangent of the
image is D(phi^z)·tangent, and D(phi^z)(x) = (D phi)(z·x). Integrals use
the composite trapezoid rule on uniform parameter grids.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from projflow.algebra.evaluate import NumericFunction, compile_numeric, guarded_denominators
from projflow.algebra.expr import diff
from projflow.analyzers.odeorbit import OrbitIntegral
from projflow.errors import DomainError, SingularityError
from projflow.flows.core import FlowMap, VectorField

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
Parametrization = Callable[[Array], tuple[Array, ...]]
SurfaceMap = Callable[[Array, Array], tuple[Array, ...]]

AREA_SAMPLES = 4096
VOLUME_GRID = (256, 256)
ROOT_XTOL = 1e-14
SCAN_RESOLUTION = 400


@dataclass(frozen=True)
class Curve2:
    """Closed plane curve theta -> (x, y) on [0, 2·pi] with its tangent."""

    position: Parametrization
    tangent: Parametrization
    samples: int = AREA_SAMPLES

    @classmethod
    def circle(
        cls,
        radius: float = 1.0,
        center: tuple[float, float] = (0.0, 0.0),
        samples: int = AREA_SAMPLES,
    ) -> Curve2:
        cx, cy = center
        return cls(
            lambda t: (cx + radius * np.cos(t), cy + radius * np.sin(t)),
            lambda t: (-radius * np.sin(t), radius * np.cos(t)),
            samples,
        )

    def grid(self) -> Array:
        return np.linspace(0.0, 2 * np.pi, self.samples + 1)


@dataclass(frozen=True)
class Surface3:
    """Closed surface (theta, phi) -> (x, y, w) on [0, pi] x [0, 2·pi]."""

    position: SurfaceMap
    d_theta: SurfaceMap
    d_phi: SurfaceMap
    grid: tuple[int, int] = VOLUME_GRID
    outward: bool = True

    @classmethod
    def sphere(
        cls,
        radius: float = 1.0,
        center: tuple[float, float, float] = (0.0, 0.0, 0.0),
        grid: tuple[int, int] = VOLUME_GRID,
    ) -> Surface3:
        cx, cy, cw = center
        r = radius

        def position(t: Array, p: Array) -> tuple[Array, ...]:
            ring = r * np.sin(t)
            return (cx + ring * np.cos(p), cy + ring * np.sin(p), cw + r * np.cos(t))

        def d_theta(t: Array, p: Array) -> tuple[Array, ...]:
            return (r * np.cos(t) * np.cos(p), r * np.cos(t) * np.sin(p), -r * np.sin(t))

        def d_phi(t: Array, p: Array) -> tuple[Array, ...]:
            return (-r * np.sin(t) * np.sin(p), r * np.sin(t) * np.cos(p), np.zeros_like(t))

        return cls(position, d_theta, d_phi, grid)

    def mesh(self) -> tuple[Array, Array]:
        theta = np.linspace(0.0, np.pi, self.grid[0] + 1)
        phi = np.linspace(0.0, 2 * np.pi, self.grid[1] + 1)
        return np.meshgrid(theta, phi, indexing="ij")


@dataclass(frozen=True)
class ConservationCheck:
    """Enclosed measure before and after the flow."""

    before: float
    after: float
    z: float
    samples: int
    min_base: float = np.inf

    @property
    def difference(self) -> float:
        return abs(self.after - self.before)

    def as_tuple(self) -> tuple[float, float]:
        return self.before, self.after

    def to_dict(self) -> dict[str, Any]:
        return {
            "before": self.before,
            "after": self.after,
            "difference": self.difference,
            "z": self.z,
            "samples": self.samples,
            "min_base": None if np.isinf(self.min_base) else self.min_base,
        }


class _ScaledFlow:
    """phi^z and its Jacobian, compiled once."""

    def __init__(self, flow: FlowMap, z: float):
        if z == 0:
            raise DomainError("z must be nonzero")
        self.z = z
        self.values = [compile_numeric(c, flow.variables) for c in flow.components]
        self.jacobian = [
            [compile_numeric(diff(c, v), flow.variables) for v in flow.variables]
            for c in flow.components
        ]
        self.min_base = np.inf

    def _eval(self, fn: NumericFunction, points: Sequence[Array]) -> Array:
        value, min_base = fn.evaluate(*points)
        self.min_base = min(self.min_base, min_base)
        return value

    def __call__(self, points: Sequence[Array]) -> tuple[list[Array], list[list[Array]]]:
        scaled = [p * self.z for p in points]
        image = [self._eval(fn, scaled) / self.z for fn in self.values]
        jac = [[self._eval(fn, scaled) for fn in row] for row in self.jacobian]
        return image, jac


def _apply(jac: list[list[Array]], vector: Sequence[Array]) -> list[Array]:
    return [sum(row[k] * vector[k] for k in range(len(vector))) for row in jac]


def _turning_number(dx: Array, dy: Array) -> int:
    angle = np.unwrap(np.arctan2(dy, dx))
    return int(round((angle[-1] - angle[0]) / (2 * np.pi)))


def _enclosed_area(x: Array, dy: Array, theta: Array) -> float:
    return float(trapezoid(x * dy, theta))


def area_check(flow: FlowMap, curve: Curve2, z: float) -> ConservationCheck:
    """oint x dy around the curve and around its image under phi^z."""
    if flow.dim != 2:
        raise DomainError("area_check needs a plane flow")
    theta = curve.grid()
    x, y = curve.position(theta)
    dx, dy = curve.tangent(theta)
    before = _enclosed_area(np.asarray(x, float), np.asarray(dy, float), theta)

    scaled = _ScaledFlow(flow, z)
    (u, v), jac = scaled([np.asarray(x, float), np.asarray(y, float)])
    du, dv = _apply(jac, (dx, dy))
    if np.min(np.hypot(du, dv)) < 1e-12 or _turning_number(du, dv) != _turning_number(dx, dy):
        raise DomainError(f"image of the curve under {flow.label} at z = {z} is not simple")
    after = _enclosed_area(u, dv, theta)
    logger.debug(f"area {before} -> {after} at z = {z}, min base {scaled.min_base}")
    return ConservationCheck(before, after, z, curve.samples, scaled.min_base)


def _enclosed_volume(
    x: Array, tangents: tuple[Sequence[Array], Sequence[Array]], theta: Array, phi: Array, sign: int
) -> float:
    (_, y_t, w_t), (_, y_p, w_p) = tangents
    integrand = x * (y_t * w_p - y_p * w_t) * sign
    inner = trapezoid(integrand, phi[0, :], axis=1)
    return float(trapezoid(inner, theta[:, 0]))


def volume_check(flow: FlowMap, surface: Surface3, z: float) -> ConservationCheck:
    """Gauss formula: the surface integral of x dy dw before and after phi^z."""
    if flow.dim != 3:
        raise DomainError("volume_check needs a three-dimensional flow")
    theta, phi = surface.mesh()
    sign = 1 if surface.outward else -1
    points = [np.asarray(v, float) for v in surface.position(theta, phi)]
    d_t = [np.asarray(v, float) for v in surface.d_theta(theta, phi)]
    d_p = [np.asarray(v, float) for v in surface.d_phi(theta, phi)]
    before = _enclosed_volume(points[0], (d_t, d_p), theta, phi, sign)

    scaled = _ScaledFlow(flow, z)
    image, jac = scaled(points)
    det = np.linalg.det(np.moveaxis(np.array(jac), (0, 1), (-2, -1)))
    if np.any(det <= 0):
        raise DomainError(f"{flow.label} at z = {z} folds the surface")
    after = _enclosed_volume(image[0], (_apply(jac, d_t), _apply(jac, d_p)), theta, phi, sign)
    samples = surface.grid[0] * surface.grid[1]
    logger.debug(f"volume {before} -> {after} at z = {z}, min base {scaled.min_base}")
    return ConservationCheck(before, after, z, samples, scaled.min_base)


def rk4_flow(field_: VectorField, x0: Sequence[ArrayLike], z: float, steps: int) -> list[Array]:
    """Integrate x' = V(x) from 0 to z; x0 may hold arrays of starting points."""
    if steps < 1:
        raise DomainError(f"steps must be positive, got {steps}")
    if len(x0) != field_.dim:
        raise DomainError(f"start has {len(x0)} coordinates for a field of dimension {field_.dim}")
    values, dens = field_.numeric()
    state = [np.asarray(c, dtype=float) for c in x0]
    h = z / steps

    def rate(point: list[Array]) -> list[Array]:
        guarded_denominators(dens, *point)
        return [np.broadcast_to(fn(*point), point[0].shape) for fn in values]

    for step in range(steps):
        try:
            k1 = rate(state)
            k2 = rate([s + h / 2 * k for s, k in zip(state, k1)])
            k3 = rate([s + h / 2 * k for s, k in zip(state, k2)])
            k4 = rate([s + h * k for s, k in zip(state, k3)])
        except SingularityError as exc:
            raise SingularityError(f"step {step} at t = {step * h}: {exc}") from exc
        state = [
            s + h / 6 * (a + 2 * b + 2 * c + d) for s, a, b, c, d in zip(state, k1, k2, k3, k4)
        ]
    return state


def orbit_samples(
    integral: OrbitIntegral,
    c: float,
    window: tuple[float, float, float, float],
    count: int,
) -> list[tuple[float, float]]:
    """Points of {W = c} on count horizontal scan lines of the window x0, x1, y0, y1."""
    x0, x1, y0, y1 = window
    if not (x0 < x1 and y0 < y1) or count < 1:
        raise DomainError(f"bad window {window} or count {count}")
    fn = compile_numeric(integral.W, integral.variables)
    scan = np.linspace(x0, x1, SCAN_RESOLUTION)
    tol = 1e-10 * max(1.0, abs(c))
    points: list[tuple[float, float]] = []
    discarded = 0
    with np.errstate(all="ignore"):
        for y in np.linspace(y0, y1, count):
            gap = fn.unchecked(scan, y) - c
            for k in np.flatnonzero(np.sign(gap[:-1]) * np.sign(gap[1:]) < 0):
                if not (np.isfinite(gap[k]) and np.isfinite(gap[k + 1])):
                    continue
                root = brentq(
                    lambda t: float(fn.unchecked(t, y)) - c, scan[k], scan[k + 1], xtol=ROOT_XTOL
                )
                if abs(float(fn.unchecked(root, y)) - c) <= tol:
                    points.append((float(root), float(y)))
                else:
                    discarded += 1
            points.extend((float(scan[k]), float(y)) for k in np.flatnonzero(gap == 0))
    if discarded:
        logger.warning(f"discarded {discarded} sign changes across poles of W")
    if not points:
        raise DomainError(f"level set W = {c} does not meet the window {window}")
    return points


def write_csv(points: Sequence[tuple[float, ...]], path: Path) -> None:
    """Rows of coordinates with 17 significant digits."""
    names = ["x", "y", "w"][: len(points[0])] if points else ["x", "y"]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for point in points:
            writer.writerow([f"{v:.17g}" for v in point])


__all__ = [
    "ConservationCheck",
    "Curve2",
    "Surface3",
    "area_check",
    "orbit_samples",
    "rk4_flow",
    "volume_check",
    "write_csv",
]
