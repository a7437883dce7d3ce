"""Explicit hyperbolic model charts, geodesics, distances, and curvature.

Three charts are provided, each conformal (metric = density * |dz|^2):

* ``CylinderChart(ell)`` -- a complete hyperbolic cylinder whose core
  circle ``{Re z = 0}`` is a closed geodesic of length ``ell``.  The
  coordinate domain is ``x in (-pi/(2 ell), pi/(2 ell))``, ``y in [0, 1)``
  periodic, with density ``ell^2 sec^2(ell x)``.
* ``DiskChart()`` -- the unit disk with the Poincare density
  ``4 / (1 - |z|^2)^2``; radial rays through 0 are geodesics.
* ``CuspChart()`` -- the punctured disk ``0 < |z| < 1`` with density
  ``|z|^-2 (log 1/|z|)^-2``; radial rays run to the cusp at 0 with
  infinite length.

All charts are immutable and every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedGeodesicError
from .quadrature import integrate_gl


@dataclass(frozen=True)
class CylinderChart:
    """Hyperbolic cylinder with core geodesic length ``ell``."""

    ell: float

    def __post_init__(self):
        if not self.ell > 0:
            raise DomainError("core length must be positive")

    name = "cylinder"

    @property
    def x_max(self) -> float:
        """Half-width of the coordinate strip (open interval)."""
        return 0.5 * math.pi / self.ell

    @property
    def collar_half_width(self) -> float:
        """Half-width (1/ell) asec(1/ell) of the embedded collar; 0 for ell >= 1."""
        if self.ell >= 1.0:
            return 0.0
        return math.acos(self.ell) / self.ell

    def density(self, z):
        x = np.real(z)
        return (self.ell / np.cos(self.ell * x)) ** 2

    def log_density(self, z):
        x = np.real(z)
        return 2.0 * (np.log(self.ell) - np.log(np.cos(self.ell * x)))

    def contains(self, z, margin: float = 0.0) -> bool:
        return bool(np.all(np.abs(np.real(z)) < self.x_max - margin))

    def core_circle(self) -> "GeodesicCurve":
        """The core geodesic {x = 0}, a closed curve of length ell."""
        return GeodesicCurve(chart=self, kind="closed", length=self.ell)

    def circle_length(self, x0: float, npanels: int = 16) -> float:
        """Numerically integrated length of the parallel circle {x = x0}."""
        if not self.contains(x0):
            raise DomainError("x0 outside the chart")
        return integrate_gl(lambda y: np.sqrt(self.density(x0 + 1j * y)), 0.0, 1.0, npanels)

    def point(self, curve: "GeodesicCurve", s):
        # core circle: arclength s corresponds to y = s / ell
        return 1j * (np.asarray(s, dtype=float) / self.ell)


@dataclass(frozen=True)
class DiskChart:
    """Poincare disk of curvature -1 (radius fixed at 1)."""

    radius: float = 1.0

    name = "disk"

    def density(self, z):
        r2 = np.abs(z) ** 2
        return 4.0 / (1.0 - r2) ** 2

    def log_density(self, z):
        r2 = np.abs(z) ** 2
        return math.log(4.0) - 2.0 * np.log1p(-r2)

    def contains(self, z, margin: float = 0.0) -> bool:
        return bool(np.all(np.abs(z) < 1.0 - margin))

    @staticmethod
    def dist_from_origin(r):
        return np.log((1.0 + r) / (1.0 - r))

    @staticmethod
    def radius_at_dist(d):
        return np.tanh(np.asarray(d, dtype=float) / 2.0)

    def radial_ray(self, theta: float = 0.0, r1: float = 0.999) -> "GeodesicCurve":
        """Geodesic segment from the origin to radius r1 along angle theta."""
        if not 0.0 < r1 < 1.0:
            raise DomainError("r1 must lie in (0, 1)")
        length = float(self.dist_from_origin(r1))
        return GeodesicCurve(chart=self, kind="segment", length=length, angle=theta)

    def point(self, curve: "GeodesicCurve", s):
        r = self.radius_at_dist(s)
        return r * np.exp(1j * curve.angle)


@dataclass(frozen=True)
class CuspChart:
    """Punctured-disk cusp model 0 < |z| < 1."""

    name = "cusp"

    def density(self, z):
        r = np.abs(z)
        return 1.0 / (r * np.log(1.0 / r)) ** 2

    def log_density(self, z):
        r = np.abs(z)
        return -2.0 * (np.log(r) + np.log(np.log(1.0 / r)))

    def contains(self, z, margin: float = 0.0) -> bool:
        r = np.abs(z)
        return bool(np.all((r > margin) & (r < 1.0 - margin)))

    @staticmethod
    def arclength_from(r0, r):
        """Distance along a radial ray from radius r0 inward to radius r <= r0."""
        return np.log(np.log(1.0 / np.asarray(r, dtype=float)) / np.log(1.0 / r0))

    def radial_ray(self, theta: float = 0.0, r0: float = 1.0 / math.e) -> "GeodesicCurve":
        """Radial geodesic ray from |z| = r0 toward the cusp (infinite length)."""
        if not 0.0 < r0 < 1.0:
            raise DomainError("r0 must lie in (0, 1)")
        return GeodesicCurve(chart=self, kind="ray", length=math.inf, angle=theta, r0=r0)

    def point(self, curve: "GeodesicCurve", s):
        # s >= 0 measured from |z| = r0 into the cusp
        xi0 = math.log(1.0 / curve.r0)
        xi = xi0 * np.exp(np.asarray(s, dtype=float))
        return np.exp(-xi) * np.exp(1j * curve.angle)


@dataclass(frozen=True)
class GeodesicCurve:
    """A model geodesic: closed core circle, radial segment, or cusp ray."""

    chart: object
    kind: str  # "closed" | "segment" | "ray"
    length: float
    angle: float = 0.0
    r0: float = field(default=1.0)

    @property
    def periodic(self) -> bool:
        return self.kind == "closed"

    def point(self, s):
        return self.chart.point(self, s)


def geodesic_distance(curve: GeodesicCurve, s: float, t: float) -> float:
    """Distance along the curve between arclength parameters s and t."""
    d = abs(s - t)
    if curve.kind == "closed":
        d = d % curve.length
        return min(d, curve.length - d)
    return d


def curvature_at(chart, point, h: float = 1e-4) -> float:
    """Gaussian curvature K = -(1/2G) * Lap0(log G) by centered differences.

    ``point`` must be interior, at least 2 finite-difference steps from
    the chart boundary.  Exact value is -1 on all three charts.
    """
    z = complex(point)
    if not chart.contains(z, margin=2.0 * h):
        raise DomainError(f"point {z} too close to the boundary of {chart.name}")
    f = chart.log_density
    lap = (
        f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f(z)
    ) / h**2
    return float(-0.5 * lap / chart.density(z))
