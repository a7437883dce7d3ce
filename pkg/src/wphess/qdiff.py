"""Holomorphic quadratic differentials and their restrictions to geodesics.

A quadratic differential ``phi(z) dz^2`` is stored in closed form
(coefficients, never grids) in one of four representations:

* ``ConstantQD`` -- phi(z) = c (the rotationally invariant differentials
  of a cylinder);
* ``CylinderFourierQD`` -- phi(z) = sum_n c_n exp(2 pi n z) on the
  cylinder, periodic in y with period 1.  The y-Fourier coefficient of
  frequency n is then c_n exp(2 pi n x), and holomorphy holds exactly;
* ``DiskPolyQD`` -- a polynomial on the unit disk;
* ``CuspPrincipalQD`` -- c/z plus a polynomial tail on the punctured
  disk (an optional second-order coefficient c2 is accepted so that the
  non-integrable case can be represented; pairing rejects it).

The associated Beltrami field is mu = conj(Phi)/g, so |mu| = |phi|/g.
Along a model geodesic the frame-adapted coefficient is ``phi`` itself on
the cylinder (the core circle is already vertical in the chart) and
``exp(2 i theta) phi`` along the radial ray of angle theta on the disk
and cusp charts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import DivergenceError, InputError, UnsupportedGeodesicError
from .geom import CuspChart, CylinderChart, DiskChart, GeodesicCurve
from .quadrature import gl_panels


# ---------------------------------------------------------------------------
# representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantQD:
    chart: object
    c: complex

    kind = "constant"

    def phi(self, z):
        return self.c * np.ones_like(np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class CylinderFourierQD:
    """phi(z) = sum over stored frequencies n of c_n exp(2 pi n z)."""

    chart: CylinderChart
    modes: Tuple[Tuple[int, complex], ...]

    kind = "fourier"

    def __post_init__(self):
        ns = [n for n, _ in self.modes]
        if len(set(ns)) != len(ns):
            raise InputError("duplicate Fourier frequency")
        object.__setattr__(
            self, "modes",
            tuple(sorted(((int(n), complex(c)) for n, c in self.modes), key=lambda t: t[0])))

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for n, c in self.modes:
            out += c * np.exp(2.0 * math.pi * n * z)
        return out

    def coefficient(self, n: int) -> complex:
        for m, c in self.modes:
            if m == n:
                return c
        return 0.0j

    def mode_power(self, x):
        """sum_n |a_n(x)|^2 with a_n(x) = c_n exp(2 pi n x); equals the
        y-average of |phi|^2 on the vertical line at x (Parseval)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for n, c in self.modes:
            out += abs(c) ** 2 * np.exp(4.0 * math.pi * n * x)
        return out

    def zero_mean(self) -> bool:
        return abs(self.coefficient(0)) == 0.0


@dataclass(frozen=True)
class DiskPolyQD:
    chart: DiskChart
    coeffs: Tuple[complex, ...]  # ascending powers of z

    kind = "poly"

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in reversed(self.coeffs):
            out = out * z + c
        return out


@dataclass(frozen=True)
class CuspPrincipalQD:
    chart: CuspChart
    c: complex
    tail: Tuple[complex, ...] = ()
    c2: complex = 0.0  # second-order pole; representable but not integrable

    kind = "cusp-principal"

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.c / z + self.c2 / z**2
        if self.tail:
            p = np.zeros_like(z)
            for t in reversed(self.tail):
                p = p * z + t
            out = out + p
        return out

    @property
    def pole_order(self) -> int:
        if self.c2 != 0:
            return 2
        return 1 if self.c != 0 else 0


# ---------------------------------------------------------------------------
# pointwise derived fields
# ---------------------------------------------------------------------------

def mu_abs(qd, z):
    """|mu| = |phi| / g at chart points z."""
    return np.abs(qd.phi(z)) / qd.chart.density(z)


def norm_sq(qd, z):
    """|phi|^2 / g^2 (the squared pointwise norm of the differential)."""
    return np.abs(qd.phi(z)) ** 2 / qd.chart.density(z) ** 2


def dbar_residual(qd, z, h: float = 1e-5):
    """|dbar phi| by centered Cauchy-Riemann differences (holomorphy check)."""
    z = np.asarray(z, dtype=complex)
    fx = (qd.phi(z + h) - qd.phi(z - h)) / (2.0 * h)
    fy = (qd.phi(z + 1j * h) - qd.phi(z - 1j * h)) / (2.0 * h)
    return 0.5 * np.abs(fx + 1j * fy)


# ---------------------------------------------------------------------------
# restriction to model geodesics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldOnGeodesic:
    """A real function sampled along an arclength-parametrized geodesic.

    Samples are uniform; for closed curves the first and last samples
    coincide (the grid includes both s = 0 and s = L).
    """

    curve: GeodesicCurve
    s: np.ndarray
    values: np.ndarray
    tag: str

    @property
    def n(self) -> int:
        """Number of distinct sample points (periodic grids drop the wrap)."""
        return len(self.s) - 1 if self.curve.periodic else len(self.s)

    @property
    def spacing(self) -> float:
        return float(self.s[1] - self.s[0])

    def periodic_values(self) -> np.ndarray:
        if not self.curve.periodic:
            raise InputError("periodic_values requires a closed curve")
        return self.values[:-1]


def _sample_grid(curve: GeodesicCurve, n: int):
    if curve.periodic:
        return np.linspace(0.0, curve.length, n + 1)
    if not math.isfinite(curve.length):
        raise UnsupportedGeodesicError("cannot sample an infinite ray; restrict a finite piece")
    return np.linspace(0.0, curve.length, n)


def adapted_phi(qd, curve: GeodesicCurve, s):
    """Frame-adapted coefficient of the differential along the geodesic."""
    if curve.chart is not qd.chart and curve.chart != qd.chart:
        raise UnsupportedGeodesicError("curve does not live in the differential's chart")
    z = curve.point(s)
    if curve.kind == "closed":
        if not isinstance(qd.chart, CylinderChart):
            raise UnsupportedGeodesicError("closed model geodesics exist only on the cylinder")
        return qd.phi(z)
    if curve.kind in ("segment", "ray"):
        return np.exp(2j * curve.angle) * qd.phi(z)
    raise UnsupportedGeodesicError(f"unsupported curve kind {curve.kind!r}")


def _restrict(qd, curve, n, transform, tag) -> FieldOnGeodesic:
    s = _sample_grid(curve, n)
    g = curve.chart.density(curve.point(s))
    vals = transform(adapted_phi(qd, curve, s), g)
    return FieldOnGeodesic(curve=curve, s=s, values=np.asarray(vals, dtype=float), tag=tag)


def restrict_im_over_g(qd, curve: GeodesicCurve, n: int) -> FieldOnGeodesic:
    """Im(phi adapted)/g along the curve; right-hand side of the Jacobi ODE."""
    return _restrict(qd, curve, n, lambda p, g: np.imag(p) / g, "ImPhiOverG")


def restrict_re_over_g(qd, curve: GeodesicCurve, n: int) -> FieldOnGeodesic:
    return _restrict(qd, curve, n, lambda p, g: np.real(p) / g, "RePhiOverG")


def restrict_normsq(qd, curve: GeodesicCurve, n: int) -> FieldOnGeodesic:
    return _restrict(qd, curve, n, lambda p, g: np.abs(p) ** 2 / g**2, "NormPhiSq")


# ---------------------------------------------------------------------------
# Weil-Petersson pairing
# ---------------------------------------------------------------------------

def wp_pairing(phi, psi=None, *, disk_radius: float = 1.0 - 1e-3,
               cusp_inner: float = 1e-6, npanels: int = 64,
               richardson: bool = False) -> float:
    """Re of the integral of phi * conj(psi) / g over the chart.

    The area form g dx dy cancels one density factor, leaving a plain
    2-D quadrature of phi psibar / g.  The disk integrates out to
    ``disk_radius``; the cusp chart integrates over
    ``cusp_inner < |z| < disk_radius`` with panels refined geometrically
    toward the puncture (the integrand is integrable for first-order
    poles).  Inputs where both factors carry a second-order pole are
    rejected as divergent.
    """
    if psi is None:
        psi = phi
    if phi.chart != psi.chart:
        raise InputError("pairing requires both differentials on the same chart")
    chart = phi.chart

    if isinstance(chart, CylinderChart):
        xs, wx = gl_panels(-chart.x_max, chart.x_max, npanels)
        ny = 4 * _max_frequency(phi, psi) + 8
        ys = np.arange(ny) / ny
        z = xs[:, None] + 1j * ys[None, :]
        integrand = np.real(phi.phi(z) * np.conj(psi.phi(z))) / chart.density(z)
        return float(np.dot(wx, integrand.sum(axis=1)) / ny)

    if isinstance(chart, DiskChart):
        value = _pairing_polar(phi, psi, 0.0, disk_radius, npanels)
        if richardson:
            # truncation error is O((1-R)^3) for polynomial inputs
            coarse = _pairing_polar(phi, psi, 0.0, 1.0 - 2.0 * (1.0 - disk_radius), npanels)
            value = (8.0 * value - coarse) / 7.0
        return value

    if isinstance(chart, CuspChart):
        if getattr(phi, "pole_order", 0) >= 2 and getattr(psi, "pole_order", 0) >= 2:
            raise DivergenceError(
                "phi psibar / g ~ r^-2 (log r)^2 near the puncture is not integrable")
        # geometric panel refinement toward r = 0
        edges = [disk_radius]
        while edges[-1] > cusp_inner:
            edges.append(max(edges[-1] / 2.0, cusp_inner))
        total = 0.0
        for lo, hi in zip(edges[1:], edges[:-1]):
            total += _pairing_polar(phi, psi, lo, hi, 4)
        return total

    raise InputError(f"unsupported chart {chart!r}")


def _pairing_polar(phi, psi, r_lo, r_hi, npanels):
    ntheta = 4 * _max_degree(phi, psi) + 8
    thetas = 2.0 * math.pi * np.arange(ntheta) / ntheta
    rs, wr = gl_panels(r_lo, r_hi, npanels)
    z = rs[:, None] * np.exp(1j * thetas[None, :])
    integrand = np.real(phi.phi(z) * np.conj(psi.phi(z))) / phi.chart.density(z)
    theta_avg = integrand.sum(axis=1) * (2.0 * math.pi / ntheta)
    return float(np.dot(wr * rs, theta_avg))


def _max_frequency(*qds) -> int:
    out = 0
    for q in qds:
        if isinstance(q, CylinderFourierQD):
            out = max(out, max((abs(n) for n, _ in q.modes), default=0))
    return out


def _max_degree(*qds) -> int:
    out = 0
    for q in qds:
        if isinstance(q, DiskPolyQD):
            out = max(out, len(q.coeffs))
        elif isinstance(q, CuspPrincipalQD):
            out = max(out, len(q.tail) + 2)
    return out


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def _c_to_pair(c: complex):
    return [float(np.real(c)), float(np.imag(c))]


def _pair_to_c(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    return complex(p[0], p[1])


def to_json(qd) -> dict:
    if isinstance(qd, ConstantQD):
        return {"chart": qd.chart.name, "kind": "constant", "c": _c_to_pair(qd.c)}
    if isinstance(qd, CylinderFourierQD):
        return {
            "chart": "cylinder",
            "kind": "fourier",
            "coefficients": [
                {"n": n, "A": _c_to_pair(c), "B": [0.0, 0.0]} if n >= 0 else
                {"n": -n, "A": [0.0, 0.0], "B": _c_to_pair(c)}
                for n, c in qd.modes
            ],
        }
    if isinstance(qd, DiskPolyQD):
        return {"chart": "disk", "kind": "poly", "coeffs": [_c_to_pair(c) for c in qd.coeffs]}
    if isinstance(qd, CuspPrincipalQD):
        return {"chart": "cusp", "kind": "cusp-principal", "c": _c_to_pair(qd.c),
                "tail": [_c_to_pair(c) for c in qd.tail]}
    raise InputError(f"unknown differential {qd!r}")


def from_json(obj, chart=None):
    """Build a differential from the wire format.

    Fourier coefficients come as ``{"n": n, "A": [re, im], "B": [re, im]}``
    where A multiplies exp(+2 pi n z) and B multiplies exp(-2 pi n z),
    i.e. A feeds the +n and B the -n frequency (both holomorphic).
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "constant":
        chart = chart or CylinderChart(ell=1.0)
        return ConstantQD(chart=chart, c=_pair_to_c(obj["c"]))
    if kind == "fourier":
        if chart is None:
            raise InputError("fourier differentials need a cylinder chart")
        acc = {}
        for entry in obj.get("coefficients", []):
            n = int(entry["n"])
            a = _pair_to_c(entry.get("A", 0.0))
            b = _pair_to_c(entry.get("B", 0.0))
            acc[n] = acc.get(n, 0.0j) + a
            acc[-n] = acc.get(-n, 0.0j) + b
        modes = tuple((n, c) for n, c in acc.items() if c != 0) or ((0, 0.0j),)
        return CylinderFourierQD(chart=chart, modes=modes)
    if kind == "poly":
        return DiskPolyQD(chart=chart or DiskChart(),
                          coeffs=tuple(_pair_to_c(c) for c in obj["coeffs"]))
    if kind == "cusp-principal":
        return CuspPrincipalQD(chart=chart or CuspChart(), c=_pair_to_c(obj["c"]),
                               tail=tuple(_pair_to_c(c) for c in obj.get("tail", [])))
    raise InputError(f"unknown differential kind {kind!r}")
