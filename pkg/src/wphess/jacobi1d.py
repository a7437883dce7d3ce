"""Solvers and Green's kernels for the operator d^2/dy^2 - 1.

Three mutually independent evaluations of the quadratic form behind the
curve-variation term are provided for a field F on a circle of length L:

1. ``energy(solve_periodic(F))`` -- the energy integral of U_y^2 + U^2
   for the periodic solution of U'' - U = -F (Fourier backend);
2. ``integral_uf`` -- the integral of U * F (integration by parts);
3. ``second_term_kernel`` -- the double integral of
   F(s) cosh(d(s,t) - L/2) F(t) / (2 sinh(L/2)) by product trapezoid
   quadrature (the circulant sum is evaluated with an FFT, which computes
   the same number as the direct double sum).

The Fourier backend is canonical on circles; the kernel backend is
canonical on segments.  Discrete grids use the trapezoid rule on
periodic data and composite Gauss-Legendre on segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InputError
from .qdiff import FieldOnGeodesic
from .quadrature import cumulative_gl, gl_panels, trapezoid_periodic


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GreenKernel:
    """Closed-form kernel K with K'' - K = delta on the given topology.

    * circle of length L:  K(s,t) = -cosh(d(s,t) - L/2) / (2 sinh(L/2)),
      d the circle distance;
    * segment [-L/2, L/2]: the two-branch sinh product, vanishing at both
      endpoints;
    * line:                K(s,t) = -(1/2) exp(-|s-t|).
    """

    topology: str  # "circle" | "segment" | "line"
    length: Optional[float] = None

    def __post_init__(self):
        if self.topology in ("circle", "segment") and not (self.length and self.length > 0):
            raise InputError("circle/segment kernels need a positive length")

    def __call__(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.topology == "circle":
            L = self.length
            d = np.abs(s - t) % L
            d = np.minimum(d, L - d)
            return -np.cosh(d - L / 2.0) / (2.0 * math.sinh(L / 2.0))
        if self.topology == "segment":
            L = self.length
            lo, hi = np.minimum(s, t), np.maximum(s, t)
            return -np.sinh(L / 2.0 + lo) * np.sinh(L / 2.0 - hi) / math.sinh(L)
        if self.topology == "line":
            return -0.5 * np.exp(-np.abs(s - t))
        raise InputError(f"unknown topology {self.topology!r}")


def kernel_eval(kernel: GreenKernel, s: float, t: float) -> float:
    return float(kernel(s, t))


# ---------------------------------------------------------------------------
# solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobiSolution:
    """Solution of U'' - U = -F with its derivative and energy."""

    U: FieldOnGeodesic
    U_y: FieldOnGeodesic
    energy: float
    method: str
    a: float = 0.0  # cosh coefficient of the homogeneous correction (segments)
    b: float = 0.0  # sinh coefficient
    _quad: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = None


def _check_uniform_periodic(field: FieldOnGeodesic):
    if not field.curve.periodic:
        raise InputError("solve_periodic needs a field on a closed curve")
    ds = np.diff(field.s)
    if not np.allclose(ds, ds[0], rtol=1e-12, atol=1e-12):
        raise InputError("field samples must be uniformly spaced")


def _spectral_wavenumbers(n: int, L: float) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n // 2 + 1) / L


def solve_periodic(field: FieldOnGeodesic, backend: str = "fourier") -> JacobiSolution:
    """Unique periodic solution of U'' - U = -F on a circle of length L.

    ``backend='fourier'`` divides Fourier modes by 1 + (2 pi k / L)^2;
    ``backend='kernel'`` integrates against the circle Green kernel on an
    upsampled grid (trapezoid, with one Richardson step).  The two agree
    to high accuracy for band-limited F.
    """
    _check_uniform_periodic(field)
    L = field.curve.length
    fv = field.periodic_values()
    n = len(fv)
    if backend == "fourier":
        fhat = np.fft.rfft(fv)
        k = _spectral_wavenumbers(n, L)
        uhat = fhat / (1.0 + k**2)
        uv = np.fft.irfft(uhat, n=n)
        uyv = np.fft.irfft(1j * k * uhat, n=n)
    elif backend == "kernel":
        uv = _kernel_solve_circle(fv, L)
        uhat = np.fft.rfft(uv)
        k = _spectral_wavenumbers(n, L)
        uyv = np.fft.irfft(1j * k * uhat, n=n)
    else:
        raise InputError(f"unknown backend {backend!r}")
    U = FieldOnGeodesic(curve=field.curve, s=field.s,
                        values=np.append(uv, uv[0]), tag="JacobiU")
    Uy = FieldOnGeodesic(curve=field.curve, s=field.s,
                         values=np.append(uyv, uyv[0]), tag="VariationV")
    en = trapezoid_periodic(uyv**2 + uv**2, L)
    return JacobiSolution(U=U, U_y=Uy, energy=en, method="spectral" if backend == "fourier" else "kernel")


def _circle_kernel_row(n: int, L: float) -> np.ndarray:
    s = L * np.arange(n) / n
    d = np.minimum(s, L - s)
    return -np.cosh(d - L / 2.0) / (2.0 * math.sinh(L / 2.0))


def _upsample_periodic(fv: np.ndarray, nfine: int) -> np.ndarray:
    n = len(fv)
    if nfine == n:
        return fv
    fhat = np.fft.rfft(fv)
    out = np.fft.irfft(fhat, n=nfine) * (nfine / n)
    return out


def _kernel_solve_circle(fv: np.ndarray, L: float, nfine: int = 1 << 15) -> np.ndarray:
    """U(y) = -integral of K(y,t) F(t) dt by periodic trapezoid quadrature.

    Evaluated on a trig-interpolated fine grid (the kernel has a corner on
    the diagonal, so the trapezoid error is O(h^2)); one Richardson step
    removes the leading term before downsampling to the input grid.
    """
    n = len(fv)
    nfine = max(nfine, 2 * n)
    nfine -= nfine % (2 * n)  # keep both fine grids supersets of the input grid

    def quadrature(m: int) -> np.ndarray:
        f = _upsample_periodic(fv, m)
        row = _circle_kernel_row(m, L)
        conv = np.fft.irfft(np.fft.rfft(f) * np.fft.rfft(row), n=m)
        return -conv * (L / m)

    fine = quadrature(nfine)[:: nfine // n]
    half = quadrature(nfine // 2)[:: nfine // 2 // n]
    return (4.0 * fine - half) / 3.0


# ---------------------------------------------------------------------------
# segments
# ---------------------------------------------------------------------------

def _segment_green_apply(h: Callable, L: float, points: np.ndarray):
    """Value and derivative at ``points`` of W(y) = integral K_L(y,s) h(s) ds.

    Uses the product structure of the segment kernel: with
    G1(y) = int_{-L/2}^y sinh(L/2+s) h(s) ds and
    G2(y) = int_y^{L/2} sinh(L/2-s) h(s) ds,
    W = -[sinh(L/2-y) G1 + sinh(L/2+y) G2] / sinh(L) and
    W' = [cosh(L/2-y) G1 - cosh(L/2+y) G2] / sinh(L).
    """
    pts = np.asarray(points, dtype=float)
    g1 = cumulative_gl(lambda s: np.sinh(L / 2.0 + s) * h(s), pts)
    rev = cumulative_gl(lambda s: np.sinh(L / 2.0 - s) * h(s), pts)
    g2 = rev[-1] - rev
    sh = math.sinh(L)
    w = -(np.sinh(L / 2.0 - pts) * g1 + np.sinh(L / 2.0 + pts) * g2) / sh
    wp = (np.cosh(L / 2.0 - pts) * g1 - np.cosh(L / 2.0 + pts) * g2) / sh
    return w, wp


def solve_segment(rhs, boundary=(0.0, 0.0), L: Optional[float] = None,
                  n: Optional[int] = None, curve=None) -> JacobiSolution:
    """Solve U'' - U = -F on [-L/2, L/2] with Dirichlet boundary values.

    ``rhs`` is either a FieldOnGeodesic on a segment (values are spline
    interpolated) or a callable F(y) on [-L/2, L/2] together with ``L``.
    The solution is the segment-kernel particular solution plus
    a cosh(y) + b sinh(y) fitted to the boundary values; (a, b) are
    reported on the result.  The kernel particular solution vanishes at
    both endpoints, so a and b depend only on the boundary data.
    """
    if isinstance(rhs, FieldOnGeodesic):
        field = rhs
        L = field.curve.length
        n = len(field.s)
        y = field.s - L / 2.0
        F = CubicSpline(y, field.values)
        curve = field.curve
    else:
        if L is None:
            raise InputError("callable rhs needs an explicit length L")
        F = rhs
        n = n or max(65, int(64 * L) + 1)
        y = np.linspace(-L / 2.0, L / 2.0, n)

    w, wp = _segment_green_apply(lambda s: -np.asarray(F(s), dtype=float), L, y)
    bl, br = float(boundary[0]), float(boundary[1])
    a = (br + bl) / (2.0 * math.cosh(L / 2.0))
    b = (br - bl) / (2.0 * math.sinh(L / 2.0))
    uv = w + a * np.cosh(y) + b * np.sinh(y)
    uyv = wp + a * np.sinh(y) + b * np.cosh(y)

    # energy on Gauss-Legendre nodes (already ascending across panels)
    qs, qw = gl_panels(-L / 2.0, L / 2.0, npanels=max(16, 4 * int(L) + 4))
    wq, wpq = _segment_green_apply(lambda s: -np.asarray(F(s), dtype=float), L, qs)
    uq = wq + a * np.cosh(qs) + b * np.sinh(qs)
    uyq = wpq + a * np.sinh(qs) + b * np.cosh(qs)
    en = float(np.dot(qw, uyq**2 + uq**2))

    sgrid = y + L / 2.0
    U = FieldOnGeodesic(curve=curve, s=sgrid, values=uv, tag="JacobiU") if curve is not None \
        else FieldOnGeodesic(curve=_BareSegment(L), s=sgrid, values=uv, tag="JacobiU")
    Uy = FieldOnGeodesic(curve=U.curve, s=sgrid, values=uyv, tag="VariationV")
    return JacobiSolution(U=U, U_y=Uy, energy=en, method="kernel", a=a, b=b,
                          _quad=(qs[order], qw[order], uq, uyq))


@dataclass(frozen=True)
class _BareSegment:
    length: float
    kind: str = "segment"
    periodic: bool = False


# ---------------------------------------------------------------------------
# energies and cross checks
# ---------------------------------------------------------------------------

def energy(sol: JacobiSolution) -> float:
    """The quadratic energy integral of U_y^2 + U^2."""
    return sol.energy


def integral_uf(sol: JacobiSolution, field: FieldOnGeodesic) -> float:
    """Integral of U * F; equals the energy by integration by parts."""
    if field.curve.periodic:
        return trapezoid_periodic(sol.U.periodic_values() * field.periodic_values(),
                                  field.curve.length)
    return float(np.trapezoid(sol.U.values * field.values, field.s))


def second_term_kernel(field: FieldOnGeodesic, field2: Optional[FieldOnGeodesic] = None,
                       n: int = 4096, richardson: bool = True) -> float:
    """Double integral of F(s) cosh(d(s,t)-L/2) G(t) / (2 sinh(L/2)).

    Product trapezoid quadrature on an upsampled uniform grid; the corner
    of the kernel sits on the diagonal grid line, so the error expansion
    is in even powers of h and a Richardson step is applied by default.
    With G = F this equals the energy route (positivity of the kernel
    form); ``field2`` gives the polarized bilinear value.
    """
    _check_uniform_periodic(field)
    L = field.curve.length
    fv = field.periodic_values()
    gv = fv if field2 is None else field2.periodic_values()
    if len(gv) != len(fv):
        raise InputError("both fields must share one sample grid")
    base = len(fv)
    m = max(n, 2 * base)
    m -= m % (2 * base)

    def quad(k: int) -> float:
        f = _upsample_periodic(fv, k)
        g = f if field2 is None else _upsample_periodic(gv, k)
        row = -_circle_kernel_row(k, L)  # positive quadratic form
        conv = np.fft.irfft(np.fft.rfft(g) * np.fft.rfft(row), n=k)
        return float(np.dot(f, conv)) * (L / k) ** 2

    fine = quad(m)
    if not richardson:
        return fine
    return (4.0 * fine - quad(m // 2)) / 3.0


def residual(sol: JacobiSolution, field: FieldOnGeodesic) -> float:
    """max |U'' - U + F| over the sample grid.

    Periodic solutions are differentiated spectrally (exact for trig
    polynomials); segment solutions use an interior 5-point stencil.
    """
    if field.curve.periodic:
        L = field.curve.length
        uv = sol.U.periodic_values()
        n = len(uv)
        k = _spectral_wavenumbers(n, L)
        upp = np.fft.irfft(-(k**2) * np.fft.rfft(uv), n=n)
        return float(np.max(np.abs(upp - uv + field.periodic_values())))
    s = sol.U.s
    h = s[1] - s[0]
    u = sol.U.values
    upp = (-u[:-4] + 16 * u[1:-3] - 30 * u[2:-2] + 16 * u[3:-1] - u[4:]) / (12 * h**2)
    return float(np.max(np.abs(upp - u[2:-2] + field.values[2:-2])))
