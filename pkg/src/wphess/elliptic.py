"""The surface-side term: (Lap_g - 2) u = rhs in rotationally symmetric form.

On the cylinder the Laplace-Beltrami operator is (1/g) d^2/dx^2 for
y-averaged functions (the density does not depend on y, so integrating
the 2-D equation over the circles is exact), which turns every solve
needed here into the one-dimensional boundary value problem

    u''(x) - 2 g(x) u(x) = rhs(x),        g(x) = ell^2 sec^2(ell x).

The homogeneous solutions are u1(x) = tan(ell x) and
u2(x) = x tan(ell x) + 1/ell (Wronskian -1), which power the
variation-of-parameters oracle and the exact bounded solution on the
complete cylinder.  The finite-difference path is a tridiagonal solve
with one Richardson step.

Also here: the pointwise subsolution gap for |phi|^2/g^2, the
cosh(sqrt(8) pi x) collar decay bound for zero-period differentials, the
small-ell scaling ladder for the collar boundary value problem, and the
cusp decay of the Beltrami field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConditioningError, DomainError, FitError, PreconditionError
from .geom import CuspChart, CylinderChart, DiskChart
from .qdiff import ConstantQD, CylinderFourierQD, CuspPrincipalQD, mu_abs, norm_sq
from .quadrature import cosh_ratio, cumulative_gl, fit_loglog

DECAY_RATE = math.sqrt(8.0) * math.pi


# ---------------------------------------------------------------------------
# radial profiles and the finite-difference solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """Solution of u'' - 2 g u = rhs on a symmetric grid."""

    x: np.ndarray
    u: np.ndarray
    rhs: np.ndarray
    g: np.ndarray
    bc: str

    @property
    def u0(self) -> float:
        """Value at x = 0 (the grid always contains the center)."""
        return float(self.u[len(self.u) // 2])

    def residual(self) -> float:
        """max |u'' - 2 g u - rhs| on interior nodes, 5-point differences."""
        h = self.x[1] - self.x[0]
        u = self.u
        upp = (-u[:-4] + 16 * u[1:-3] - 30 * u[2:-2] + 16 * u[3:-1] - u[4:]) / (12 * h**2)
        r = upp - 2.0 * self.g[2:-2] * u[2:-2] - self.rhs[2:-2]
        return float(np.max(np.abs(r)))


def _fd_solve(ell: float, rhs: Callable, x_max: float, n: int, alpha: float, beta: float):
    x = np.linspace(-x_max, x_max, n)
    h = x[1] - x[0]
    g = (ell / np.cos(ell * x)) ** 2
    f = np.asarray(rhs(x), dtype=float)
    m = n - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = 1.0 / h**2
    ab[1, :] = -2.0 / h**2 - 2.0 * g[1:-1]
    ab[2, :-1] = 1.0 / h**2
    b = f[1:-1].copy()
    b[0] -= alpha / h**2
    b[-1] -= beta / h**2
    interior = solve_banded((1, 1), ab, b)
    u = np.concatenate(([alpha], interior, [beta]))
    return x, u, f, g


def solve_rotational(chart: CylinderChart, rhs: Callable, bc,
                     n: int = 8001, x_max: Optional[float] = None,
                     richardson: bool = True) -> RadialProfile:
    """Solve u'' - 2 g u = rhs on [-x_max, x_max].

    ``bc`` is either a Dirichlet pair (alpha, beta) or the string
    ``"bounded"``.  The bounded condition is realized on a truncated
    domain: an outer solve with Dirichlet values from the maximum
    principle cap sup(-rhs / 2g), whose values then supply the Dirichlet
    data for the final inner solve (one outward iteration; the residual
    boundary influence on the center scales with the truncation gap).

    A Richardson step (grids n and 2n-1) upgrades the second-order
    differences to fourth order.
    """
    ell = chart.ell
    if bc == "bounded":
        outer_x = (1.0 - 1e-4) * chart.x_max
        inner_x = x_max if x_max is not None else (1.0 - 1e-3) * chart.x_max
        if inner_x >= outer_x:
            raise ConditioningError("bounded solve needs the target domain inside the outer one")
        xo = np.linspace(-outer_x, outer_x, n)
        go = (ell / np.cos(ell * xo)) ** 2
        cap = float(max(0.0, np.max(-np.asarray(rhs(xo), dtype=float) / (2.0 * go))))
        outer = solve_rotational(chart, rhs, (cap, cap), n=n, x_max=outer_x,
                                 richardson=richardson)
        val = float(np.interp(inner_x, outer.x, outer.u))
        val_m = float(np.interp(-inner_x, outer.x, outer.u))
        return solve_rotational(chart, rhs, (val_m, val), n=n, x_max=inner_x,
                                richardson=richardson)

    alpha, beta = float(bc[0]), float(bc[1])
    if x_max is None:
        raise DomainError("Dirichlet solves need an explicit x_max")
    if x_max >= (1.0 - 1e-8) * chart.x_max:
        raise ConditioningError(
            "sec^2 blows up at the chart edge; shrink the domain below pi/(2 ell)")
    if n % 2 == 0:
        n += 1  # keep x = 0 on the grid
    x, u, f, g = _fd_solve(ell, rhs, x_max, n, alpha, beta)
    if richardson:
        _, uf, _, _ = _fd_solve(ell, rhs, x_max, 2 * n - 1, alpha, beta)
        u = (4.0 * uf[::2] - u) / 3.0
    return RadialProfile(x=x, u=u, rhs=f, g=g, bc="dirichlet")


# ---------------------------------------------------------------------------
# variation-of-parameters oracle and the exact bounded solution
# ---------------------------------------------------------------------------

def _u1(ell, x):
    return np.tan(ell * x)


def _u2(ell, x):
    return x * np.tan(ell * x) + 1.0 / ell


def homogeneous_residual(chart: CylinderChart, x: np.ndarray) -> float:
    """max |u1'' - 2 g u1| by 5-point differences (u1 solves it exactly)."""
    ell = chart.ell
    h = 1e-4
    out = 0.0
    for xi in np.asarray(x, dtype=float):
        stencil = xi + h * np.arange(-2, 3)
        vals = _u1(ell, stencil)
        upp = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h**2)
        g = (ell / math.cos(ell * xi)) ** 2
        out = max(out, abs(upp - 2.0 * g * vals[2]))
    return out


def _vop_partition(x_max: float, x_eval: np.ndarray) -> np.ndarray:
    pts = np.unique(np.concatenate([
        np.asarray(x_eval, dtype=float), [-x_max, 0.0, x_max],
        np.linspace(-x_max, x_max, 257),
    ]))
    return pts


def solve_rotational_vop(chart: CylinderChart, rhs: Callable, bc: Tuple[float, float],
                         x_max: float, x_eval: np.ndarray) -> np.ndarray:
    """Dirichlet solution via variation of parameters (independent oracle)."""
    ell = chart.ell
    pts = _vop_partition(x_max, x_eval)
    v1 = cumulative_gl(lambda t: _u2(ell, t) * rhs(t), pts)
    v2 = -cumulative_gl(lambda t: _u1(ell, t) * rhs(t), pts)
    i0 = int(np.searchsorted(pts, 0.0))
    v1 -= v1[i0]
    v2 -= v2[i0]
    up = _u1(ell, pts) * v1 + _u2(ell, pts) * v2
    # fit c1 u1 + c2 u2 to the boundary residuals
    mat = np.array([[_u1(ell, -x_max), _u2(ell, -x_max)],
                    [_u1(ell, x_max), _u2(ell, x_max)]])
    res = np.array([bc[0] - up[0], bc[1] - up[-1]])
    c1, c2 = np.linalg.solve(mat, res)
    total = up + c1 * _u1(ell, pts) + c2 * _u2(ell, pts)
    return np.interp(np.asarray(x_eval, dtype=float), pts, total)


def bounded_vop(chart: CylinderChart, rhs: Callable, x_eval: np.ndarray) -> np.ndarray:
    """The unique bounded solution on the complete cylinder.

    Both homogeneous solutions blow up at the chart edges, where
    u2 ~ +-(pi/(2 ell)) u1; boundedness therefore pins the two
    integration constants of the particular solution (the combination
    v1 -+ E v2 must vanish at -+E).  Requires rhs integrable against u1,
    u2 up to the edges (rhs proportional to 1/g qualifies).
    """
    ell = chart.ell
    E = chart.x_max
    pts = _vop_partition(E, x_eval)
    p1 = cumulative_gl(lambda t: _u2(ell, t) * rhs(t), pts)
    p2 = cumulative_gl(lambda t: _u1(ell, t) * rhs(t), pts)
    a2 = (E * p2[-1] - p1[-1]) / (2.0 * E)
    a1 = E * a2
    v1 = p1 + a1
    v2 = -p2 + a2
    total = _u1(ell, pts) * v1 + _u2(ell, pts) * v2
    return np.interp(np.asarray(x_eval, dtype=float), pts, total)


# ---------------------------------------------------------------------------
# the first Hessian term
# ---------------------------------------------------------------------------

def _mean_norm_sq(phi) -> Callable:
    """y-average of |phi|^2 as a closed-form function of x."""
    if isinstance(phi, ConstantQD):
        c2 = abs(phi.c) ** 2
        return lambda x: c2 * np.ones_like(np.asarray(x, dtype=float))
    if isinstance(phi, CylinderFourierQD):
        return phi.mode_power
    raise PreconditionError("first_term needs a constant or Fourier differential")


def first_term(phi, n: int = 8001) -> float:
    """Integral over the core circle of the solution of (Lap-2)u = -2|phi|^2/g^2.

    The y-averaged reduction is exact on the cylinder, so the integral is
    ell * u(0) with u from the bounded radial solve of
    u'' - 2 g u = -2 * mean|phi|^2 / g.
    """
    chart = phi.chart
    if not isinstance(chart, CylinderChart):
        raise PreconditionError("first_term is defined on the cylinder chart")
    q = _mean_norm_sq(phi)
    ell = chart.ell

    def rhs(x):
        g = (ell / np.cos(ell * x)) ** 2
        return -2.0 * q(x) / g

    profile = solve_rotational(chart, rhs, "bounded", n=n)
    return chart.ell * profile.u0


def first_term_vop(phi) -> float:
    """Exact-bounded-solution oracle for ``first_term``."""
    chart = phi.chart
    q = _mean_norm_sq(phi)
    ell = chart.ell

    def rhs(x):
        g = (ell / np.cos(ell * x)) ** 2
        return -2.0 * q(x) / g

    u0 = bounded_vop(chart, rhs, np.array([0.0]))[0]
    return chart.ell * float(u0)


# ---------------------------------------------------------------------------
# subsolution gap
# ---------------------------------------------------------------------------

def subsolution_gap(phi, n_samples: int = 10_000, seed: int = 0,
                    h: float = 5e-3, zero_margin: float = 1e-4,
                    disk_annulus: Tuple[float, float] = (0.1, 0.9)):
    """min over samples of Lap_g(|phi|^2/g^2) + 4 |phi|^2/g^2.

    The Laplacian is a fourth-order 9-point stencil divided by the
    density.  Points where |phi|^2/g^2 falls below ``zero_margin`` times
    the sample maximum are skipped (the inequality degenerates at zeros
    of phi).  Returns (min_gap, n_used, n_skipped).
    """
    chart = phi.chart
    rng = np.random.default_rng(seed)
    if isinstance(chart, CylinderChart):
        xmax = chart.x_max - 4.0 * h
        z = rng.uniform(-xmax, xmax, n_samples) + 1j * rng.uniform(0, 1, n_samples)
    elif isinstance(chart, DiskChart):
        lo, hi = disk_annulus
        r = np.sqrt(rng.uniform(lo**2, hi**2, n_samples))
        z = r * np.exp(2j * math.pi * rng.uniform(0, 1, n_samples))
    elif isinstance(chart, CuspChart):
        r = np.exp(rng.uniform(math.log(0.1), math.log(0.9), n_samples))
        z = r * np.exp(2j * math.pi * rng.uniform(0, 1, n_samples))
    else:
        raise DomainError(f"unsupported chart {chart!r}")

    q = norm_sq(phi, z)
    keep = q >= zero_margin * np.max(q)
    zk = z[keep]

    def Q(w):
        return norm_sq(phi, w)

    lap = np.zeros(len(zk))
    for step in (h, 1j * h):
        lap += (-Q(zk + 2 * step) + 16 * Q(zk + step) - 30 * Q(zk)
                + 16 * Q(zk - step) - Q(zk - 2 * step)) / (12 * h**2)
    gap = lap / chart.density(zk) + 4.0 * q[keep]
    return float(np.min(gap)), int(keep.sum()), int((~keep).sum())


# ---------------------------------------------------------------------------
# collar decay bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayBound:
    """Bound C0 cosh(sqrt(8) pi x0) / cosh(sqrt(8) pi x_max) for line integrals."""

    c0: float
    x_max: float
    rate: float = DECAY_RATE

    def bound(self, x0):
        return self.c0 * cosh_ratio(self.rate, x0, self.x_max)


def collar_decay_bound(phi: CylinderFourierQD, x_max: Optional[float] = None) -> DecayBound:
    """Decay bound object for a zero-period Fourier differential.

    The boundary constant C0 is the larger of the two boundary line
    integrals of |phi|^2 over the collar edges.
    """
    if not isinstance(phi, CylinderFourierQD) or not phi.zero_mean():
        raise PreconditionError("the decay bound requires a vanishing zero mode")
    chart = phi.chart
    if x_max is None:
        x_max = chart.collar_half_width
    if x_max <= 0:
        raise DomainError("no embedded collar for ell >= 1; pass x_max explicitly")
    c0 = float(max(phi.mode_power(x_max), phi.mode_power(-x_max)))
    return DecayBound(c0=c0, x_max=x_max)


def verify_collar_decay(phi: CylinderFourierQD, n_grid: int = 801,
                        x_max: Optional[float] = None, slack: float = 1e-9) -> bool:
    """Check the line integrals of |phi|^2 against the cosh bound on a grid."""
    db = collar_decay_bound(phi, x_max=x_max)
    xs = np.linspace(-db.x_max, db.x_max, n_grid)
    line = phi.mode_power(xs)
    return bool(np.all(line <= db.bound(xs) * (1.0 + slack) + 1e-300))


# ---------------------------------------------------------------------------
# the small-ell boundary value problem ladder
# ---------------------------------------------------------------------------

def flatparallel_scaling(ells: Sequence[float], c0: float = 1.0,
                         d3: Optional[float] = None, n: int = 8001) -> dict:
    """Scaling of the collar boundary value problem across an ell ladder.

    For each ell, solve u'' - 2 ell^2 sec^2(ell x) u = rhs with
    u(+-X) = c0 on the embedded collar X = (1/ell) asec(1/ell), where the
    forcing is the decaying-differential profile
    rhs(x) = D3 cosh(sqrt(8) pi x) cos^2(ell x).  By default D3 is tied
    to the boundary data, D3 = c0 / (ell^2 cosh(sqrt(8) pi X)), so that
    the forcing at the collar edge is O(c0) uniformly in ell (an explicit
    ``d3`` overrides this).  Returns log-log slopes of u(0) (expected 1)
    and of ell * u(0), the geodesic integral of u (expected 2), plus the
    boundary ratio of the first variation-of-parameters product to the
    full particular solution.
    """
    if len(ells) < 3:
        raise FitError("need at least 3 ell values for the scaling fit")
    u0s, integrals, edge_ratios = [], [], []
    for ell in ells:
        chart = CylinderChart(ell=float(ell))
        X = chart.collar_half_width
        if X <= 0:
            raise DomainError("scaling ladder needs ell < 1")

        if d3 is None:
            def rhs(x, _ell=ell, _X=X):
                return (c0 / _ell**2) * cosh_ratio(DECAY_RATE, x, _X) * np.cos(_ell * x) ** 2
        else:
            def rhs(x, _ell=ell, _X=X):
                return d3 * np.cosh(DECAY_RATE * x) * np.cos(_ell * x) ** 2

        prof = solve_rotational(chart, rhs, (c0, c0), n=n, x_max=X)
        u0s.append(prof.u0)
        integrals.append(ell * prof.u0)

        pts = _vop_partition(X, np.array([0.0]))
        v1 = cumulative_gl(lambda t: _u2(ell, t) * rhs(t), pts)
        v2 = -cumulative_gl(lambda t: _u1(ell, t) * rhs(t), pts)
        i0 = int(np.searchsorted(pts, 0.0))
        v1 -= v1[i0]
        v2 -= v2[i0]
        t1 = _u1(ell, pts[-1]) * v1[-1]
        t2 = _u2(ell, pts[-1]) * v2[-1]
        edge_ratios.append(abs(t1) / abs(t1 + t2))

    slope_u0, _, _ = fit_loglog(ells, u0s)
    slope_int, _, _ = fit_loglog(ells, integrals)
    return {
        "ells": list(map(float, ells)),
        "u0": u0s,
        "integral": integrals,
        "edge_ratio": edge_ratios,
        "slope_u0": slope_u0,
        "slope_integral": slope_int,
    }


# ---------------------------------------------------------------------------
# cusp decay of the Beltrami field
# ---------------------------------------------------------------------------

def cusp_mu_decay(phi: CuspPrincipalQD, rs: Sequence[float], n_theta: int = 16) -> float:
    """sup over samples of |mu|(r e^{i theta}) / (r (log 1/r)^2).

    Equals |c| exactly for the pure principal part c/z.
    """
    rs = np.asarray(rs, dtype=float)
    if np.any(rs <= 0) or np.any(rs >= 1):
        raise DomainError("radii must lie in (0, 1)")
    thetas = 2.0 * math.pi * np.arange(n_theta) / n_theta
    z = rs[:, None] * np.exp(1j * thetas[None, :])
    ratio = mu_abs(phi, z) / (rs[:, None] * np.log(1.0 / rs[:, None]) ** 2)
    return float(np.max(ratio))
