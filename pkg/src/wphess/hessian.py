"""Assembly of the length-functional Hessian and its verification surfaces.

``hessian_closed`` evaluates, for a differential on a cylinder chart, the
two-term second variation of the core-circle length along with the 1/3
lower bound, the maximum-principle upper bound, and the first variation.
The curve-variation term is computed along two routes (energy of the
periodic Jacobi solution, and the cosh-kernel double integral) that must
agree; their residual is part of the report.

``cylinder_family_scan`` drives the one-parameter family of cylinders:
the Weil-Petersson arclength of the family is computed from the pairing
(no convention constants are hard-coded), the core length is a quadratic
function of that arclength, and the finite-difference second derivative
is cross-checked against the formula evaluated on the unit-speed tangent.

``hessian_arc`` regularizes the infinite arc through two cusps: the arc
is modeled as a line whose two tails carry the cusp-chart Beltrami decay
profile, joined by a unit band with a C^1 Hermite blend.  Truncated
problems carry the inhomogeneous boundary values built from the
variation field, and their energies converge to the line-kernel double
integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from . import elliptic, jacobi1d
from .errors import DivergenceError, InputError, PreconditionError, ResolutionError
from .geom import CylinderChart
from .qdiff import (ConstantQD, CuspPrincipalQD, CylinderFourierQD,
                    restrict_im_over_g, restrict_normsq, restrict_re_over_g, wp_pairing)
from .quadrature import (cumulative_gl, deriv1_nonuniform, deriv2_nonuniform,
                         fit_power, trapezoid_periodic)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HessianReport:
    first_term: float
    second_term_energy: float
    second_term_kernel: float
    total: float
    lower_bound_third: float
    upper_bound: float
    first_variation: float
    grid: dict
    diagonal: bool = True

    def to_dict(self) -> dict:
        return {
            "first_term": self.first_term,
            "second_term_energy": self.second_term_energy,
            "second_term_kernel": self.second_term_kernel,
            "total": self.total,
            "lower_bound_third": self.lower_bound_third,
            "upper_bound": self.upper_bound,
            "first_variation": self.first_variation,
            "grid": self.grid,
        }

    def violations(self, nonzero: bool = True) -> list:
        """Invariant violations; empty when the report is consistent."""
        out = []
        if abs(self.total - (self.first_term + self.second_term_energy)) > 1e-12 * max(1.0, abs(self.total)):
            out.append("total != first_term + second_term_energy")
        if abs(self.second_term_energy - self.second_term_kernel) > 1e-7 * max(1.0, abs(self.total)):
            out.append("energy and kernel routes disagree")
        if self.lower_bound_third > self.total + 1e-8:
            out.append("lower bound exceeds total")
        if self.total > self.upper_bound + 1e-8:
            out.append("total exceeds upper bound")
        if self.diagonal and nonzero and not self.total > 0.0:
            out.append("total not positive for a nonzero differential")
        return out


def _is_zero(phi) -> bool:
    if isinstance(phi, ConstantQD):
        return phi.c == 0
    if isinstance(phi, CylinderFourierQD):
        return all(c == 0 for _, c in phi.modes)
    return False


def _mode_dict(phi) -> dict:
    if isinstance(phi, ConstantQD):
        return {0: complex(phi.c)}
    if isinstance(phi, CylinderFourierQD):
        return {n: c for n, c in phi.modes}
    raise PreconditionError("cylinder Hessians need constant or Fourier differentials")


def first_variation(phi, curve=None, n: int = 512) -> float:
    """Integral of Re(phi adapted)/g along the geodesic."""
    if curve is None:
        curve = phi.chart.core_circle()
    fld = restrict_re_over_g(phi, curve, n)
    if curve.periodic:
        return trapezoid_periodic(fld.periodic_values(), curve.length)
    return float(np.trapezoid(fld.values, fld.s))


def _sup_norm_sq(phi, nx: int = 2048) -> float:
    """sup over the chart of |phi|^2 / g^2 on a fine grid."""
    chart = phi.chart
    xs = np.linspace(-chart.x_max * (1 - 1e-6), chart.x_max * (1 - 1e-6), nx)
    modes = _mode_dict(phi)
    ny = 4 * max((abs(n) for n in modes), default=0) + 8
    ys = np.arange(ny) / ny
    z = xs[:, None] + 1j * ys[None, :]
    vals = np.abs(phi.phi(z)) ** 2 / chart.density(z) ** 2
    return float(np.max(vals))


def hessian_closed(phi, psi=None, n: int = 1024, fd_n: int = 8001,
                   kernel_n: int = 4096) -> HessianReport:
    """Two-term Hessian of core-circle length on a cylinder chart.

    With ``psi`` the polarized value is reported; its bound fields carry
    the Cauchy-Schwarz envelope of the two diagonal upper bounds (the 1/3
    sandwich itself only constrains diagonal reports).
    """
    chart = phi.chart
    if not isinstance(chart, CylinderChart):
        raise PreconditionError("hessian_closed runs on a cylinder chart")
    curve = chart.core_circle()
    ell = chart.ell

    if psi is not None and psi is not phi and psi != phi:
        diag_phi = hessian_closed(phi, n=n, fd_n=fd_n, kernel_n=kernel_n)
        diag_psi = hessian_closed(psi, n=n, fd_n=fd_n, kernel_n=kernel_n)
        f_phi = restrict_im_over_g(phi, curve, n)
        f_psi = restrict_im_over_g(psi, curve, n)
        sol_phi = jacobi1d.solve_periodic(f_phi)
        sol_psi = jacobi1d.solve_periodic(f_psi)
        sec_energy = trapezoid_periodic(
            sol_phi.U_y.periodic_values() * sol_psi.U_y.periodic_values()
            + sol_phi.U.periodic_values() * sol_psi.U.periodic_values(), ell)
        sec_kernel = jacobi1d.second_term_kernel(f_phi, field2=f_psi, n=kernel_n)
        first = _first_term_cross(phi, psi, fd_n)
        total = first + sec_energy
        env = math.sqrt(max(diag_phi.upper_bound, 0.0) * max(diag_psi.upper_bound, 0.0))
        return HessianReport(
            first_term=first, second_term_energy=sec_energy,
            second_term_kernel=sec_kernel, total=total,
            lower_bound_third=-env, upper_bound=env,
            first_variation=first_variation(phi, curve, n),
            grid=_grid_meta(n, fd_n, kernel_n), diagonal=False)

    f_phi = restrict_im_over_g(phi, curve, n)
    sol = jacobi1d.solve_periodic(f_phi)
    sec_energy = sol.energy
    sec_kernel = jacobi1d.second_term_kernel(f_phi, n=kernel_n)
    first = elliptic.first_term(phi, n=fd_n)
    total = first + sec_energy

    nsq = restrict_normsq(phi, curve, n)
    int_normsq = trapezoid_periodic(nsq.periodic_values(), ell)
    lower = int_normsq / 3.0
    max_f = float(np.max(np.abs(f_phi.values)))
    upper = ell * (_sup_norm_sq(phi) + max_f**2)

    return HessianReport(
        first_term=first, second_term_energy=sec_energy, second_term_kernel=sec_kernel,
        total=total, lower_bound_third=lower, upper_bound=upper,
        first_variation=first_variation(phi, curve, n),
        grid=_grid_meta(n, fd_n, kernel_n), diagonal=True)


def _grid_meta(n, fd_n, kernel_n) -> dict:
    return {"n": n, "tol": 1e-7,
            "backends": ["fourier", "kernel", "fd"],
            "fd_n": fd_n, "kernel_n": kernel_n}


def _first_term_cross(phi, psi, fd_n: int) -> float:
    """ell * u(0) for (Lap-2)u = -2 Re(phi psibar)/g^2, y-averaged."""
    chart = phi.chart
    ell = chart.ell
    ma, mb = _mode_dict(phi), _mode_dict(psi)
    pairs = [(n, (ma[n] * np.conj(mb[n])).real) for n in ma if n in mb]

    def mean_cross(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for nmode, w in pairs:
            out += w * np.exp(4.0 * math.pi * nmode * x)
        return out

    def rhs(x):
        g = (ell / np.cos(ell * x)) ** 2
        return -2.0 * mean_cross(x) / g

    prof = elliptic.solve_rotational(chart, rhs, "bounded", n=fd_n)
    return ell * prof.u0


def check_two_thirds_inequality(report: HessianReport, ell: float) -> bool:
    """ell * total >= (1/3) first_variation^2, up to 1e-9 slack."""
    return ell * report.total >= report.first_variation**2 / 3.0 - 1e-9


# ---------------------------------------------------------------------------
# the cylinder family
# ---------------------------------------------------------------------------

def wp_norm_dl(ell: float) -> float:
    """Weil-Petersson norm of the unit-core-length-speed family tangent.

    The tangent of the family with d(core length)/dt = 1 is the constant
    differential with coefficient ell (so that the first variation is 1);
    its norm is computed from the pairing, never hard-coded.
    """
    chart = CylinderChart(ell=ell)
    return math.sqrt(wp_pairing(ConstantQD(chart=chart, c=ell)))


@dataclass(frozen=True)
class CylinderFamily:
    """Geometric cylinders parametrized by core length, with WP arclength."""

    l0: float
    l1: float
    steps: int

    def __post_init__(self):
        if not 0 < self.l0 < self.l1:
            raise InputError("need 0 < l0 < l1")
        if self.steps < 5:
            raise ResolutionError("need at least 5 steps for stable second differences")

    def ell_grid(self) -> np.ndarray:
        return np.geomspace(self.l0, self.l1, self.steps)

    def arclength(self, ells: np.ndarray) -> np.ndarray:
        """WP arclength from the degenerate cylinder, s(0) = 0.

        The norm behaves like ell^(-1/2) near 0; the substitution
        ell = u^2 removes the singularity of the head integral.
        """
        head = cumulative_gl(lambda u: 2.0 * u * np.vectorize(wp_norm_dl)(u**2),
                             np.linspace(1e-8, math.sqrt(ells[0]), 33))[-1]
        tail = cumulative_gl(np.vectorize(wp_norm_dl), ells)
        return head + tail


def cylinder_family_scan(l0: float, l1: float, steps: int,
                         fd_n: int = 8001) -> dict:
    """Scan the cylinder family; columns per row:
    s, ell, dl_ds, d2l_ds2, d2_sqrt_l, d2_l23, formula_hess.
    """
    fam = CylinderFamily(l0=l0, l1=l1, steps=steps)
    ells = fam.ell_grid()
    s = fam.arclength(ells)

    dl_ds = deriv1_nonuniform(s, ells)
    d2l = deriv2_nonuniform(s, ells)
    d2sqrt = deriv2_nonuniform(s, np.sqrt(ells))
    d2l23 = deriv2_nonuniform(s, ells ** (2.0 / 3.0))

    formula = np.empty_like(ells)
    norm_law = np.empty_like(ells)
    for i, ell in enumerate(ells):
        chart = CylinderChart(ell=float(ell))
        nrm = wp_norm_dl(float(ell))
        norm_law[i] = nrm**2 * ell
        tangent = ConstantQD(chart=chart, c=float(ell) / nrm)
        formula[i] = hessian_closed(tangent, fd_n=fd_n).total

    kappa, r2 = fit_power(s, ells)
    return {
        "s": s, "ell": ells, "dl_ds": dl_ds, "d2l_ds2": d2l,
        "d2_sqrt_l": d2sqrt, "d2_l23": d2l23, "formula_hess": formula,
        "kappa": kappa, "r2": r2, "norm_sq_times_ell": norm_law,
    }


# ---------------------------------------------------------------------------
# the regularized arc through two cusps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoCuspArc:
    """A complete geodesic modeled as a line with two cusp tails.

    For |s| beyond the half-band the point sits in a cusp chart at
    log-scale xi = xi0 * exp(|s| - band_half); the transverse field
    Im(phi adapted)/g of the principal part c/z along the ray of angle
    pi/2 is Re(c) * xi0^2 * exp(2u - xi0 e^u) with u the depth into the
    cusp.  The unit band joins the tails with a C^1 cubic Hermite blend.
    """

    c_left: complex
    c_right: complex
    band_half: float = 0.5
    xi0: float = 1.0

    def _tail_amp(self, c: complex) -> float:
        return float(np.real(c)) * self.xi0**2

    def _tail(self, u, c):
        return self._tail_amp(c) * np.exp(2.0 * u - self.xi0 * np.exp(u))

    def _tail_prime(self, u, c):
        return self._tail_amp(c) * (2.0 - self.xi0 * np.exp(u)) * np.exp(2.0 * u - self.xi0 * np.exp(u))

    def field(self, s):
        """Transverse field F(s) = Im(phi adapted)/g along the arc."""
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        b = self.band_half
        right = s >= b
        left = s <= -b
        mid = ~(right | left)
        out[right] = self._tail(s[right] - b, self.c_right)
        out[left] = self._tail(-s[left] - b, self.c_left)
        if np.any(mid):
            out[mid] = self._hermite(s[mid], deriv=False)
        return out

    def field_prime(self, s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        b = self.band_half
        right = s >= b
        left = s <= -b
        mid = ~(right | left)
        out[right] = self._tail_prime(s[right] - b, self.c_right)
        out[left] = -self._tail_prime(-s[left] - b, self.c_left)
        if np.any(mid):
            out[mid] = self._hermite(s[mid], deriv=True)
        return out

    def _hermite(self, s, deriv: bool):
        b = self.band_half
        vl, vr = self._tail(0.0, self.c_left), self._tail(0.0, self.c_right)
        sl = -self._tail_prime(0.0, self.c_left)
        sr = self._tail_prime(0.0, self.c_right)
        t = (np.asarray(s, dtype=float) + b) / (2.0 * b)
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        if not deriv:
            return vl * h00 + sl * (2 * b) * h10 + vr * h01 + sr * (2 * b) * h11
        d00 = (6 * t**2 - 6 * t) / (2 * b)
        d10 = (3 * t**2 - 4 * t + 1) / (2 * b)
        d01 = (-6 * t**2 + 6 * t) / (2 * b)
        d11 = (3 * t**2 - 2 * t) / (2 * b)
        return vl * d00 + sl * (2 * b) * d10 + vr * d01 + sr * (2 * b) * d11

    def im_mu(self, s):
        return -self.field(s)

    def im_mu_prime(self, s):
        return -self.field_prime(s)

    def norm_sq_tail(self, u, c):
        """|phi|^2/g^2 along a tail at depth u."""
        xi = self.xi0 * np.exp(u)
        return abs(c) ** 2 * xi**4 * np.exp(-2.0 * xi)

    def breakpoints(self, half_len: float) -> np.ndarray:
        inner = [p for p in (-self.band_half, self.band_half) if abs(p) < half_len]
        return np.array([-half_len, *inner, half_len])


def _arc_partition(arc: TwoCuspArc, half_len: float, per_unit: int = 8) -> np.ndarray:
    pieces = [np.linspace(a, b, max(3, int(per_unit * (b - a)) + 1))
              for a, b in zip(arc.breakpoints(half_len)[:-1], arc.breakpoints(half_len)[1:])]
    return np.unique(np.concatenate(pieces))


def line_kernel_energy(arc: TwoCuspArc, half_len: float = 20.0) -> float:
    """(1/2) double integral of exp(-|s-y|) im_mu(s) im_mu(y)."""
    pts = _arc_partition(arc, half_len)
    fwd = cumulative_gl(lambda y: np.exp(y) * arc.im_mu(y), pts)
    rev = cumulative_gl(lambda y: np.exp(-y) * arc.im_mu(y), pts)
    back = rev[-1] - rev
    inner = np.exp(-pts) * fwd + np.exp(pts) * back

    # integrate im_mu(s) * inner(s); reuse the partition with an interpolant
    from scipy.interpolate import CubicSpline
    spline = CubicSpline(pts, inner)
    val = cumulative_gl(lambda sv: arc.im_mu(sv) * spline(sv), pts)[-1]
    return 0.5 * float(val)


def _arc_first_term_profile(arc: TwoCuspArc, u_max: float, n: int = 4001):
    """Bounded solution of the cusp-tail radial problem, per tail.

    In log-scale u the y-averaged equation reads H'' - H' - 2H = f with
    f = -2 |c|^2 xi0^4 exp(4u - 2 xi0 e^u); homogeneous solutions are
    exp(2u) and exp(-u).  Dirichlet data: the maximum-principle cap at
    the band edge and decay at depth.
    """
    profiles = {}
    for side, c in (("left", arc.c_left), ("right", arc.c_right)):
        u = np.linspace(0.0, u_max, n)
        h = u[1] - u[0]
        f = -2.0 * arc.norm_sq_tail(u, c)
        cap = float(np.max(-f / 2.0))
        m = n - 2
        ab = np.zeros((3, m))
        ab[0, 1:] = 1.0 / h**2 - 1.0 / (2 * h)
        ab[1, :] = -2.0 / h**2 - 2.0
        ab[2, :-1] = 1.0 / h**2 + 1.0 / (2 * h)
        b = f[1:-1].copy()
        b[0] -= (1.0 / h**2 + 1.0 / (2 * h)) * cap
        from scipy.linalg import solve_banded
        interior = solve_banded((1, 1), ab, b)
        H = np.concatenate(([cap], interior, [0.0]))
        profiles[side] = (u, H)
    return profiles


def hessian_arc(phi, lengths: Sequence[float], phi_right=None,
                line_half_len: float = 20.0) -> dict:
    """Truncated second variations of a two-cusp arc and their limit.

    ``phi`` (and optionally ``phi_right``) are cusp principal parts; a
    single input gives a symmetric arc.  For each truncation length L the
    segment problem U'' - U = im_mu is solved with the inhomogeneous
    boundary values V'(endpoint) - im_mu(endpoint), where V is the
    variation field; the homogeneous coefficients (a, b), the energy, and
    the model first term are reported, together with the line-kernel
    limit of the energies.
    """
    phi_l = phi
    phi_r = phi_right if phi_right is not None else phi
    for p in (phi_l, phi_r):
        if not isinstance(p, CuspPrincipalQD):
            raise PreconditionError("arc Hessians take cusp principal parts")
        if p.c2 != 0:
            raise DivergenceError("second-order pole gives a non-decaying Beltrami field")
    arc = TwoCuspArc(c_left=phi_l.c, c_right=phi_r.c)

    lengths = sorted(float(L) for L in lengths)
    u_max = max(lengths[-1] / 2.0 - arc.band_half, 1.0) + 2.0
    tails = _arc_first_term_profile(arc, u_max)

    rows = []
    for L in lengths:
        half = L / 2.0
        pts = _arc_partition(arc, half)
        shL = math.sinh(L)
        vp = -cumulative_gl(lambda t: np.sinh(half - t) / shL * arc.im_mu_prime(t), pts)[-1]
        vq = cumulative_gl(lambda t: np.sinh(half + t) / shL * arc.im_mu_prime(t), pts)[-1]
        bv_p = vp - float(arc.im_mu(-half))
        bv_q = vq - float(arc.im_mu(half))
        sol = jacobi1d.solve_segment(lambda y: arc.field(y), boundary=(bv_p, bv_q), L=L)
        rows.append({
            "L": L, "a": sol.a, "b": sol.b, "energy": sol.energy,
            "first_term": _arc_first_term(arc, tails, half),
        })

    limit = line_kernel_energy(arc, half_len=line_half_len)
    return {"rows": rows, "line_kernel_value": limit, "arc": arc}


def _arc_first_term(arc: TwoCuspArc, tails, half: float) -> float:
    """Integral of the model first-term profile over the truncated arc."""
    (ul, Hl) = tails["left"]
    (ur, Hr) = tails["right"]
    b = arc.band_half

    def profile(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        right = s >= b
        left = s <= -b
        mid = ~(right | left)
        out[right] = np.interp(s[right] - b, ur, Hr)
        out[left] = np.interp(-s[left] - b, ul, Hl)
        if np.any(mid):
            # linear blend across the band between the two edge values
            t = (s[mid] + b) / (2 * b)
            out[mid] = (1 - t) * Hl[0] + t * Hr[0]
        return out

    pts = _arc_partition(arc, half)
    return float(cumulative_gl(profile, pts)[-1])
