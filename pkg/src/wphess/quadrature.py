"""Quadrature and small numerics helpers used throughout the library.

Conventions: composite Gauss-Legendre on segments (default 8 nodes per
panel), trapezoid sums on periodic data, and 3-point finite differences
on possibly non-uniform scan grids.
"""

from __future__ import annotations

import numpy as np

from .errors import FitError

GL_ORDER = 8


def gl_panels(a: float, b: float, npanels: int, order: int = GL_ORDER):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, npanels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_gl(f, a: float, b: float, npanels: int = 32, order: int = GL_ORDER) -> float:
    nodes, weights = gl_panels(a, b, npanels, order)
    return float(np.dot(weights, f(nodes)))


def cumulative_gl(f, points: np.ndarray, order: int = GL_ORDER) -> np.ndarray:
    """Cumulative integral of ``f`` from points[0] to each entry of ``points``.

    ``points`` must be sorted; each gap is integrated with one
    Gauss-Legendre rule, so ``f`` should be smooth between consecutive
    points (put breakpoints of piecewise functions into ``points``).
    """
    points = np.asarray(points, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (points[:-1] + points[1:])
    half = 0.5 * np.diff(points)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = np.asarray(f(nodes), dtype=float).reshape(len(half), order)
    per_gap = half * (vals @ w)
    out = np.empty_like(points)
    out[0] = 0.0
    np.cumsum(per_gap, out=out[1:])
    return out


def trapezoid_periodic(values: np.ndarray, period: float) -> float:
    """Trapezoid sum of samples on a uniform periodic grid.

    ``values`` covers one period without the duplicated endpoint.
    """
    values = np.asarray(values, dtype=float)
    return float(values.sum() * (period / len(values)))


def cosh_ratio(rate: float, x, x_ref: float):
    """cosh(rate*x) / cosh(rate*x_ref), overflow-safe for large arguments."""
    ax = np.abs(np.asarray(x, dtype=float))
    num = np.exp(rate * (ax - x_ref)) * (1.0 + np.exp(-2.0 * rate * ax))
    return num / (1.0 + np.exp(-2.0 * rate * x_ref))


def fit_loglog(x, y):
    """Least-squares slope/intercept of log y against log x, with R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise FitError("need at least 3 points for a log-log fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("log-log fit requires positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_power(x, y):
    """Least-squares fit of y = k*x^2 through the origin, with R^2 on y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = float(np.dot(x**2, y) / np.dot(x**2, x**2))
    resid = y - k * x**2
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return k, r2


def deriv1_nonuniform(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """First derivative on a non-uniform grid, 3-point interior stencils.

    Exact for quadratics; endpoints use one-sided 3-point formulas.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    out = np.empty(n)
    for i in range(n):
        j = min(max(i, 1), n - 2)
        x0, x1, x2 = x[j - 1], x[j], x[j + 1]
        y0, y1, y2 = y[j - 1], y[j], y[j + 1]
        t = x[i]
        out[i] = (
            y0 * (2 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2 * t - x0 - x1) / ((x2 - x0) * (x2 - x1))
        )
    return out


def deriv2_nonuniform(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivative on a non-uniform grid (3-point, exact for quadratics)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    out = np.empty(n)
    for i in range(n):
        j = min(max(i, 1), n - 2)
        x0, x1, x2 = x[j - 1], x[j], x[j + 1]
        y0, y1, y2 = y[j - 1], y[j], y[j + 1]
        out[i] = 2.0 * (
            y0 / ((x0 - x1) * (x0 - x2))
            + y1 / ((x1 - x0) * (x1 - x2))
            + y2 / ((x2 - x0) * (x2 - x1))
        )
    return out
