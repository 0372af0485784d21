"""Globally optimal 1D reparametrization.

Minimizes ``J(y) = int_0^1 m(y) y'(x)^2 dx`` over increasing bijections of
[0, 1].  With ``F(y) = int_0^y sqrt(m)`` the first integral
``sqrt(m(y)) y' = const`` gives ``y*(x) = F^{-1}(F(1) x)`` and
``J(y*) = F(1)^2``; Cauchy-Schwarz makes that value a global lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import DegeneratePathError, InvalidDensityError, InvalidInputError

# Sub-intervals used to tabulate F = int sqrt(m) (per-interval Simpson).
FINE_GRID = 8192
BISECTION_TOL = 1e-12
WARP_FLOOR = 1e-6


class ScalarDensity:
    """Positive weight ``m`` on [0, 1].

    Wraps either a vectorized callable or a table of samples.  Tables are
    interpolated with a monotone cubic (PCHIP), which cannot overshoot below
    the smallest sample, so positive tables stay positive.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], name: str = "custom", samples=None):
        self._func = func
        self.name = name
        self.samples = samples

    @classmethod
    def constant(cls, value: float) -> "ScalarDensity":
        if value <= 0:
            raise InvalidDensityError(f"density must be positive, got {value!r}")
        return cls(lambda y: np.full(np.shape(y), float(value)), name=f"const({value:g})")

    @classmethod
    def from_samples(cls, s, m, name: str = "table") -> "ScalarDensity":
        s = np.asarray(s, dtype=float)
        m = np.asarray(m, dtype=float)
        if s.ndim != 1 or s.shape != m.shape or len(s) < 3:
            raise InvalidDensityError("tabulated density needs matching 1-d arrays with >= 3 samples")
        if np.any(np.diff(s) <= 0):
            raise InvalidDensityError("tabulated density grid must be strictly increasing")
        if abs(s[0]) > 1e-12 or abs(s[-1] - 1.0) > 1e-12:
            raise InvalidDensityError("tabulated density must cover [0, 1]")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise InvalidDensityError("tabulated density has non-positive samples")
        return cls(PchipInterpolator(s, m, extrapolate=True), name=name, samples=(s, m))

    def __call__(self, y):
        vals = np.asarray(self._func(np.asarray(y, dtype=float)), dtype=float)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise InvalidDensityError(f"density {self.name!r} is not positive on the queried points")
        return vals

    def __repr__(self):
        return f"ScalarDensity({self.name!r})"


@dataclass(frozen=True)
class MonotoneMap:
    """Sampled increasing bijection of [0, 1], linear between samples."""

    x: np.ndarray
    y: np.ndarray
    dydx: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or len(x) < 2:
            raise InvalidInputError("MonotoneMap needs matching 1-d arrays with >= 2 samples")
        for name, v in (("x", x), ("y", y)):
            if abs(v[0]) > 1e-12 or abs(v[-1] - 1.0) > 1e-12:
                raise InvalidInputError(f"MonotoneMap {name} must run from 0 to 1")
            if np.any(np.diff(v) <= 0):
                raise InvalidInputError(f"MonotoneMap {name} must be strictly increasing")
        x = x.copy()
        y = y.copy()
        x[0], x[-1], y[0], y[-1] = 0.0, 1.0, 0.0, 1.0
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __call__(self, x):
        return np.interp(x, self.x, self.y)

    def inverse(self) -> "MonotoneMap":
        return MonotoneMap(self.y, self.x)

    def compose(self, inner: "MonotoneMap") -> "MonotoneMap":
        """``self o inner`` sampled on the union of both grids."""
        grid = np.union1d(inner.x, inner.inverse()(self.x))
        return MonotoneMap(grid, self(inner(grid)))

    @classmethod
    def identity(cls, K: int = 1) -> "MonotoneMap":
        g = np.linspace(0.0, 1.0, K + 1)
        return cls(g, g)


@dataclass(frozen=True)
class SampledPath:
    """Points ``X[k]`` in R^d observed at strictly increasing times ``t[k]``."""

    t: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if t.ndim != 1 or X.ndim != 2 or len(t) != len(X) or X.shape[1] < 1:
            raise InvalidInputError("SampledPath needs times (n,) and points (n, d)")
        if len(t) < 3 or np.any(np.diff(t) <= 0):
            raise InvalidInputError("SampledPath times must be strictly increasing (>= 3 samples)")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "X", X)


def _simpson_pieces(f, grid):
    """Per-interval Simpson integrals of ``f`` over consecutive grid points."""
    mid = 0.5 * (grid[:-1] + grid[1:])
    fg = f(grid)
    return (np.diff(grid) / 6.0) * (fg[:-1] + 4.0 * f(mid) + fg[1:])


class _RootDensityIntegral:
    """Tabulated ``F(y) = int_0^y sqrt(m)`` with Hermite interpolation.

    ``F' = sqrt(m)`` is known exactly at the nodes, so the cubic Hermite
    interpolant is fourth-order accurate, and it is monotone because F is.
    """

    def __init__(self, m: ScalarDensity, n: int = FINE_GRID):
        u = np.linspace(0.0, 1.0, n + 1)
        root = lambda y: np.sqrt(m(y))
        F = np.concatenate([[0.0], np.cumsum(_simpson_pieces(root, u))])
        self.u = u
        self.F = F
        self.dF = root(u)
        self.total = float(F[-1])

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        h = self.u[1] - self.u[0]
        i = np.clip(((y - self.u[0]) / h).astype(int), 0, len(self.u) - 2)
        s = (y - self.u[i]) / h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * self.F[i] + h10 * h * self.dF[i] + h01 * self.F[i + 1] + h11 * h * self.dF[i + 1]

    def inverse(self, target):
        """Vectorized bisection for ``F(y) = target``."""
        target = np.asarray(target, dtype=float)
        lo = np.zeros_like(target)
        hi = np.ones_like(target)
        while np.max(hi - lo, initial=0.0) > BISECTION_TOL:
            mid = 0.5 * (lo + hi)
            below = self(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


def optimal_cost(m: ScalarDensity, n: int = FINE_GRID) -> float:
    """``(int_0^1 sqrt(m(y)) dy)^2``, the minimum of J over all maps."""
    grid = np.linspace(0.0, 1.0, n + 1)
    return float(np.sum(_simpson_pieces(lambda y: np.sqrt(m(y)), grid)) ** 2)


def solve_reparam(m: ScalarDensity, K: int = 1000) -> MonotoneMap:
    """Global minimizer of ``int m(y) y'^2`` sampled on ``K + 1`` uniform nodes.

    The returned map also carries the exact slope ``F(1) / sqrt(m(y*))``.
    """
    if K < 2:
        raise InvalidInputError("grid size K must be >= 2")
    F = _RootDensityIntegral(m)
    x = np.linspace(0.0, 1.0, K + 1)
    y = F.inverse(F.total * x)
    y[0], y[-1] = 0.0, 1.0
    if np.any(np.diff(y) <= 0):
        raise InvalidDensityError("density too large for the grid: optimal map not resolved")
    return MonotoneMap(x, y, dydx=F.total / np.sqrt(m(y)))


def path_cost(m: ScalarDensity, ymap: MonotoneMap) -> float:
    """``int_0^1 m(y(x)) y'(x)^2 dx`` for the piecewise-linear map.

    On each segment ``y' = dy/dx`` is constant, so the segment contributes
    ``(dy/dx) int m(y) dy`` exactly; the inner integral is Simpson.  Cauchy-
    Schwarz applies segment by segment, so the value never falls below
    ``optimal_cost`` beyond quadrature error, for any map.
    """
    dx = np.diff(ymap.x)
    dy = np.diff(ymap.y)
    return float(np.sum((dy / dx) * _simpson_pieces(m, ymap.y)))


def first_integral(m: ScalarDensity, ymap: MonotoneMap):
    """``sqrt(m(y)) y'`` at the nodes; constant along the optimum."""
    slope = ymap.dydx if ymap.dydx is not None else np.gradient(ymap.y, ymap.x, edge_order=2)
    return np.sqrt(m(ymap.y)) * slope


def warp_trajectory(path: SampledPath, K: int | None = None, floor: float = WARP_FLOOR):
    """Retime a sampled path to constant speed.

    Time is normalized to [0, 1]; the density is ``m(tau) = |X'(tau)|^2``
    from a cubic spline through the samples, floored at
    ``floor * mean(m)`` so brief stops do not break positivity.  Returns the
    optimal map and the path resampled at ``tau*(t)`` on a uniform grid of
    the original time span.
    """
    if K is None:
        K = len(path.t) - 1
    t0, t1 = path.t[0], path.t[-1]
    tau = (path.t - t0) / (t1 - t0)
    spline = CubicSpline(tau, path.X, axis=0)
    dspline = spline.derivative()
    probe = np.linspace(0.0, 1.0, 4 * len(tau) + 1)
    mean_m = float(np.mean(np.sum(dspline(probe) ** 2, axis=1)))
    if not np.isfinite(mean_m) or mean_m <= 1e-300:
        raise DegeneratePathError("path is stationary: |X'| vanishes everywhere")
    lo = floor * mean_m

    def speed2(u):
        return np.maximum(np.sum(dspline(u) ** 2, axis=-1), lo)

    density = ScalarDensity(speed2, name="path-speed")
    tau_map = solve_reparam(density, K)
    times = t0 + (t1 - t0) * tau_map.x
    return tau_map, SampledPath(times, spline(tau_map.y))
