"""Frenet-Serret frames of sampled space curves, minimal-twist roll, and
optimal frame reparametrization (alone and jointly with the roll).

Derivatives use five-point finite-difference stencils (centered inside,
shifted at the ends), fourth-order on any strictly increasing grid; the
frame needs three nested derivatives, and lower-order one-sided ends would
leave O(1) torsion errors at the first and last samples.  Curvature and torsion are
reported per unit length; the per-parameter rates ``speed * kappa`` and
``speed * tau`` are what the costs integrate, so an arclength curve on [0, 1]
gives the textbook integrands.

Sign convention: ``R_FS' = R_FS hat((tau, 0, kappa))``, i.e.
``R_FS' = -R_FS Omega_FS`` with ``Omega_FS`` the skew matrix holding
``kappa`` and ``tau`` above the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.interpolate import CubicSpline

from .errors import InvalidCurveError, UndefinedNormalError
from .lie import exp_so3, log_so3
from .reparam import MonotoneMap, ScalarDensity, solve_reparam

KAPPA_MIN = 1e-8


@dataclass(frozen=True)
class SampledCurve:
    s: np.ndarray
    x: np.ndarray
    arclength: bool = False

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if s.ndim != 1 or x.shape != (len(s), 3):
            raise InvalidCurveError(f"curve needs parameters (n,) and points (n, 3); got {s.shape}, {x.shape}")
        if np.any(np.diff(s) <= 0):
            raise InvalidCurveError("curve parameter must be strictly increasing")
        if len(s) > 1 and np.any(np.linalg.norm(np.diff(x, axis=0), axis=1) == 0.0):
            raise InvalidCurveError("consecutive curve points coincide")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "x", x)

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.x, axis=0), axis=1)))


@dataclass(frozen=True)
class FrenetApparatus:
    s: np.ndarray
    t: np.ndarray
    n: np.ndarray
    b: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    speed: np.ndarray

    @property
    def R(self):
        """Frenet frames ``[t, n, b]`` as columns, ``(K, 3, 3)``."""
        return np.stack([self.t, self.n, self.b], axis=-1)

    @property
    def omega(self):
        """Frame angular velocity per unit parameter, body components."""
        return self.speed[:, None] * np.stack([self.tau, np.zeros_like(self.tau), self.kappa], axis=-1)


@dataclass(frozen=True)
class RollProfile:
    theta: np.ndarray


def roll_matrix(theta):
    """Rotation by ``theta`` about the first axis (the tangent)."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    R = np.zeros(theta.shape + (3, 3))
    R[..., 0, 0] = 1.0
    R[..., 1, 1] = c
    R[..., 1, 2] = -s
    R[..., 2, 1] = s
    R[..., 2, 2] = c
    return R


@dataclass(frozen=True)
class FrameField:
    curve: SampledCurve
    apparatus: FrenetApparatus
    roll: RollProfile | None = None

    @property
    def theta(self):
        return np.zeros_like(self.curve.s) if self.roll is None else self.roll.theta

    @property
    def R(self):
        return self.apparatus.R @ roll_matrix(self.theta)

    def rotation_rate2(self):
        """``1/2 tr(R' R'^T)`` per unit parameter: ``k^2 + (tau + theta')^2``."""
        app = self.apparatus
        dtheta = fd_derivative(self.theta, self.curve.s)
        k = app.speed * app.kappa
        tw = app.speed * app.tau + dtheta
        return k * k + tw * tw


def arclength_parametrize(curve: SampledCurve, n: int | None = None) -> SampledCurve:
    """Cumulative chord length, normalized to [0, 1].

    With ``n`` the curve is also resampled at ``n`` uniform parameter values
    through a cubic spline in the chord parameter.
    """
    if len(curve.s) < 3:
        raise InvalidCurveError("need at least 3 samples")
    chords = np.linalg.norm(np.diff(curve.x, axis=0), axis=1)
    if np.any(chords <= 0):
        raise InvalidCurveError("repeated points")
    s = np.concatenate([[0.0], np.cumsum(chords)])
    s /= s[-1]
    if n is None:
        return SampledCurve(s, curve.x, arclength=True)
    su = np.linspace(0.0, 1.0, n)
    return SampledCurve(su, CubicSpline(s, curve.x, axis=0)(su), arclength=True)


def fd_derivative(y, s, width: int = 5):
    """First derivative of samples ``y`` along axis 0 on the grid ``s``.

    Each node uses the ``width`` nearest nodes (centered where possible);
    weights come from the local Vandermonde system in scaled offsets.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(s)
    if n < width:
        raise InvalidCurveError(f"need at least {width} samples for the derivative stencil")
    half = width // 2
    start = np.clip(np.arange(n) - half, 0, n - width)
    idx = start[:, None] + np.arange(width)[None, :]
    h = np.diff(s).mean()
    off = (s[idx] - s[:, None]) / h
    V = off[:, None, :] ** np.arange(width)[None, :, None]
    rhs = np.zeros((n, width))
    rhs[:, 1] = 1.0
    w = np.linalg.solve(V, rhs[..., None])[..., 0] / h
    return np.einsum("ij,ij...->i...", w, y[idx])


def _normalize(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def frenet_apparatus(curve: SampledCurve, kappa_min: float = KAPPA_MIN) -> FrenetApparatus:
    """Tangent, normal, binormal, curvature and torsion at every sample.

    Torsion is ``-b' . n`` (per unit length).  Raises
    :class:`UndefinedNormalError` where the curvature drops below
    ``kappa_min`` per unit length.
    """
    s, x = curve.s, curve.x
    if len(s) < 5:
        raise InvalidCurveError("need at least 5 samples for curvature and torsion")
    dx = fd_derivative(x, s)
    speed = np.linalg.norm(dx, axis=1)
    t = dx / speed[:, None]
    dt = fd_derivative(t, s)
    dt_norm = np.linalg.norm(dt, axis=1)
    kappa = dt_norm / speed
    scale = max(curve.length, np.finfo(float).tiny)
    bad = np.flatnonzero(kappa * scale < kappa_min)
    if bad.size:
        raise UndefinedNormalError(
            f"curvature below {kappa_min:g}/length at sample {int(bad[0])}; normal undefined"
        )
    n = dt - np.sum(dt * t, axis=1, keepdims=True) * t
    n = _normalize(n)
    b = np.cross(t, n)
    db = fd_derivative(b, s)
    tau = -np.sum(db * n, axis=1) / speed
    return FrenetApparatus(s=s, t=t, n=n, b=b, kappa=kappa, tau=tau, speed=speed)


def frame_field(curve: SampledCurve, roll: RollProfile | None = None) -> FrameField:
    return FrameField(curve, frenet_apparatus(curve), roll)


def _unit_param(s):
    return (s - s[0]) / (s[-1] - s[0])


def minimal_twist(app: FrenetApparatus, theta0: float = 0.0, theta1: float | None = None) -> RollProfile:
    """Roll about the tangent that cancels torsion.

    Free end: ``theta' = -tau``.  With ``theta1`` the linear term
    ``c2 = theta1 - theta0 + int tau`` spreads the residual twist evenly.
    """
    torsion_int = cumulative_trapezoid(app.speed * app.tau, app.s, initial=0.0)
    theta = theta0 - torsion_int
    if theta1 is not None:
        c2 = theta1 - theta0 + torsion_int[-1]
        theta = theta + c2 * _unit_param(app.s)
    return RollProfile(theta)


def frame_cost(field: FrameField, r: float | None = None, smap: MonotoneMap | None = None) -> float:
    """Rotational cost of a framed curve.

    Without ``smap``: ``int [k^2 + (tau + theta')^2] ds`` over the curve
    parameter.  With a reparametrization ``smap`` and length scale ``r``:
    ``int [r^2 * 1/2 tr(R_t R_t^T) + |x_t|^2] dt``, the cost that
    :func:`reparam_frames` minimizes.
    """
    rate2 = field.rotation_rate2()
    if smap is None:
        return float(simpson(rate2, x=field.curve.s))
    if r is None:
        raise ValueError("r is required when a reparametrization is given")
    m = _reparam_density_samples(field, r, rate2)
    density = ScalarDensity.from_samples(_unit_param(field.curve.s), m)
    from .reparam import path_cost

    return path_cost(density, smap)


def _reparam_density_samples(field: FrameField, r: float, rate2=None):
    """``r^2 * rotation rate^2 + |dx/du|^2`` on the unit parameter ``u``."""
    if r <= 0:
        raise ValueError("r must be positive")
    s = field.curve.s
    span = s[-1] - s[0]
    if rate2 is None:
        rate2 = field.rotation_rate2()
    return span**2 * (r * r * rate2 + field.apparatus.speed**2)


def reparam_frames(field: FrameField, r: float, K: int = 1000) -> MonotoneMap:
    """Optimal ``s*(t)`` for ``m(s) = 1/2 r^2 tr(R' R'^T) + 1`` (unit parameter)."""
    m = _reparam_density_samples(field, r)
    density = ScalarDensity.from_samples(_unit_param(field.curve.s), m, name="frame-density")
    return solve_reparam(density, K)


def interpolate_frames(s_grid, R, s_query):
    """Piecewise-geodesic interpolation of a frame sequence."""
    s_query = np.asarray(s_query, dtype=float)
    i = np.clip(np.searchsorted(s_grid, s_query, side="right") - 1, 0, len(s_grid) - 2)
    alpha = (s_query - s_grid[i]) / (s_grid[i + 1] - s_grid[i])
    rel = log_so3(np.swapaxes(R[i], -1, -2) @ R[i + 1])
    return R[i] @ exp_so3(alpha[:, None] * rel)


@dataclass(frozen=True)
class JointSolution:
    smap: MonotoneMap
    roll: RollProfile
    field: FrameField
    slope: float  # a = theta' + tau s' (constant)
    cost: float


def joint_roll_reparam(
    curve: SampledCurve, r: float, theta0: float = 0.0, theta1: float | None = None, K: int = 1000
) -> JointSolution:
    """Simultaneous optimal reparametrization ``s*(t)`` and roll ``theta*(t)``.

    Minimizes ``1/2 int (r^2 k^2 + 1) s'^2 + r^2 (tau s' + theta')^2 dt``.
    The roll equation integrates to ``tau s' + theta' = a``; that term is
    then a constant, so ``s*`` solves the 1D problem with
    ``m = r^2 k^2 + 1`` and ``theta* = theta0 + a t - int_0^{s*} tau``.
    ``theta1=None`` leaves the far end free (``a = 0``).
    """
    app = frenet_apparatus(curve)
    u = _unit_param(app.s)
    span = app.s[-1] - app.s[0]
    k_u = span * app.speed * app.kappa
    tau_u = span * app.speed * app.tau
    m = r * r * k_u**2 + (span * app.speed) ** 2
    density = ScalarDensity.from_samples(u, m, name="joint-density")
    smap = solve_reparam(density, K)

    torsion_int = cumulative_trapezoid(tau_u, u, initial=0.0)
    T_of_s = CubicSpline(u, torsion_int)
    a = 0.0 if theta1 is None else theta1 - theta0 + float(torsion_int[-1])
    t = smap.x
    theta = theta0 + a * t - T_of_s(smap.y)
    theta[0] = theta0
    if theta1 is not None:
        theta[-1] = theta1

    s_phys = app.s[0] + span * smap.y
    xs = CubicSpline(app.s, curve.x, axis=0)(s_phys)
    R_fs = interpolate_frames(app.s, app.R, s_phys)
    new_curve = SampledCurve(t, xs, arclength=False)
    k_at = np.interp(smap.y, u, app.kappa)
    tau_at = np.interp(smap.y, u, app.tau)
    sp_at = np.interp(smap.y, u, app.speed)
    new_app = FrenetApparatus(
        s=t, t=R_fs[:, :, 0], n=R_fs[:, :, 1], b=R_fs[:, :, 2],
        kappa=k_at, tau=tau_at, speed=sp_at * span * smap.dydx,
    )
    cost = 0.5 * (_sqrt_integral(u, m) ** 2 + r * r * a * a)
    return JointSolution(smap, RollProfile(theta), FrameField(new_curve, new_app, RollProfile(theta)), a, cost)


def _sqrt_integral(u, m):
    return float(simpson(np.sqrt(m), x=u))


def joint_cost(app: FrenetApparatus, r: float, t, s, theta) -> float:
    """Joint cost ``1/2 int (r^2 k(s)^2 + |x_s|^2) s'^2 + r^2 (tau(s) s' + theta')^2``.

    ``s`` is the unit curve parameter as a function of ``t``.  Each segment
    is treated as linear in both ``s`` and ``theta``; the integrand of the
    first term is integrated exactly over the segment's ``s`` range by
    Simpson, and the twist term uses the segment mean of ``tau``.
    """
    u = _unit_param(app.s)
    span = app.s[-1] - app.s[0]
    m_fn = CubicSpline(u, r * r * (span * app.speed * app.kappa) ** 2 + (span * app.speed) ** 2)
    tau_int = CubicSpline(u, cumulative_trapezoid(span * app.speed * app.tau, u, initial=0.0))
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(np.diff(s) <= 0):
        raise ValueError("s(t) must be strictly increasing")
    dt = np.diff(t)
    ds = np.diff(s)
    mid = 0.5 * (s[:-1] + s[1:])
    seg_m = (ds / 6.0) * (m_fn(s[:-1]) + 4.0 * m_fn(mid) + m_fn(s[1:]))
    twist = (np.diff(tau_int(s)) + np.diff(theta)) / dt
    return 0.5 * float(np.sum(ds / dt * seg_m) + r * r * np.sum(twist**2 * dt))
