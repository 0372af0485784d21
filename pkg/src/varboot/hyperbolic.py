"""Poincare half-space geometry.

Curvature from a metric rule by central differences, the SL(2,R) family of
half-plane geodesics with hand-derived derivatives, a two-point geodesic
solver, and the constant-speed exponential ansatz (optionally steered by a
rotation ``theta(t) = omega0 t``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.optimize import brentq

from .errors import DegenerateAnsatzError, DegeneratePairError, InvalidInputError, InvalidMetricError

FD_STEP = 1e-4


@dataclass(frozen=True)
class MetricField:
    dim: int
    rule: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __call__(self, q):
        M = np.asarray(self.rule(np.asarray(q, dtype=float)), dtype=float)
        if M.shape != (self.dim, self.dim):
            raise InvalidMetricError(f"metric returned shape {M.shape}, expected {(self.dim, self.dim)}")
        return M


def euclidean_metric(dim: int) -> MetricField:
    eye = np.eye(dim)
    return MetricField(dim, lambda q: eye, name="euclidean")


def halfspace_metric(dim: int = 2) -> MetricField:
    """``M(x) = I / x_N^2`` on ``x_N > 0``."""

    def rule(x):
        if x[-1] <= 0:
            raise InvalidMetricError(f"half-space metric undefined at x_N = {x[-1]!r}")
        return np.eye(dim) / x[-1] ** 2

    return MetricField(dim, rule, name="halfspace")


@dataclass(frozen=True)
class CurvatureReport:
    christoffel: np.ndarray  # [i, j, k] = Gamma^i_jk
    riemann: np.ndarray  # [h, j, k, l] = R_hjkl (lowered)
    K0: float
    residual: float

    def as_dict(self):
        return {"K0": self.K0, "residual": self.residual}


def _christoffel(M: MetricField, q, h):
    N = M.dim
    Minv = _inverse(M(q))
    dM = np.empty((N, N, N))  # dM[l] = d M / d q_l
    for l in range(N):
        e = np.zeros(N)
        e[l] = h
        dM[l] = (M(q + e) - M(q - e)) / (2 * h)
    # T[l, j, k] = d_k m_lj + d_j m_lk - d_l m_jk
    T = np.einsum("klj->ljk", dM) + np.einsum("jlk->ljk", dM) - dM
    return 0.5 * np.einsum("il,ljk->ijk", Minv, T)


def _inverse(Mq):
    try:
        if np.linalg.cond(Mq) > 1e12:
            raise np.linalg.LinAlgError
        return np.linalg.inv(Mq)
    except np.linalg.LinAlgError:
        raise InvalidMetricError("metric is singular") from None


def curvature_report(M: MetricField, q, h: float = FD_STEP) -> CurvatureReport:
    """Christoffel symbols, lowered Riemann tensor and fitted constant curvature.

    ``R^i_jkl = -d_l G^i_jk + d_k G^i_jl + G^m_jl G^i_mk - G^m_jk G^i_ml`` and
    ``K0`` is the least-squares fit of ``R_hjkl = K0 (m_hk m_jl - m_hl m_jk)``
    over all index tuples.
    """
    q = np.asarray(q, dtype=float)
    N = M.dim
    G = _christoffel(M, q, h)
    dG = np.empty((N, N, N, N))  # dG[l, i, j, k]
    for l in range(N):
        e = np.zeros(N)
        e[l] = h
        dG[l] = (_christoffel(M, q + e, h) - _christoffel(M, q - e, h)) / (2 * h)
    R_up = (
        -np.einsum("lijk->ijkl", dG)
        + np.einsum("kijl->ijkl", dG)
        + np.einsum("mjl,imk->ijkl", G, G)
        - np.einsum("mjk,iml->ijkl", G, G)
    )
    m = M(q)
    R = np.einsum("hi,ijkl->hjkl", m, R_up)
    pattern = np.einsum("hk,jl->hjkl", m, m) - np.einsum("hl,jk->hjkl", m, m)
    denom = float(np.sum(pattern * pattern))
    K0 = float(np.sum(R * pattern) / denom) if denom > 0 else 0.0
    residual = float(np.abs(R - K0 * pattern).max())
    return CurvatureReport(G, R, K0, residual)


@dataclass(frozen=True)
class SL2Params:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise InvalidInputError(f"ad - bc = {det!r}, expected 1")

    def circle(self):
        """Center on the boundary axis and Euclidean radius (``c d != 0``)."""
        return 0.5 * (self.b / self.d + self.a / self.c), 1.0 / (2.0 * abs(self.c * self.d))


@dataclass(frozen=True)
class HalfPlanePath:
    t: np.ndarray
    x: np.ndarray  # (n, 2)
    xdot: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[1] != 2 or len(x) != len(self.t):
            raise InvalidInputError("half-plane path needs points of shape (n, 2)")
        if np.any(x[:, 1] <= 0):
            raise InvalidInputError("half-plane path leaves x2 > 0")
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "x", x)


def geodesic_h2(p: SL2Params, t):
    """Point(s) of ``z(t) = (b + i a e^t) / (d + i c e^t)``; shape ``(..., 2)``."""
    t = np.asarray(t, dtype=float)
    E = np.exp(2 * t)
    D = p.d**2 + p.c**2 * E
    return np.stack([(p.b * p.d + p.a * p.c * E) / D, np.exp(t) / D], axis=-1)


def geodesic_h2_velocity(p: SL2Params, t):
    """Analytic ``(x1', x2')``; note ``x1' / x2^2 = 2 c d``."""
    t = np.asarray(t, dtype=float)
    E = np.exp(2 * t)
    D = p.d**2 + p.c**2 * E
    return np.stack([2 * p.c * p.d * E / D**2, np.exp(t) * (p.d**2 - p.c**2 * E) / D**2], axis=-1)


def geodesic_h2_acceleration(p: SL2Params, t):
    t = np.asarray(t, dtype=float)
    E = np.exp(2 * t)
    c2, d2 = p.c**2, p.d**2
    D = d2 + c2 * E
    ddx1 = 4 * p.c * p.d * E * (d2 - c2 * E) / D**3
    ddx2 = np.exp(t) * ((d2 - 3 * c2 * E) * D - 4 * c2 * E * (d2 - c2 * E)) / D**3
    return np.stack([ddx1, ddx2], axis=-1)


def signed_curvature(xdot, xddot):
    """Euclidean signed curvature of a planar parametrized curve."""
    num = xdot[..., 0] * xddot[..., 1] - xdot[..., 1] * xddot[..., 0]
    return num / np.sum(xdot**2, axis=-1) ** 1.5


def _mobius_time(p: SL2Params, point):
    z = complex(point[0], point[1])
    w = (z * p.d - p.b) / (1j * (p.a - p.c * z))
    return float(np.log(w.real))


def geodesic_h2_bvp(p0, p1, vertical_tol: float = 1e-12):
    """SL(2,R) parameters and times ``t0 = 0 < t1`` joining ``p0`` to ``p1``.

    Works geometrically: the geodesic is the vertical line or the circle
    centered on the axis through both points.  The family runs from the
    axis point ``b/d`` (t -> -inf) to ``a/c`` (t -> +inf), so those are set
    to the arc's start and end on the axis; the leftover time shift is used
    to put ``p0`` at ``t = 0``.  ``t1`` is the hyperbolic distance.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if p0[1] <= 0 or p1[1] <= 0:
        raise InvalidInputError("points must lie in the upper half plane")
    if np.allclose(p0, p1, rtol=0.0, atol=1e-15):
        raise DegeneratePairError("endpoints coincide")
    dx = p1[0] - p0[0]
    scale = max(abs(p0[0]), abs(p1[0]), p0[1], p1[1])
    if abs(dx) <= vertical_tol * scale:
        x1 = 0.5 * (p0[0] + p1[0])
        if p1[1] > p0[1]:
            # c = 0: x2 = e^t / d^2 grows with t.
            params = SL2Params(1.0, x1, 0.0, 1.0)
        else:
            # d = 0: x2 = e^-t / c^2 decays with t.
            params = SL2Params(x1, -1.0, 1.0, 0.0)
    else:
        center = (p1 @ p1 - p0 @ p0) / (2.0 * dx)
        radius = np.hypot(p0[0] - center, p0[1])
        start, end = (center - radius, center + radius) if dx > 0 else (center + radius, center - radius)
        c = 1.0 / (end - start)
        params = SL2Params(end * c, start, c, 1.0)
    t0 = _mobius_time(params, p0)
    # Shift time so that p0 sits at t = 0 (keeps ad - bc = 1).
    s = np.exp(0.5 * t0)
    shifted = SL2Params(params.a * s, params.b / s, params.c * s, params.d / s)
    t1 = _mobius_time(shifted, p1)
    return shifted, 0.0, t1


def hyperbolic_distance(p0, p1) -> float:
    """Closed-form half-plane distance (independent of the SL(2,R) route)."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    return float(np.arccosh(1.0 + np.sum((p0 - p1) ** 2) / (2.0 * p0[1] * p1[1])))


def hyperbolic_cost(path: HalfPlanePath) -> float:
    """``int (x1'^2 + x2'^2) / x2^2 dt`` by Simpson.

    Uses the path's stored velocities when present, otherwise fourth-order
    finite differences.
    """
    x = path.x
    if np.any(x[:, 1] <= 0):
        raise InvalidInputError("path leaves the half plane")
    xdot = path.xdot if path.xdot is not None else _fd(x, path.t)
    integrand = np.sum(xdot**2, axis=1) / x[:, 1] ** 2
    return float(simpson(integrand, x=path.t))


def _fd(x, t):
    from .frenet import fd_derivative

    return fd_derivative(x, t)


def geodesic_h2_path(p0, p1, n: int = 1001) -> HalfPlanePath:
    """The geodesic from ``p0`` to ``p1`` on ``u`` in [0, 1] at constant speed."""
    params, t0, t1 = geodesic_h2_bvp(p0, p1)
    u = np.linspace(0.0, 1.0, n)
    t = t0 + (t1 - t0) * u
    return HalfPlanePath(u, geodesic_h2(params, t), (t1 - t0) * geodesic_h2_velocity(params, t))


def ansatz_h2(p0, p1, n: int = 1001) -> HalfPlanePath:
    """Boundary-matched exponential ansatz ``x' = x2 c`` on ``t`` in [0, 1].

    ``x2(t) = x2(0) e^{k t}`` with ``k = ln(x2(1)/x2(0))`` and ``x1`` affine
    in ``e^{k t}``.  Equal heights make the boundary-matched form divide by
    zero and raise :class:`DegenerateAnsatzError`.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if p0[1] <= 0 or p1[1] <= 0:
        raise InvalidInputError("points must lie in the upper half plane")
    if p1[1] == p0[1]:
        raise DegenerateAnsatzError("ansatz undefined for endpoints at equal height x2(0) = x2(1)")
    t = np.linspace(0.0, 1.0, n)
    k = np.log(p1[1] / p0[1])
    ratio = (p1[0] - p0[0]) / (p1[1] - p0[1])
    growth = np.exp(k * t)
    x2 = p0[1] * growth
    x1 = (p0[0] - p0[1] * ratio) + p0[1] * ratio * growth
    xdot = np.stack([p0[1] * ratio * k * growth, k * x2], axis=-1)
    x = np.stack([x1, x2], axis=-1)
    x[-1] = p1
    return HalfPlanePath(t, x, xdot)


def ansatz_h2_steered(p0, p1, omega0: float, n: int = 2001, span: float = 60.0):
    """Ansatz with the constant vector rotated by ``theta(t) = omega0 t``.

    ``x' = x2 R(theta) c``; the height condition at ``t = 1`` is linear in
    ``c``, which leaves a one-parameter family searched for the horizontal
    condition.  Returns ``(path, cost)`` for the smallest ``|c|`` found, or
    ``None`` when no member hits ``p1``.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t = np.linspace(0.0, 1.0, n)
    th = omega0 * t
    S = cumulative_trapezoid(np.sin(th), t, initial=0.0)
    C = cumulative_trapezoid(np.cos(th), t, initial=0.0)
    k = np.log(p1[1] / p0[1])
    g = np.array([S[-1], C[-1]])
    g2 = float(g @ g)
    if g2 < 1e-14:
        return None
    c_part = k * g / g2
    normal = np.array([-g[1], g[0]]) / np.sqrt(g2)

    def trajectory(lam):
        c = c_part + lam * normal
        x2 = p0[1] * np.exp(c[0] * S + c[1] * C)
        v1 = x2 * (c[0] * np.cos(th) - c[1] * np.sin(th))
        x1 = p0[0] + cumulative_trapezoid(v1, t, initial=0.0)
        return c, x1, x2, v1

    def miss(lam):
        return trajectory(lam)[1][-1] - p1[0]

    lams = np.linspace(-span, span, 481)
    vals = np.array([miss(l) for l in lams])
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]):
            roots.append(brentq(miss, lams[i], lams[i + 1], xtol=1e-14))
    if not roots:
        return None
    best = min(roots, key=lambda l: np.linalg.norm(c_part + l * normal))
    c, x1, x2, v1 = trajectory(best)
    v2 = x2 * (c[0] * np.sin(th) + c[1] * np.cos(th))
    path = HalfPlanePath(t, np.stack([x1, x2], axis=-1), np.stack([v1, v2], axis=-1))
    return path, float(c @ c)


def steering_sweep(p0, p1, omegas):
    """Steered ansatz cost for each ``omega0``; ``nan`` where none matches."""
    out = []
    for w in omegas:
        res = ansatz_h2_steered(p0, p1, w)
        out.append(np.nan if res is None else res[1])
    return np.array(out)
