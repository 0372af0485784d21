"""Lifting a globally optimal base trajectory ``q*(t)`` to the augmented
problem ``f2 = f1 + 1/2 |theta' - A(q) q'|_W^2``.

Discretization: a trajectory is piecewise linear between samples.  On a
segment the coupling is averaged, ``A_bar = (A(q_i) + A(q_{i+1})) / 2``, and
the lifted increment is ``A_bar (q_{i+1} - q_i)`` (trapezoid rule for the
line integral).  :func:`augmented_cost` uses the same segment rule, so the
add-on term vanishes to rounding along a lifted trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidCouplingError, InvalidWeightError, UnsupportedCaseError

KINDS = ("zero", "constant", "single_column", "general")


@dataclass(frozen=True)
class CouplingMap:
    """``A(q)``, a ``dim_theta x dim_q`` matrix field, tagged by structure."""

    rule: Callable[[np.ndarray], np.ndarray]
    kind: str
    shape: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidCouplingError(f"unknown coupling kind {self.kind!r}")
        if self.kind == "single_column" and self.shape[1] != 1:
            raise InvalidCouplingError("single-column coupling needs dim q = 1")

    @classmethod
    def zero(cls, dim_theta: int, dim_q: int) -> "CouplingMap":
        Z = np.zeros((dim_theta, dim_q))
        return cls(lambda q: Z, "zero", Z.shape)

    @classmethod
    def constant(cls, A0) -> "CouplingMap":
        A0 = np.atleast_2d(np.asarray(A0, dtype=float))
        return cls(lambda q: A0, "constant", A0.shape)

    @classmethod
    def single_column(cls, a1: Callable, dim_theta: int) -> "CouplingMap":
        def rule(q):
            q = float(np.ravel(q)[0])
            return np.asarray(a1(q), dtype=float).reshape(dim_theta, 1)

        return cls(rule, "single_column", (dim_theta, 1))

    @classmethod
    def general(cls, rule: Callable, dim_theta: int, dim_q: int) -> "CouplingMap":
        return cls(rule, "general", (dim_theta, dim_q))

    def __call__(self, q) -> np.ndarray:
        A = np.asarray(self.rule(q), dtype=float)
        if A.shape != self.shape:
            raise InvalidCouplingError(f"coupling returned shape {A.shape}, expected {self.shape}")
        return A

    def along(self, q) -> np.ndarray:
        """``A`` evaluated at every sample of ``q``: ``(n, dim_theta, dim_q)``."""
        if self.kind in ("zero", "constant"):
            return np.broadcast_to(self(q[0]), (len(q),) + self.shape)
        return np.stack([self(qi) for qi in q])


@dataclass(frozen=True)
class AugmentedTrajectory:
    t: np.ndarray
    q: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        q = _as_samples(self.q)
        theta = _as_samples(self.theta)
        if not (len(t) == len(q) == len(theta)):
            raise InvalidCouplingError("t, q and theta must share the time grid")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(theta))):
            raise InvalidCouplingError("trajectory has non-finite samples")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "theta", theta)


def _as_samples(a):
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def check_weight(W) -> np.ndarray:
    """Return ``W`` as a symmetric positive definite matrix or raise."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[0] != W.shape[1]:
        raise InvalidWeightError(f"weight must be square, got {W.shape}")
    if np.abs(W - W.T).max() > 1e-12:
        raise InvalidWeightError("weight is not symmetric")
    try:
        np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        raise InvalidWeightError("weight is not positive definite") from None
    return W


def _check_shapes(q, A: CouplingMap, dim_theta=None):
    if q.shape[1] != A.shape[1]:
        raise InvalidCouplingError(f"coupling expects dim q = {A.shape[1]}, trajectory has {q.shape[1]}")
    if dim_theta is not None and dim_theta != A.shape[0]:
        raise InvalidCouplingError(f"coupling expects dim theta = {A.shape[0]}, got {dim_theta}")


def _segment_increments(q, A: CouplingMap, qdot=None, t=None):
    """Per-segment ``int A(q) dq`` (trapezoid), shape ``(n-1, dim_theta)``."""
    if qdot is not None:
        # Group-valued q: integrate A(q) qdot in time instead.
        vals = np.einsum("nij,nj->ni", A.along(q), qdot)
        return 0.5 * (vals[:-1] + vals[1:]) * np.diff(t)[:, None]
    As = A.along(q)
    Abar = 0.5 * (As[:-1] + As[1:])
    return np.einsum("nij,nj->ni", Abar, np.diff(q, axis=0))


def lift_theta(t, qstar, A: CouplingMap, b, qdot=None) -> np.ndarray:
    """``theta*(t) = b + int_0^t A(q*) q*' ds``; the add-on term vanishes.

    ``qstar`` is ``(n, dim_q)`` coordinates, or any stack of group elements
    together with explicit velocities ``qdot`` ``(n, dim_q)``.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if qdot is None:
        qstar = _as_samples(qstar)
        _check_shapes(qstar, A, len(b))
    elif len(b) != A.shape[0]:
        raise InvalidCouplingError(f"b has length {len(b)}, coupling has {A.shape[0]} rows")
    inc = _segment_increments(qstar, A, qdot=qdot, t=np.asarray(t, dtype=float))
    return b + np.concatenate([np.zeros((1, len(b))), np.cumsum(inc, axis=0)])


def lift_theta_bvp(t, qstar, A: CouplingMap, theta0, theta1) -> np.ndarray:
    """Two-point lift ``theta* = a u + b + int A(q*) dq*`` with ``u`` in [0, 1].

    Covers the constant-coupling case and the single-coordinate case; any
    other coupling with ``dim q > 1`` raises :class:`UnsupportedCaseError`.
    """
    qstar = _as_samples(qstar)
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    _check_shapes(qstar, A, len(theta0))
    if A.kind == "general" and A.shape[1] > 1:
        raise UnsupportedCaseError("two-point lift needs a constant coupling or a single coordinate q")
    t = np.asarray(t, dtype=float)
    u = (t - t[0]) / (t[-1] - t[0])
    if A.kind in ("zero", "constant"):
        integral = (qstar - qstar[0]) @ A(qstar[0]).T
    else:
        integral = lift_theta(t, qstar, A, np.zeros_like(theta0))
    a = theta1 - theta0 - integral[-1]
    theta = theta0 + u[:, None] * a + integral
    theta[-1] = theta1
    return theta


def theta_first_integral(t, q, theta, A: CouplingMap):
    """Per-segment ``theta' - A q'``; constant (``= a``) along two-point lifts."""
    q = _as_samples(q)
    theta = _as_samples(theta)
    dt = np.diff(np.asarray(t, dtype=float))[:, None]
    return (np.diff(theta, axis=0) - _segment_increments(q, A)) / dt


def composite_metric(M: Callable, A: CouplingMap, W) -> Callable:
    """Metric on ``[q; theta]`` whose quadratic form is ``f1 + f_add``.

    ``1/2 v^T M' v = 1/2 q'^T M q' + 1/2 |theta' - A q'|_W^2`` with
    ``M' = [[M + A^T W A, -A^T W], [-W A, W]]``.  The returned rule accepts
    the full state (extra trailing entries are ignored), so it can be fed
    back in as the base metric of a further layer.
    """
    W = check_weight(W)
    if W.shape[0] != A.shape[0]:
        raise InvalidCouplingError(f"W is {W.shape}, coupling has {A.shape[0]} rows")
    dq = A.shape[1]

    def rule(state):
        state = np.atleast_1d(np.asarray(state, dtype=float))
        q = state[:dq]
        Mq = check_weight(M(state))
        if Mq.shape != (dq, dq):
            raise InvalidCouplingError(f"base metric is {Mq.shape}, expected {(dq, dq)}")
        Aq = A(q)
        WA = W @ Aq
        return np.block([[Mq + Aq.T @ WA, -WA.T], [-WA, W]])

    return rule


def augmented_cost(f1_cost: Callable, traj: AugmentedTrajectory, A: CouplingMap, W) -> float:
    """``J1(q) + int 1/2 |theta' - A(q) q'|_W^2 dt`` on the segment rule."""
    W = check_weight(W)
    _check_shapes(traj.q, A, traj.theta.shape[1])
    res = theta_first_integral(traj.t, traj.q, traj.theta, A)
    addon = 0.5 * np.sum(np.einsum("ni,ij,nj->n", res, W, res) * np.diff(traj.t))
    return float(f1_cost(traj.t, traj.q)) + float(addon)


def kinetic_cost(M: Callable):
    """Base cost ``int 1/2 q'^T M(q) q' dt`` for piecewise-linear paths.

    The metric is taken at segment midpoints.
    """

    def cost(t, q):
        q = _as_samples(q)
        dt = np.diff(np.asarray(t, dtype=float))
        v = np.diff(q, axis=0) / dt[:, None]
        mid = 0.5 * (q[:-1] + q[1:])
        Ms = np.stack([M(p) for p in mid])
        return 0.5 * float(np.sum(np.einsum("ni,nij,nj->n", v, Ms, v) * dt))

    return cost
