"""Euler-Poincare equations on Lie algebras, specialized to SO(3).

Conventions: ``C[k, i, j]`` holds the structure constant ``C^k_ij`` with
``[E_i, E_j] = sum_k C^k_ij E_k``; for so(3) with ``vee(E_i) = e_i`` this is
the Levi-Civita symbol ``eps_ijk``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .errors import InvalidInputError, InvalidMetricError
from .frenet import fd_derivative
from .lie import exp_so3, hat, project_to_rotation

ANTISYM_TOL = 1e-12


def so3_structure_constants() -> np.ndarray:
    C = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        C[k, i, j] = 1.0
        C[k, j, i] = -1.0
    return C


def check_structure_constants(C, tol: float = 1e-12) -> np.ndarray:
    """Validate antisymmetry and the Jacobi identity."""
    C = np.asarray(C, dtype=float)
    N = C.shape[0]
    if C.shape != (N, N, N):
        raise InvalidInputError(f"structure constants must be (N, N, N), got {C.shape}")
    if np.abs(C + np.swapaxes(C, 1, 2)).max() > tol:
        raise InvalidInputError("structure constants are not antisymmetric in (i, j)")
    # [[E_i, E_j], E_l] + cyclic = 0, coefficient of E_m.
    jac = np.einsum("kij,mkl->ijlm", C, C)
    cyc = jac + np.einsum("ijlm->jlim", jac) + np.einsum("ijlm->lijm", jac)
    if np.abs(cyc).max() > tol:
        raise InvalidInputError("structure constants violate the Jacobi identity")
    return C


@dataclass(frozen=True)
class InertiaSpec:
    K: np.ndarray
    offset: np.ndarray | None = None

    def __post_init__(self):
        K = np.atleast_2d(np.asarray(self.K, dtype=float))
        if K.shape[0] != K.shape[1] or np.abs(K - K.T).max() > 1e-12:
            raise InvalidMetricError("inertia must be a symmetric square matrix")
        try:
            np.linalg.cholesky(K)
        except np.linalg.LinAlgError:
            raise InvalidMetricError("inertia is not positive definite") from None
        c = np.zeros(len(K)) if self.offset is None else np.asarray(self.offset, dtype=float)
        if c.shape != (len(K),):
            raise InvalidInputError(f"offset must have length {len(K)}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "offset", c)

    def energy(self, omega):
        """``1/2 (w - c)^T K (w - c)`` per sample."""
        d = np.asarray(omega, dtype=float) - self.offset
        return 0.5 * np.einsum("...i,ij,...j->...", d, self.K, d)


@dataclass(frozen=True)
class BodyVelocityPath:
    t: np.ndarray
    omega: np.ndarray
    R: np.ndarray | None = None


def s_tensor(K, C) -> np.ndarray:
    """``S[i, l, j] = sum_k K[k, l] C[k, i, j]``."""
    return np.einsum("kl,kij->ilj", np.asarray(K, dtype=float), np.asarray(C, dtype=float))


def antisymmetry_test(S, tol: float = ANTISYM_TOL) -> bool:
    """True when ``S[i, l, j] = -S[i, j, l]``; E-P then reduces to ``xi' = 0``."""
    S = np.asarray(S, dtype=float)
    return bool(np.abs(S + np.swapaxes(S, 1, 2)).max() <= tol)


def euler_rhs(I: InertiaSpec, omega):
    """``w' = -K^{-1} (w x K (w - w0))``."""
    L = I.K @ (omega - I.offset)
    return -np.linalg.solve(I.K, np.cross(omega, L))


def ep_integrate_so3(I: InertiaSpec, omega_init, R_init=None, T: float = 1.0, dt: float = 1e-3) -> BodyVelocityPath:
    """Classical RK4 on ``(w, R)`` with ``R' = R hat(w)``.

    After each step ``R`` is projected back onto SO(3) (polar factor).
    """
    if dt <= 0 or T <= 0:
        raise InvalidInputError("T and dt must be positive")
    if I.K.shape != (3, 3):
        raise InvalidInputError("SO(3) integration needs a 3x3 inertia")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        raise InvalidInputError("T must be a whole number of steps dt")
    w = np.asarray(omega_init, dtype=float).copy()
    R = np.eye(3) if R_init is None else np.asarray(R_init, dtype=float).copy()
    ws = np.empty((n + 1, 3))
    Rs = np.empty((n + 1, 3, 3))
    ws[0], Rs[0] = w, R

    def f(w, R):
        return euler_rhs(I, w), R @ hat(w)

    for k in range(n):
        k1w, k1R = f(w, R)
        k2w, k2R = f(w + 0.5 * dt * k1w, R + 0.5 * dt * k1R)
        k3w, k3R = f(w + 0.5 * dt * k2w, R + 0.5 * dt * k2R)
        k4w, k4R = f(w + dt * k3w, R + dt * k3R)
        w = w + dt / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        R = project_to_rotation(R + dt / 6 * (k1R + 2 * k2R + 2 * k3R + k4R))
        ws[k + 1], Rs[k + 1] = w, R
    return BodyVelocityPath(np.linspace(0.0, n * dt, n + 1), ws, Rs)


def closed_form_omega(omega_init, omega0, t):
    """``w(t) = exp(-t hat(w0)) w(0)``, the identity-inertia solution."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    E = exp_so3(-t[:, None] * np.asarray(omega0, dtype=float))
    return np.einsum("nij,j->ni", E, np.asarray(omega_init, dtype=float))


def ep_residual(C, dfdxi: Callable, t, xi, dfdg: Callable | None = None):
    """Per-sample residual ``d/dt(df/dxi_i) + sum df/dxi_k C^k_ij xi_j - E_i f``.

    ``dfdxi`` maps ``(n, N)`` samples to ``(n, N)``; the time derivative is
    a fourth-order finite difference.  ``dfdg`` defaults to zero (none of the
    implemented costs depend on the group element).
    """
    xi = np.asarray(xi, dtype=float)
    P = np.asarray(dfdxi(xi), dtype=float)
    res = fd_derivative(P, np.asarray(t, dtype=float)) + np.einsum("nk,kij,nj->ni", P, np.asarray(C), xi)
    if dfdg is not None:
        res = res - np.asarray(dfdg(xi), dtype=float)
    return res


def casimirs(I: InertiaSpec, omega):
    """Kinetic energy and ``|K w|^2`` per sample (conserved when w0 = 0)."""
    omega = np.asarray(omega, dtype=float)
    L = omega @ I.K.T
    return I.energy(omega), np.sum(L * L, axis=-1)


def offset_cost_split(t, omega_star, eps_dot, omega0):
    """Decompose the cost change for ``w = w* + eps'`` under ``int |w - w0|^2``.

    Returns ``(increase, quadratic, cross)`` with ``quadratic = int |eps'|^2``
    and ``cross = 2 int (w* - w0) . eps'``; ``increase = quadratic + cross``.
    The cross term does not vanish in general because ``w*`` rotates, but
    it is ``O(T^2)`` relative to the quadratic part on short horizons.
    """
    t = np.asarray(t, dtype=float)
    d = np.asarray(omega_star, dtype=float) - np.asarray(omega0, dtype=float)
    e = np.asarray(eps_dot, dtype=float)
    base = simpson(np.sum(d * d, axis=1), x=t)
    pert = simpson(np.sum((d + e) ** 2, axis=1), x=t)
    quad = simpson(np.sum(e * e, axis=1), x=t)
    cross = 2.0 * simpson(np.sum(d * e, axis=1), x=t)
    return float(pert - base), float(quad), float(cross)
