"""Exact SO(3)/S^2/SE(3) algebra and geodesic interpolants.

Rotations are plain ``(3, 3)`` numpy arrays (or ``(n, 3, 3)`` stacks); poses
are :class:`Pose` pairs ``(R, t)`` that may also be stacked.  Two group laws
act on the same pairs:

* ``"direct"``     -- the pose-change group SO(3) x R^3,
  ``(R1, t1)(R2, t2) = (R1 R2, t1 + t2)``
* ``"semidirect"`` -- SE(3), ``(R1, t1)(R2, t2) = (R1 R2, R1 t2 + t1)``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousLogarithmError, DegeneratePairError, InvalidInputError

# Below this angle the Rodrigues coefficients switch to Taylor series.
SMALL_ANGLE = 1e-4
# Logarithm is refused for angles within this distance of pi.
PI_MARGIN = 1e-6
_NEAR_PI = np.pi - 0.3

LAWS = ("direct", "semidirect")


def hat(w):
    """Map a 3-vector (or ``(..., 3)`` stack) to its skew matrix.

    ``hat(w) @ v == np.cross(w, v)``.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != 3:
        raise InvalidInputError(f"hat expects trailing dimension 3, got shape {w.shape}")
    out = np.zeros(w.shape + (3,))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def vee(W, tol=1e-10):
    """Inverse of :func:`hat`; rejects matrices that are not skew to ``tol``."""
    W = np.asarray(W, dtype=float)
    if W.shape[-2:] != (3, 3):
        raise InvalidInputError(f"vee expects (..., 3, 3), got shape {W.shape}")
    asym = np.abs(W + np.swapaxes(W, -1, -2)).max() if W.size else 0.0
    if asym > tol:
        raise InvalidInputError(f"matrix is not skew-symmetric (|W + W^T| = {asym:.3e})")
    return _vee_unchecked(W)


def _vee_unchecked(W):
    return np.stack([W[..., 2, 1], W[..., 0, 2], W[..., 1, 0]], axis=-1)


def _rodrigues_coeffs(theta):
    """sin(x)/x, (1-cos x)/x^2 and (x-sin x)/x^3 with small-angle series."""
    theta = np.asarray(theta, dtype=float)
    small = theta < SMALL_ANGLE
    th = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(th) / th)
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, (1.0 - np.cos(th)) / th**2)
    c = np.where(small, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0, (th - np.sin(th)) / th**3)
    return a, b, c


def exp_so3(w):
    """Rodrigues exponential of a rotation vector (or stack of them)."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    a, b, _ = _rodrigues_coeffs(theta)
    W = hat(w)
    return np.eye(3) + a[..., None, None] * W + b[..., None, None] * (W @ W)


def rotation_angle(R):
    R = np.asarray(R, dtype=float)
    cos = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    sin = 0.5 * np.linalg.norm(_vee_unchecked(R - np.swapaxes(R, -1, -2)), axis=-1)
    return np.arctan2(sin, cos)


def log_so3(R, margin=PI_MARGIN):
    """Rotation vector ``w`` with ``exp_so3(w) == R`` and ``|w| < pi``.

    Raises :class:`AmbiguousLogarithmError` when the angle is within
    ``margin`` of pi, where the logarithm stops being unique.
    """
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3):
        raise InvalidInputError(f"log_so3 expects (..., 3, 3), got shape {R.shape}")
    skew = _vee_unchecked(R - np.swapaxes(R, -1, -2))  # = 2 sin(theta) n
    cos = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    sin = 0.5 * np.linalg.norm(skew, axis=-1)
    theta = np.arctan2(sin, cos)
    if np.any(theta >= np.pi - margin):
        raise AmbiguousLogarithmError(
            f"rotation angle {float(np.max(theta)):.9f} is within {margin:g} of pi"
        )
    small = theta < SMALL_ANGLE
    th = np.where(small, 1.0, theta)
    t2 = theta * theta
    factor = np.where(small, 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0, th / np.where(small, 1.0, np.sin(th)))
    w = 0.5 * factor[..., None] * skew

    near = theta > _NEAR_PI
    if np.any(near):
        # sin(theta) is small here, so read the axis off the symmetric part.
        Rn = R[near] if R.ndim > 2 else R[None]
        th_n = np.atleast_1d(theta[near] if R.ndim > 2 else theta)
        sk = np.atleast_2d(skew[near] if R.ndim > 2 else skew)
        one_minus_cos = 1.0 - np.cos(th_n)
        B = 0.5 * (Rn + np.swapaxes(Rn, -1, -2)) - np.cos(th_n)[:, None, None] * np.eye(3)
        diag = np.diagonal(B, axis1=-2, axis2=-1)
        j = np.argmax(diag, axis=-1)
        idx = np.arange(len(j))
        nj = np.sqrt(diag[idx, j] / one_minus_cos)
        axis = B[idx, :, j] / (one_minus_cos * nj)[:, None]
        sign = np.where(np.einsum("ij,ij->i", axis, sk) < 0.0, -1.0, 1.0)
        axis = axis * sign[:, None]
        axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
        wn = th_n[:, None] * axis
        if R.ndim > 2:
            w[near] = wn
        else:
            w = wn[0]
    return w


def check_rotation(R, tol=1e-10):
    """Raise unless ``R`` is orthonormal with determinant +1 to ``tol``."""
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3):
        raise InvalidInputError(f"rotation must be 3x3, got shape {R.shape}")
    orth = np.abs(np.swapaxes(R, -1, -2) @ R - np.eye(3)).max()
    det = np.abs(np.linalg.det(R) - 1.0).max()
    if orth > tol or det > tol:
        raise InvalidInputError(f"not a rotation: |R^T R - I| = {orth:.3e}, |det R - 1| = {det:.3e}")
    return R


def project_to_rotation(M):
    """Closest rotation to ``M`` in Frobenius norm (polar factor)."""
    U, _, Vt = np.linalg.svd(M)
    d = np.sign(np.linalg.det(U @ Vt))
    D = np.ones(np.shape(M)[:-1])
    D[..., -1] = d
    return (U * D[..., None, :]) @ Vt


def _unit(v, name, tol=1e-9):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise InvalidInputError(f"{name} must be a 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise InvalidInputError(f"{name} must be a unit vector (|{name}| = {np.linalg.norm(v)!r})")
    return v


def rotation_between(a, b, tol=1e-9):
    """The rotation about ``a x b`` that carries unit vector ``a`` onto ``b``.

    ``a == b`` gives the identity.  Antipodal pairs have no unique answer and
    raise :class:`DegeneratePairError`.
    """
    a = _unit(a, "a")
    b = _unit(b, "b")
    axb = np.cross(a, b)
    s2 = float(axb @ axb)
    if np.sqrt(s2) <= tol:
        if a @ b > 0.0:
            return np.eye(3)
        raise DegeneratePairError("a and b are antipodal; the rotation between them is not unique")
    K = hat(axb)
    return np.eye(3) + K + ((1.0 - a @ b) / s2) * (K @ K)


def geodesic_so3(R0, R1, t):
    """``R0 exp(t log(R0^T R1))``; ``t`` scalar or 1-d array."""
    R0 = np.asarray(R0, dtype=float)
    w = log_so3(R0.T @ np.asarray(R1, dtype=float))
    t = np.asarray(t, dtype=float)
    return R0 @ exp_so3(t[..., None] * w)


def sphere_geodesic(a, b, t):
    """Minimal great-circle arc ``exp(t log R(a, b)) a`` on the unit sphere."""
    a = _unit(a, "a")
    w = log_so3(rotation_between(a, b))
    t = np.asarray(t, dtype=float)
    return exp_so3(t[..., None] * w) @ a


@dataclass(frozen=True)
class Pose:
    """Rotation/translation pair; ``R`` may be ``(n, 3, 3)`` with ``t`` ``(n, 3)``."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if R.shape[-2:] != (3, 3) or t.shape[-1] != 3 or R.shape[:-2] != t.shape[:-1]:
            raise InvalidInputError(f"incompatible pose shapes R{R.shape}, t{t.shape}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    def __len__(self):
        return 1 if self.R.ndim == 2 else self.R.shape[0]

    def __getitem__(self, i):
        return Pose(self.R[i], self.t[i])


# Type aliases: the law, not the storage, distinguishes the two groups.
PoseDirect = Pose
PoseSE3 = Pose


def _check_law(law):
    if law not in LAWS:
        raise InvalidInputError(f"unknown group law {law!r}; expected one of {LAWS}")


def compose(g1: Pose, g2: Pose, law: str = "semidirect") -> Pose:
    _check_law(law)
    R = g1.R @ g2.R
    if law == "direct":
        return Pose(R, g1.t + g2.t)
    return Pose(R, np.einsum("...ij,...j->...i", g1.R, g2.t) + g1.t)


def inverse(g: Pose, law: str = "semidirect") -> Pose:
    _check_law(law)
    Rt = np.swapaxes(g.R, -1, -2)
    if law == "direct":
        return Pose(Rt, -g.t)
    return Pose(Rt, -np.einsum("...ij,...j->...i", Rt, g.t))


def exp_se3(xi):
    """SE(3) exponential of a twist ``xi = (w, v)`` (angular part first)."""
    xi = np.asarray(xi, dtype=float)
    w, v = xi[..., :3], xi[..., 3:]
    theta = np.linalg.norm(w, axis=-1)
    a, b, c = _rodrigues_coeffs(theta)
    W = hat(w)
    W2 = W @ W
    R = np.eye(3) + a[..., None, None] * W + b[..., None, None] * W2
    V = np.eye(3) + b[..., None, None] * W + c[..., None, None] * W2
    return Pose(R, np.einsum("...ij,...j->...i", V, v))


def log_se3(g: Pose, margin=PI_MARGIN):
    """Twist ``(w, v)`` with ``exp_se3(xi) == g``."""
    w = log_so3(g.R, margin=margin)
    theta = np.linalg.norm(w, axis=-1)
    small = theta < SMALL_ANGLE
    th = np.where(small, 1.0, theta)
    a, b, _ = _rodrigues_coeffs(theta)
    t2 = theta * theta
    d = np.where(small, 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0, (1.0 - a / (2.0 * b)) / th**2)
    W = hat(w)
    Vinv = np.eye(3) - 0.5 * W + d[..., None, None] * (W @ W)
    return np.concatenate([w, np.einsum("...ij,...j->...i", Vinv, g.t)], axis=-1)


def geodesic_pose_direct(g0: Pose, g1: Pose, t) -> Pose:
    """Rotation geodesic paired with the straight translation segment."""
    t = np.asarray(t, dtype=float)
    R = geodesic_so3(g0.R, g1.R, t)
    trans = g0.t + t[..., None] * (g1.t - g0.t)
    return Pose(R, trans)


def geodesic_se3(g0: Pose, g1: Pose, t) -> Pose:
    """``g0 exp(t log(g0^-1 g1))`` under the semidirect law (screw motion)."""
    xi = log_se3(compose(inverse(g0), g1))
    t = np.asarray(t, dtype=float)
    return compose(g0, exp_se3(t[..., None] * xi))


def body_velocity_so3(R, t):
    """Per-interval body angular velocity ``log(R_k^T R_{k+1}) / dt``.

    Exact for paths that are geodesic on each interval; returns ``(n-1, 3)``.
    """
    R = np.asarray(R, dtype=float)
    dt = np.diff(np.asarray(t, dtype=float))
    rel = np.swapaxes(R[:-1], -1, -2) @ R[1:]
    return log_so3(rel) / dt[:, None]


def body_twist_se3(g: Pose, t):
    """Per-interval SE(3) body twist ``log(g_k^-1 g_{k+1}) / dt``, ``(n-1, 6)``."""
    dt = np.diff(np.asarray(t, dtype=float))
    rel = compose(inverse(g[:-1]), g[1:])
    return log_se3(rel) / dt[:, None]
