"""Falsification harness for global-optimality claims.

A candidate trajectory is compared against many zero-endpoint variations;
any variation that is cheaper (beyond ``tol``) is a violation.  Trials draw
from independent RNG streams keyed on ``(seed, trial)``, so results do not
depend on execution order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import InvalidInputError, PreconditionError
from .frenet import fd_derivative
from .lie import body_twist_se3, body_velocity_so3, compose, exp_so3, inverse, log_se3

VIOLATION_TOL = 1e-10
MAX_RETRIES = 5


@dataclass(frozen=True)
class PerturbationBasis:
    """Sine series ``eps(u) = amplitude * sum_k a_k sin(k pi u)``, ``a_k ~ U(-1, 1) / k^2``."""

    modes: int = 12
    amplitude: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.modes < 1:
            raise InvalidInputError("need at least one sine mode")
        if not self.amplitude > 0:
            raise InvalidInputError("amplitude must be positive")

    def rng(self, trial: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, trial])

    def draw(self, rng: np.random.Generator, u, dim: int, scale: float = 1.0):
        """Returns ``(eps, eps_u)`` of shape ``(n, dim)``; exactly zero at ``u = 0, 1``."""
        u = np.asarray(u, dtype=float)
        k = np.arange(1, self.modes + 1)
        coef = rng.uniform(-1.0, 1.0, size=(self.modes, dim)) / k[:, None] ** 2
        coef *= self.amplitude * scale
        arg = np.pi * np.outer(u, k)
        eps = np.sin(arg) @ coef
        eps_u = (np.cos(arg) * (np.pi * k)) @ coef
        eps[0] = 0.0
        eps[-1] = 0.0
        return eps, eps_u


@dataclass
class OptimalityReport:
    candidate_cost: float
    min_cost: float
    mean_cost: float
    violations: int
    worst_margin: float  # min over trials of (perturbed - candidate)
    trials: int
    redraws: int
    seed: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_text(self) -> str:
        return "\n".join(f"{k}={_fmt(v)}" for k, v in asdict(self).items())


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _unit_time(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or len(t) < 3 or np.any(np.diff(t) <= 0):
        raise InvalidInputError("time grid must be strictly increasing with >= 3 samples")
    return (t - t[0]) / (t[-1] - t[0])


def add_perturbation(t, X, eps):
    return X + eps


def rotate_perturbation(t, R, eps):
    """``R(t) exp(hat(eps(t)))``."""
    return R @ exp_so3(eps)


def _run(cost, candidate_cost, make_trial, trials, seed, tol):
    costs = np.empty(trials)
    redraws = 0
    for trial in range(trials):
        scale = 1.0
        for attempt in range(MAX_RETRIES + 1):
            try:
                value = float(make_trial(trial, scale))
                if not np.isfinite(value):
                    raise ValueError("non-finite cost")
                break
            except ValueError:
                if attempt == MAX_RETRIES:
                    raise
                redraws += 1
                scale *= 0.5
        costs[trial] = value
    margins = costs - candidate_cost
    return OptimalityReport(
        candidate_cost=float(candidate_cost),
        min_cost=float(costs.min()),
        mean_cost=float(costs.mean()),
        violations=int(np.sum(margins < -tol)),
        worst_margin=float(margins.min()),
        trials=trials,
        redraws=redraws,
        seed=seed,
    )


def perturbation_test(
    cost: Callable,
    t,
    X,
    basis: PerturbationBasis = PerturbationBasis(),
    trials: int = 200,
    perturb: Callable = add_perturbation,
    dim: int | None = None,
    tol: float = VIOLATION_TOL,
) -> OptimalityReport:
    """Compare ``cost(t, X)`` with ``cost(t, perturb(t, X, eps))`` for random ``eps``.

    A trial whose cost cannot be evaluated (any ``ValueError``, e.g. a path
    leaving the domain) is retried with the same draw at half the amplitude, up to
    ``MAX_RETRIES`` times; re-draws are counted in the report.
    """
    u = _unit_time(t)
    X = np.asarray(X, dtype=float)
    if dim is None:
        dim = 1 if X.ndim == 1 else X.shape[1]
    base = float(cost(t, X))

    def make_trial(trial, scale):
        eps, _ = basis.draw(basis.rng(trial), u, dim, scale)
        if X.ndim == 1:
            eps = eps[:, 0]
        return cost(t, perturb(t, X, eps))

    return _run(cost, base, make_trial, trials, basis.seed, tol)


def random_monotone_map(rng: np.random.Generator, u, knots: int = 8, spread: float = 0.9):
    """Random increasing bijection of [0, 1] evaluated on ``u``.

    A PCHIP spline through positive random values gives a positive density;
    its normalized running integral is the map.
    """
    nodes = np.linspace(0.0, 1.0, knots)
    vals = 1.0 + spread * rng.uniform(-1.0, 1.0, size=knots)
    fine = np.linspace(0.0, 1.0, 4096 + 1)
    dens = PchipInterpolator(nodes, vals)(fine)
    cum = cumulative_trapezoid(dens, fine, initial=0.0)
    cum /= cum[-1]
    return np.interp(u, fine, cum)


def euclidean_energy(t, X, Xdot=None):
    """Per-sample ``|X'|^2``."""
    Xd = fd_derivative(np.asarray(X, dtype=float), np.asarray(t, dtype=float)) if Xdot is None else Xdot
    Xd = np.asarray(Xd, dtype=float)
    return np.sum(Xd.reshape(len(Xd), -1) ** 2, axis=1)


def reparam_worsens_test(
    cost: Callable,
    t,
    X,
    basis: PerturbationBasis = PerturbationBasis(),
    trials: int = 200,
    energy: Callable = euclidean_energy,
    resample: Callable | None = None,
    precondition_tol: float = 1e-3,
    tol: float = VIOLATION_TOL,
) -> OptimalityReport:
    """Retiming a constant-energy candidate never lowers its cost.

    ``resample(t, X, tau)`` evaluates the candidate at unit parameters
    ``tau``; the default is a cubic spline in normalized time.
    """
    u = _unit_time(t)
    X = np.asarray(X, dtype=float)
    e = np.asarray(energy(t, X), dtype=float)
    spread = (e.max() - e.min()) / abs(e.mean())
    if not spread <= precondition_tol:
        raise PreconditionError(f"candidate energy is not constant (relative spread {spread:.3g})")
    if resample is None:
        spline = CubicSpline(u, X, axis=0)

        def resample(t, X, tau):
            out = spline(tau)
            out[0], out[-1] = X[0], X[-1]
            return out

    base = float(cost(t, X))

    def make_trial(trial, scale):
        tau = random_monotone_map(basis.rng(trial), u, spread=0.9 * scale)
        return cost(t, resample(t, X, tau))

    return _run(cost, base, make_trial, trials, basis.seed, tol)


def _velocities(t, q, qdot):
    return fd_derivative(np.asarray(q, dtype=float), np.asarray(t, dtype=float)) if qdot is None else np.asarray(qdot, dtype=float)


def kinetic_energy(M: Callable, t, q, qdot=None):
    """``T = 1/2 q'^T M(q) q'`` per sample."""
    v = _velocities(t, q, qdot)
    return np.array([0.5 * vi @ np.asarray(M(qi), dtype=float) @ vi for qi, vi in zip(q, v)])


def conservation_check(M: Callable, t, q, qdot=None) -> float:
    """Relative drift ``max |T(t) - T(0)| / T(0)``."""
    T = kinetic_energy(M, t, q, qdot)
    if T[0] <= 0:
        raise PreconditionError("trajectory starts at rest")
    return float(np.abs(T - T[0]).max() / T[0])


def j1_j2_relation(M: Callable, t, q, qdot=None):
    """``(J1, J2, |J2 - J1^2|)`` with time normalized to [0, 1].

    ``J1 = int sqrt(2T)`` is the length, ``J2 = int 2T`` the energy;
    Cauchy-Schwarz gives ``J1^2 <= J2`` with equality iff ``T`` is constant.
    """
    t = np.asarray(t, dtype=float)
    span = t[-1] - t[0]
    u = _unit_time(t)
    T = kinetic_energy(M, t, q, qdot) * span**2
    J1 = float(simpson(np.sqrt(2 * T), x=u))
    J2 = float(simpson(2 * T, x=u))
    return J1, J2, abs(J2 - J1 * J1)


# Discrete cost functionals.  Each is exact for piecewise-geodesic paths, so
# the perturbation suite sees no quadrature-induced false violations.


def line_energy(t, X) -> float:
    """``int |X'|^2`` for the piecewise-linear interpolant."""
    X = np.asarray(X, dtype=float)
    X = X[:, None] if X.ndim == 1 else X
    dt = np.diff(np.asarray(t, dtype=float))
    return float(np.sum(np.sum(np.diff(X, axis=0) ** 2, axis=1) / dt))


def so3_energy(t, R) -> float:
    """``int |w|^2`` for the piecewise-geodesic interpolant of ``R``."""
    w = body_velocity_so3(R, t)
    return float(np.sum(np.sum(w * w, axis=1) * np.diff(np.asarray(t, dtype=float))))


def se3_energy(t, g, K=None) -> float:
    """``int xi^T K xi`` over the piecewise screw interpolant (default ``K = I``)."""
    xi = body_twist_se3(g, t)
    K = np.eye(6) if K is None else np.asarray(K, dtype=float)
    return float(np.sum(np.einsum("ni,ij,nj->n", xi, K, xi) * np.diff(np.asarray(t, dtype=float))))


def screw_coupling(g0, g1) -> np.ndarray:
    """``A0 = v w^T / |w|^2`` from the screw ``log(g0^-1 g1) = (w, v)``.

    The screw has ``v = A0 w``; with ``w = 0`` the coupling is zero.
    """
    xi = log_se3(compose(inverse(g0), g1))
    w, v = xi[:3], xi[3:]
    n2 = float(w @ w)
    return np.zeros((3, 3)) if n2 == 0.0 else np.outer(v, w) / n2


def screw_energy(t, g, A0) -> float:
    """``int |w|^2 + |v - A0 w|^2`` over the piecewise screw interpolant.

    The translational part is the coupled add-on term: it vanishes on the
    screw motion, so the screw minimizes this cost whenever its rotation
    is a geodesic.
    """
    xi = body_twist_se3(g, t)
    w, v = xi[:, :3], xi[:, 3:]
    r = v - w @ np.asarray(A0, dtype=float).T
    return float(np.sum((np.sum(w * w, axis=1) + np.sum(r * r, axis=1)) * np.diff(np.asarray(t, dtype=float))))


def direct_energy(t, g) -> float:
    """``int |w|^2 + |t'|^2`` under the direct-product law."""
    return so3_energy(t, g.R) + line_energy(t, g.t)
