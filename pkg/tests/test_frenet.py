import numpy as np
import pytest

from varboot.bootstrap import CouplingMap, lift_theta, lift_theta_bvp
from varboot.builtins import bent, helix
from varboot.errors import InvalidCurveError, UndefinedNormalError
from varboot.frenet import (
    RollProfile,
    SampledCurve,
    arclength_parametrize,
    fd_derivative,
    frame_cost,
    frame_field,
    frenet_apparatus,
    joint_cost,
    joint_roll_reparam,
    minimal_twist,
    reparam_frames,
)
from varboot.lie import hat
from varboot.verify import PerturbationBasis, perturbation_test


def circle(radius, n=1000, span=1.0):
    s = np.linspace(0, span, n)
    return SampledCurve(s, np.column_stack([radius * np.cos(s / radius), radius * np.sin(s / radius), 0 * s]), arclength=True)


def sequential(curve, r, theta0=0.0, theta1=None, K=1000):
    """Optimal twist first, then optimal reparametrization of that frame field."""
    app = frenet_apparatus(curve)
    roll = minimal_twist(app, theta0, theta1)
    smap = reparam_frames(frame_field(curve, roll), r, K)
    u = (app.s - app.s[0]) / (app.s[-1] - app.s[0])
    return smap, np.interp(smap.y, u, roll.theta)


@pytest.fixture(scope="module")
def helix_app():
    return frenet_apparatus(helix(2000))


def test_helix_curvature_torsion(helix_app):
    assert np.abs(helix_app.kappa - 0.5).max() < 1e-4
    assert np.abs(helix_app.tau - 0.5).max() < 1e-4
    R = helix_app.R
    assert np.abs(np.swapaxes(R, 1, 2) @ R - np.eye(3)).max() < 1e-8
    assert np.abs(np.linalg.det(R) - 1).max() < 1e-8


def test_circle_radius_two():
    app = frenet_apparatus(circle(2.0))
    assert np.abs(app.kappa - 0.5).max() < 1e-6
    assert np.abs(app.tau).max() < 1e-6


def test_straight_segment_has_no_normal():
    s = np.linspace(0, 1, 50)
    with pytest.raises(UndefinedNormalError):
        frenet_apparatus(SampledCurve(s, np.column_stack([s, 2 * s, -s])))


def test_invalid_curves():
    with pytest.raises(InvalidCurveError):
        SampledCurve([0, 1, 1], np.zeros((3, 3)))
    with pytest.raises(InvalidCurveError):
        SampledCurve([0, 1, 2], [[0, 0, 0], [0, 0, 0], [1, 0, 0]])


def test_frame_ode_sign_and_order():
    errs = []
    for n in (200, 400, 800):
        app = frenet_apparatus(bent(n))
        dR = fd_derivative(app.R, app.s)
        errs.append(np.abs(dR - app.R @ hat(app.omega)).max())
    assert errs[-1] < 1e-6
    assert errs[0] / errs[1] > 8  # at least third-order convergence


def test_torsion_matches_determinant_formula():
    curve = bent(2000)
    app = frenet_apparatus(curve)
    u = curve.s
    d1 = np.column_stack([np.ones_like(u), 2 * u, 3 * u * u])
    d2 = np.column_stack([0 * u, 2 + 0 * u, 6 * u])
    d3 = np.column_stack([0 * u, 0 * u, 6 + 0 * u])
    c = np.cross(d1, d2)
    tau = np.sum(c * d3, axis=1) / np.sum(c * c, axis=1)
    kappa = np.linalg.norm(c, axis=1) / np.linalg.norm(d1, axis=1) ** 3
    # the last samples use one-sided stencils
    assert np.abs(app.tau - tau).max() < 1e-5
    assert np.abs(app.kappa - kappa).max() < 1e-5
    assert np.abs(app.tau - tau)[10:-10].max() < 1e-6


def test_arclength_parametrize():
    u = np.linspace(0, 1, 101) ** 2
    line = SampledCurve(u, np.column_stack([u, 0 * u, 0 * u]))
    out = arclength_parametrize(line)
    assert np.allclose(out.s, u, atol=1e-14)
    resampled = arclength_parametrize(line, n=11)
    assert np.allclose(np.diff(resampled.x[:, 0]), 0.1, atol=1e-12)
    c = arclength_parametrize(circle(1.0, n=1000, span=5.0))
    speed = np.linalg.norm(fd_derivative(c.x, c.s), axis=1)
    assert np.ptp(speed) / speed.mean() < 1e-3
    assert speed.mean() == pytest.approx(5.0, rel=1e-2)
    h = helix(500)
    assert np.abs(arclength_parametrize(h).s - h.s).max() < 1e-6


def test_minimal_twist_examples(helix_app):
    app = frenet_apparatus(circle(2.0))
    planar = minimal_twist(app, 0.0, 1.0)
    assert np.abs(planar.theta - app.s).max() < 1e-6
    free = minimal_twist(helix_app, 0.0)
    assert np.abs(free.theta + helix_app.s / 2).max() < 1e-6
    pinned = minimal_twist(helix_app, 0.0, 0.0)
    assert np.abs(pinned.theta).max() < 1e-6
    assert pinned.theta[0] == 0.0 and abs(pinned.theta[-1]) < 1e-15


def test_frame_costs_on_helix(helix_app):
    curve = helix(2000)
    assert frame_cost(frame_field(curve)) == pytest.approx(0.5, abs=1e-3)
    assert frame_cost(frame_field(curve, minimal_twist(helix_app))) == pytest.approx(0.25, abs=1e-3)


def test_planar_roll_cannot_help():
    curve = circle(2.0)
    base = frame_cost(frame_field(curve))
    assert base == pytest.approx(0.25, abs=1e-8)
    roll = RollProfile(0.3 * np.sin(np.pi * curve.s))
    assert frame_cost(frame_field(curve, roll)) > base


def test_bishop_frame_has_no_tangential_rate():
    curve = bent(2000)
    roll = minimal_twist(frenet_apparatus(curve))
    R = frame_field(curve, roll).R
    W = np.swapaxes(R, 1, 2) @ fd_derivative(R, curve.s)
    w = np.stack([W[:, 2, 1], W[:, 0, 2], W[:, 1, 0]], axis=1)
    assert np.abs(w[:, 0]).max() < 1e-6
    assert np.abs(w[:, 1:]).max() > 0.1


def test_minimal_twist_perturbation_suite():
    curve = bent(1000)
    app = frenet_apparatus(curve)
    theta = minimal_twist(app, 0.2, 1.1).theta

    def cost(s, th):
        return frame_cost(frame_field(curve, RollProfile(th)))

    report = perturbation_test(cost, curve.s, theta, PerturbationBasis(seed=3), trials=200)
    assert report.violations == 0


def test_reparam_frames_examples(helix_app):
    helix_field = frame_field(helix(2000))
    smap = reparam_frames(helix_field, 1.0)
    assert np.abs(smap.y - smap.x).max() < 1e-8
    # straight framed line: roll-free frames along a line, R' = 0
    s = np.linspace(0, 1, 200)
    from varboot.reparam import ScalarDensity, solve_reparam

    assert np.abs(solve_reparam(ScalarDensity.constant(1.0), 50).y - np.linspace(0, 1, 51)).max() < 1e-12
    # high-curvature bend slows s*
    x = np.column_stack([s, np.tanh(20 * (s - 0.5)) * 0.2, 0.05 * s * s])
    field = frame_field(SampledCurve(s, x))
    smap = reparam_frames(field, 0.5)
    i = int(np.argmin(np.abs(smap.y - 0.5)))
    assert smap.dydx[i] < 1.0
    assert smap.dydx[i] < 0.5 * min(smap.dydx[0], smap.dydx[-1])


def test_joint_planar_curve():
    curve = circle(2.0)
    sol = joint_roll_reparam(curve, 0.5, 0.0, 1.0)
    assert np.abs(np.diff(sol.roll.theta, 2)).max() < 1e-8  # linear in t
    assert np.abs(sol.roll.theta - sol.smap.x).max() < 1e-6


def test_joint_helix_matches_bootstrap_lift(helix_app):
    sol = joint_roll_reparam(helix(2000), 0.7, 0.1, 0.9)
    assert np.abs(sol.smap.y - sol.smap.x).max() < 1e-8
    dtheta = np.diff(sol.roll.theta) / np.diff(sol.smap.x)
    assert np.ptp(dtheta) < 1e-5
    assert dtheta.mean() == pytest.approx(sol.slope - 0.5, abs=1e-6)
    u = helix_app.s
    A = CouplingMap.single_column(lambda q: -np.interp(q, u, helix_app.tau * helix_app.speed), 1)
    lifted = lift_theta_bvp(sol.smap.x, sol.smap.y, A, [0.1], [0.9])[:, 0]
    assert np.abs(lifted - sol.roll.theta).max() < 1e-6


def test_lift_reproduces_minimal_twist(helix_app):
    u = helix_app.s
    A = CouplingMap.single_column(lambda q: -np.interp(q, u, helix_app.tau * helix_app.speed), 1)
    lifted = lift_theta(u, u, A, [0.0])[:, 0]
    assert np.abs(lifted - minimal_twist(helix_app).theta).max() < 1e-9


@pytest.mark.parametrize(
    "curve,theta1",
    [(helix(2000), None), (helix(2000), 0.9), (bent(2000), None)],
    ids=["helix-free", "helix-pinned", "bent-free"],
)
def test_joint_equals_sequential(curve, theta1):
    sol = joint_roll_reparam(curve, 0.5, 0.2, theta1)
    smap, theta = sequential(curve, 0.5, 0.2, theta1)
    assert np.abs(smap.y - sol.smap.y).max() < 1e-6
    assert np.abs(theta - sol.roll.theta).max() < 1e-6


def test_joint_differs_from_sequential_when_end_pinned_and_torsion_varies():
    # Pinning theta1 adds a constant twist rate a; the joint problem spends it
    # uniformly in t, the sequential one uniformly in s.  They coincide only
    # for a = 0 or constant curvature and torsion.
    curve = bent(2000)
    sol = joint_roll_reparam(curve, 0.5, 0.2, 0.7)
    smap, theta = sequential(curve, 0.5, 0.2, 0.7)
    assert np.abs(smap.y - sol.smap.y).max() > 1e-3
    app = frenet_apparatus(curve)
    assert sol.cost < joint_cost(app, 0.5, smap.x, smap.y, theta) - 1e-4


@pytest.mark.parametrize("theta1", [None, 0.7])
def test_joint_perturbation_suite(theta1):
    curve = bent(2000)
    app = frenet_apparatus(curve)
    sol = joint_roll_reparam(curve, 0.5, 0.2, theta1)
    X = np.column_stack([sol.smap.y, sol.roll.theta])

    def cost(t, X):
        return joint_cost(app, 0.5, t, X[:, 0], X[:, 1])

    assert cost(sol.smap.x, X) == pytest.approx(sol.cost, rel=1e-6)
    report = perturbation_test(cost, sol.smap.x, X, PerturbationBasis(seed=5), trials=200)
    assert report.violations == 0
