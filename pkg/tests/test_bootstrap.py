import numpy as np
import pytest
from oracles import shooting_constant_coupling

from varboot.bootstrap import (
    AugmentedTrajectory,
    CouplingMap,
    augmented_cost,
    check_weight,
    composite_metric,
    kinetic_cost,
    lift_theta,
    lift_theta_bvp,
    theta_first_integral,
)
from varboot.errors import InvalidCouplingError, InvalidWeightError, UnsupportedCaseError
from varboot.reparam import MonotoneMap, ScalarDensity, path_cost, solve_reparam
from varboot.verify import PerturbationBasis, perturbation_test

QUAD = ScalarDensity(lambda y: (1 + y) ** 2, "quadratic")
W2 = np.array([[2.0, 0.3], [0.3, 1.0]])


def base_cost(t, q):
    return 0.5 * path_cost(QUAD, MonotoneMap(t, np.ravel(q)))


@pytest.fixture(scope="module")
def qstar():
    ymap = solve_reparam(QUAD, 1000)
    return ymap.x, ymap.y


def test_zero_coupling_gives_constant():
    t = np.linspace(0, 1, 11)
    th = lift_theta(t, np.column_stack([t, t * t]), CouplingMap.zero(2, 2), [1.0, -2.0])
    assert np.array_equal(th, np.tile([1.0, -2.0], (11, 1)))


def test_constant_coupling_on_line():
    rng = np.random.default_rng(0)
    A0 = rng.normal(size=(2, 3))
    t = np.linspace(0, 1, 21)
    q = np.outer(t, rng.normal(size=3)) + rng.normal(size=3)
    b = np.array([0.5, 0.1])
    th = lift_theta(t, q, CouplingMap.constant(A0), b)
    assert np.abs(th - (b + (q - q[0]) @ A0.T)).max() < 1e-14


def test_bvp_zero_coupling():
    t = np.linspace(0, 1, 11)
    th = lift_theta_bvp(t, t, CouplingMap.zero(2, 1), [0, 0], [1, 2])
    assert np.abs(th - np.column_stack([t, 2 * t])).max() < 1e-15


def test_bvp_general_coupling_unsupported():
    t = np.linspace(0, 1, 5)
    A = CouplingMap.general(lambda q: np.ones((1, 2)), 1, 2)
    with pytest.raises(UnsupportedCaseError):
        lift_theta_bvp(t, np.column_stack([t, t]), A, [0], [1])


def test_shape_and_weight_errors():
    t = np.linspace(0, 1, 5)
    with pytest.raises(InvalidCouplingError):
        lift_theta(t, np.column_stack([t, t]), CouplingMap.constant(np.ones((1, 3))), [0.0])
    with pytest.raises(InvalidCouplingError):
        CouplingMap.general(lambda q: np.ones((2, 2)), 1, 2)(np.zeros(2))
    with pytest.raises(InvalidWeightError):
        check_weight([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(InvalidWeightError):
        check_weight([[1.0, 0.0], [0.0, -1.0]])


def test_shooting_oracle_constant_coupling(qstar):
    t, q = qstar
    A0 = np.array([0.7, -0.4])
    theta0, theta1 = np.array([0.2, -0.1]), np.array([1.5, 0.4])
    lifted = lift_theta_bvp(t, q, CouplingMap.constant(A0[:, None]), theta0, theta1)
    ts, qs, ths = shooting_constant_coupling(lambda q: (1 + q) ** 2, lambda q: 2 * (1 + q), A0, W2, 0.0, 1.0, theta0, theta1, n=1000)
    assert np.abs(ts - t).max() < 1e-15
    assert np.abs(qs - q).max() < 1e-6
    assert np.abs(ths - lifted).max() < 1e-6


def test_first_integral_constant_along_bvp(qstar):
    t, q = qstar
    A = CouplingMap.single_column(lambda s: [np.sin(3 * s), 1 + s * s], 2)
    th = lift_theta_bvp(t, q, A, [0, 1], [2, -1])
    assert np.abs(th[0] - [0, 1]).max() == 0 and np.abs(th[-1] - [2, -1]).max() == 0
    a = theta_first_integral(t, q, th, A)
    assert np.ptp(a, axis=0).max() < 1e-12


def test_composite_metric_identities():
    rng = np.random.default_rng(1)
    M = lambda q: np.diag([1 + q[0] ** 2, 2.0])
    A = CouplingMap.general(lambda q: np.array([[np.sin(q[0]), q[1]], [1.0, -q[0]]]), 2, 2)
    G = composite_metric(M, A, W2)
    zero = composite_metric(M, CouplingMap.zero(2, 2), W2)
    for _ in range(50):
        state = rng.normal(size=4)
        v = rng.normal(size=4)
        Mq, Aq = M(state), A(state[:2])
        r = v[2:] - Aq @ v[:2]
        f2 = 0.5 * v[:2] @ Mq @ v[:2] + 0.5 * r @ W2 @ r
        assert 0.5 * v @ G(state) @ v == pytest.approx(f2, abs=1e-12)
        np.linalg.cholesky(G(state))
        Z = zero(state)
        assert np.array_equal(Z[:2, 2:], np.zeros((2, 2))) and np.array_equal(Z[:2, :2], Mq)


def test_composite_metric_frame_instance():
    # q = s, theta = roll; m = r^2 k^2 + 1, coupling -tau, weight r^2
    r, kappa, tau = 0.8, 0.6, 0.3
    G = composite_metric(lambda q: np.array([[r * r * kappa**2 + 1]]), CouplingMap.constant([[-tau]]), [[r * r]])
    sdot, thdot = 0.7, -1.3
    v = np.array([sdot, thdot])
    expected = (r * r * kappa**2 + 1) * sdot**2 + r * r * (tau * sdot + thdot) ** 2
    assert v @ G(np.zeros(2)) @ v == pytest.approx(expected, abs=1e-14)


def test_composite_metric_recursion_is_spd():
    rng = np.random.default_rng(2)
    M = lambda q: np.array([[1 + q[0] ** 2]])
    G1 = composite_metric(M, CouplingMap.constant([[0.5], [-1.0]]), W2)
    A2 = CouplingMap.general(lambda z: np.array([[z[0], np.cos(z[1]), 0.3]]), 1, 3)
    G2 = composite_metric(G1, A2, [[0.7]])
    for _ in range(20):
        np.linalg.cholesky(G2(rng.normal(size=4)))


def test_augmented_cost_equals_base_for_lift(qstar):
    t, q = qstar
    A = CouplingMap.single_column(lambda s: [np.exp(s), -s], 2)
    th = lift_theta(t, q, A, [0.3, 0.0])
    traj = AugmentedTrajectory(t, q, th)
    assert augmented_cost(base_cost, traj, A, W2) == base_cost(t, q)
    metric_cost = kinetic_cost(lambda s: np.array([[(1 + s[0]) ** 2]]))
    assert abs(augmented_cost(metric_cost, traj, A, W2) - metric_cost(t, q)) <= 1e-12 * metric_cost(t, q)


def test_augmented_cost_perturbation_identity(qstar):
    t, q = qstar
    A = CouplingMap.single_column(lambda s: [np.exp(s), -s], 2)
    th = lift_theta(t, q, A, [0.3, 0.0])
    eps, _ = PerturbationBasis(seed=4).draw(np.random.default_rng(4), t, 2)
    base = base_cost(t, q)
    bumped = augmented_cost(base_cost, AugmentedTrajectory(t, q, th + eps), A, W2)
    de = np.diff(eps, axis=0) / np.diff(t)[:, None]
    expected = 0.5 * np.sum(np.einsum("ni,ij,nj->n", de, W2, de) * np.diff(t))
    assert bumped - base == pytest.approx(expected, abs=1e-12)
    # and the piecewise-linear value converges to the smooth integral
    fine = np.linspace(0, 1, 20001)
    _, de_fine = PerturbationBasis(seed=4).draw(np.random.default_rng(4), fine, 2)
    smooth = 0.5 * np.trapezoid(np.einsum("ni,ij,nj->n", de_fine, W2, de_fine), fine)
    assert expected == pytest.approx(smooth, rel=1e-5)
    lam = 3.0
    scaled = augmented_cost(base_cost, AugmentedTrajectory(t, q, th + eps), A, lam * W2)
    assert scaled - base == pytest.approx(lam * expected, abs=1e-12)


def test_lift_perturbation_suite(qstar):
    t, q = qstar
    A = CouplingMap.single_column(lambda s: [np.exp(s), -s], 2)
    th = lift_theta_bvp(t, q, A, [0.3, 0.0], [1.0, 2.0])

    def cost(t, X):
        return augmented_cost(base_cost, AugmentedTrajectory(t, X[:, 0], X[:, 1:]), A, W2)

    report = perturbation_test(cost, t, np.column_stack([q, th]), PerturbationBasis(seed=6), trials=200)
    assert report.violations == 0


def test_two_layer_lift_perturbation_suite(qstar):
    t, q = qstar
    A1 = CouplingMap.constant([[0.5], [-1.0]])
    th = lift_theta(t, q, A1, [0.0, 0.0])
    A2 = CouplingMap.general(lambda z: np.array([[z[0], np.cos(z[1]), 0.3]]), 1, 3)
    phi = lift_theta(t, np.column_stack([q, th]), A2, [0.1])

    def layer1(t, z):
        z = np.asarray(z)
        return augmented_cost(base_cost, AugmentedTrajectory(t, z[:, 0], z[:, 1:]), A1, W2)

    def cost(t, X):
        return augmented_cost(layer1, AugmentedTrajectory(t, X[:, :3], X[:, 3:]), A2, [[0.7]])

    X = np.column_stack([q, th, phi])
    assert cost(t, X) == pytest.approx(base_cost(t, q), abs=1e-13)
    report = perturbation_test(cost, t, X, PerturbationBasis(seed=7), trials=200)
    assert report.violations == 0
