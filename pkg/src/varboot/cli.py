"""Command-line front end: ``varboot <subcommand> [flags]``.

Exit status: 0 success, 2 validation error, 3 optimality violation.
Summaries go to stdout as ``key=value`` lines; trajectories go to ``--out``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import builtins
from .csvio import ROT_COLS, read_csv, write_csv
from .errors import VarbootError
from .euler_poincare import InertiaSpec, casimirs, ep_integrate_so3
from .frenet import SampledCurve, frame_cost, frame_field, joint_roll_reparam, minimal_twist
from .hyperbolic import (
    HalfPlanePath,
    ansatz_h2,
    curvature_report,
    geodesic_h2_bvp,
    geodesic_h2_path,
    hyperbolic_cost,
    hyperbolic_distance,
    steering_sweep,
)
from .lie import Pose, exp_so3, geodesic_pose_direct, geodesic_se3, geodesic_so3, project_to_rotation
from .reparam import MonotoneMap, SampledPath, ScalarDensity, optimal_cost, path_cost, solve_reparam, warp_trajectory
from .verify import (
    PerturbationBasis,
    direct_energy,
    line_energy,
    perturbation_test,
    rotate_perturbation,
    screw_coupling,
    screw_energy,
    so3_energy,
)

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 2, 3


class CliError(VarbootError):
    pass


def _emit(**items):
    for k, v in items.items():
        if isinstance(v, (float, np.floating)):
            v = repr(float(v))
        print(f"{k}={v}")


def _vec(text, n, flag):
    if text is None:
        raise CliError(f"{flag} is required")
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise CliError(f"{flag}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise CliError(f"{flag}: expected {n} numbers, got {len(vals)}")
    return np.array(vals)


def _grid(K):
    if K < 2:
        raise CliError("--grid must be >= 2")
    return K


def _positive(x, flag):
    if not x > 0:
        raise CliError(f"{flag} must be positive")
    return x


def _load_curve(args) -> SampledCurve:
    if args.input:
        _, a = read_csv(args.input, expected=["s", "x", "y", "z"], min_rows=5)
        try:
            return SampledCurve(a[:, 0], a[:, 1:])
        except VarbootError as exc:
            raise CliError(f"{args.input}: {exc}") from None
    return builtins.curve(args.curve, args.samples)


def _load_density(args) -> ScalarDensity:
    if args.input:
        _, a = read_csv(args.input, expected=["s", "m"], min_rows=3)
        return ScalarDensity.from_samples(a[:, 0], a[:, 1])
    return builtins.density(args.density)


def cmd_frame(args):
    curve = _load_curve(args)
    field = frame_field(curve)
    app = field.apparatus
    roll = minimal_twist(app, args.theta0, args.theta1)
    bishop = frame_field(curve, roll)
    _emit(
        samples=len(curve.s),
        kappa_mean=float(np.mean(app.kappa)),
        tau_mean=float(np.mean(app.tau)),
        frenet_cost=frame_cost(field),
        minimal_twist_cost=frame_cost(bishop),
    )
    if args.out:
        cols = ["s", "tx", "ty", "tz", "nx", "ny", "nz", "bx", "by", "bz", "kappa", "tau", "theta"]
        data = np.column_stack([curve.s, app.t, app.n, app.b, app.kappa, app.tau, roll.theta])
        write_csv(args.out, cols, data)


def cmd_reparam(args):
    m = _load_density(args)
    ymap = solve_reparam(m, _grid(args.grid))
    _emit(density=m.name, J_star=optimal_cost(m), path_cost=path_cost(m, ymap))
    if args.out:
        write_csv(args.out, ["x", "y"], np.column_stack([ymap.x, ymap.y]))


def cmd_warp(args):
    if not args.input:
        raise CliError("warp needs --in with columns t,x1,...")
    header, a = read_csv(args.input, prefix=["t"], min_rows=3)
    if len(header) < 2:
        raise CliError(f"{args.input}: row 1: need at least one coordinate column")
    path = SampledPath(a[:, 0], a[:, 1:])
    _, warped = warp_trajectory(path, K=args.grid)
    speed = np.linalg.norm(np.diff(warped.X, axis=0), axis=1) / np.diff(warped.t)
    _emit(samples=len(warped.t), speed_min=speed.min(), speed_max=speed.max())
    if args.out:
        write_csv(args.out, header, np.column_stack([warped.t, warped.X]))


def cmd_joint(args):
    curve = _load_curve(args)
    sol = joint_roll_reparam(curve, _positive(args.r, "--r"), args.theta0, args.theta1, K=_grid(args.grid))
    _emit(cost=sol.cost, slope=sol.slope)
    if args.out:
        write_csv(args.out, ["t", "s", "theta"], np.column_stack([sol.smap.x, sol.smap.y, sol.roll.theta]))


def _times(args):
    return np.linspace(0.0, 1.0, _grid(args.grid) + 1)


def cmd_interp_so3(args):
    R0 = exp_so3(_vec(args.q0, 3, "--q0"))
    R1 = exp_so3(_vec(args.q1, 3, "--q1"))
    t = _times(args)
    R = geodesic_so3(R0, R1, t)
    _emit(samples=len(t), energy=so3_energy(t, R))
    if args.out:
        write_csv(args.out, ["t"] + ROT_COLS, np.column_stack([t, R.reshape(-1, 9)]))


def _pose(text, flag):
    v = _vec(text, 6, flag)
    return Pose(exp_so3(v[:3]), v[3:])


def _interp_pose(args, law):
    g0, g1 = _pose(args.q0, "--q0"), _pose(args.q1, "--q1")
    t = _times(args)
    if law == "direct":
        g = geodesic_pose_direct(g0, g1, t)
        energy = direct_energy(t, g)
    else:
        g = geodesic_se3(g0, g1, t)
        energy = screw_energy(t, g, screw_coupling(g0, g1))
    _emit(law=law, samples=len(t), energy=energy)
    if args.out:
        write_csv(args.out, ["t"] + ROT_COLS + ["tx", "ty", "tz"], np.column_stack([t, g.R.reshape(-1, 9), g.t]))


def cmd_geodesic_h2(args):
    p0, p1 = _vec(args.q0, 2, "--q0"), _vec(args.q1, 2, "--q1")
    params, t0, t1 = geodesic_h2_bvp(p0, p1)
    path = geodesic_h2_path(p0, p1, _grid(args.grid) + 1)
    report = curvature_report(builtins.metric(args.metric), p0)
    _emit(
        a=params.a, b=params.b, c=params.c, d=params.d, t0=t0, t1=t1,
        length=t1 - t0, distance=hyperbolic_distance(p0, p1), cost=hyperbolic_cost(path),
        K0=report.K0, curvature_residual=report.residual,
    )
    if args.out:
        write_csv(args.out, ["t", "x1", "x2"], np.column_stack([path.t, path.x]))


def cmd_ansatz_h2(args):
    p0, p1 = _vec(args.q0, 2, "--q0"), _vec(args.q1, 2, "--q1")
    n = _grid(args.grid) + 1
    geo = hyperbolic_cost(geodesic_h2_path(p0, p1, n))
    ans = ansatz_h2(p0, p1, n)
    ans_cost = hyperbolic_cost(ans)
    omegas = np.linspace(-args.omega_max, args.omega_max, 2 * args.omega_steps + 1)
    sweep = steering_sweep(p0, p1, omegas)
    best = int(np.nanargmin(sweep))
    _emit(
        geodesic_cost=geo, ansatz_cost=ans_cost, gap=ans_cost - geo,
        steered_cost=float(sweep[best]), steered_omega0=float(omegas[best]),
    )
    if args.out:
        write_csv(args.out, ["t", "x1", "x2"], np.column_stack([ans.t, ans.x]))


def cmd_euler_top(args):
    I = InertiaSpec(np.diag(_vec(args.inertia, 3, "--inertia")), _vec(args.omega0, 3, "--omega0"))
    path = ep_integrate_so3(I, _vec(args.omega, 3, "--omega"), T=_positive(args.T, "--T"), dt=_positive(args.dt, "--dt"))
    E, L2 = casimirs(I, path.omega)
    _emit(steps=len(path.t) - 1, energy_drift=float(np.abs(E - E[0]).max()), momentum_drift=float(np.abs(L2 - L2[0]).max()))
    if args.out:
        write_csv(args.out, ["t", "wx", "wy", "wz"] + ROT_COLS, np.column_stack([path.t, path.omega, path.R.reshape(-1, 9)]))


def _h2_cost(t, X):
    return hyperbolic_cost(HalfPlanePath(t, X))


def _pose_perturb(t, X, eps):
    R = rotate_perturbation(t, X[:, :9].reshape(-1, 3, 3), eps[:, :3])
    return np.column_stack([R.reshape(-1, 9), X[:, 9:] + eps[:, 3:]])


def cmd_verify(args):
    if not args.input:
        raise CliError("verify needs --in")
    kind = args.cost
    basis = PerturbationBasis(amplitude=_positive(args.amplitude, "--amplitude"), seed=args.seed)
    if kind == "line":
        header, a = read_csv(args.input, prefix=["t"], min_rows=3)
        t, X, cost, perturb, dim = a[:, 0], a[:, 1:], line_energy, None, None
    elif kind == "h2":
        _, a = read_csv(args.input, expected=["t", "x1", "x2"], min_rows=5)
        t, X, cost, perturb, dim = a[:, 0], a[:, 1:], _h2_cost, None, None
    elif kind == "so3":
        _, a = read_csv(args.input, expected=["t"] + ROT_COLS, min_rows=3)
        t, X = a[:, 0], project_to_rotation(a[:, 1:].reshape(-1, 3, 3))
        cost, perturb, dim = so3_energy, rotate_perturbation, 3
    elif kind in ("se3", "direct"):
        _, a = read_csv(args.input, expected=["t"] + ROT_COLS + ["tx", "ty", "tz"], min_rows=3)
        t, X = a[:, 0], a[:, 1:]
        def as_pose(X):
            return Pose(project_to_rotation(X[:, :9].reshape(-1, 3, 3)), X[:, 9:])

        if kind == "se3":
            # The screw's own cost: rotation energy plus the coupled add-on.
            ends = as_pose(X[[0, -1]])
            A0 = screw_coupling(ends[0], ends[1])

            def cost(t, X):
                return screw_energy(t, as_pose(X), A0)

        else:

            def cost(t, X):
                return direct_energy(t, as_pose(X))

        perturb, dim = _pose_perturb, 6
    elif kind == "reparam":
        _, a = read_csv(args.input, expected=["x", "y"], min_rows=3)
        m = builtins.density(args.density)
        t, X, perturb, dim = a[:, 0], a[:, 1], None, None

        def cost(x, y):
            return path_cost(m, MonotoneMap(x, y))

    else:  # argparse restricts choices
        raise CliError(f"unknown cost {kind!r}")
    kwargs = {} if perturb is None else {"perturb": perturb}
    report = perturbation_test(cost, t, X, basis, trials=args.trials, dim=dim, tol=args.tol, **kwargs)
    print(f"cost={kind}")
    print(report.to_text())
    return EXIT_OK if report.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="varboot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="output CSV path")
        return sp

    def curve_flags(sp):
        sp.add_argument("--in", dest="input", help="curve CSV with columns s,x,y,z")
        sp.add_argument("--curve", default="helix", help=f"built-in curve {sorted(builtins.CURVES)}")
        sp.add_argument("--samples", type=int, default=2000)
        sp.add_argument("--theta0", type=float, default=0.0)
        sp.add_argument("--theta1", type=float, default=None)

    sp = add("frame", cmd_frame, "Frenet and minimal-twist frames of a curve")
    curve_flags(sp)

    sp = add("reparam", cmd_reparam, "optimal 1D reparametrization of a density")
    sp.add_argument("--in", dest="input", help="density table CSV with columns s,m")
    sp.add_argument("--density", default="one", help=f"built-in density {sorted(builtins.DENSITIES)}")
    sp.add_argument("--grid", type=int, default=1000)

    sp = add("warp", cmd_warp, "retime a sampled path to constant speed")
    sp.add_argument("--in", dest="input", help="path CSV with columns t,x1,...")
    sp.add_argument("--grid", type=int, default=None)

    sp = add("joint", cmd_joint, "joint roll and reparametrization of a framed curve")
    curve_flags(sp)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--grid", type=int, default=1000)

    for name, func, help in (
        ("interp-so3", cmd_interp_so3, "rotation geodesic between two rotation vectors"),
        ("interp-pose", lambda a: _interp_pose(a, "direct"), "direct-product pose interpolation"),
        ("interp-se3", lambda a: _interp_pose(a, "semidirect"), "SE(3) screw interpolation"),
    ):
        sp = add(name, func, help)
        sp.add_argument("--q0", help="start: rx,ry,rz (so3) or rx,ry,rz,tx,ty,tz (poses)")
        sp.add_argument("--q1", help="end, same format as --q0")
        sp.add_argument("--grid", type=int, default=100)

    for name, func, help in (
        ("geodesic-h2", cmd_geodesic_h2, "half-plane geodesic between two points"),
        ("ansatz-h2", cmd_ansatz_h2, "exponential ansatz versus the geodesic"),
    ):
        sp = add(name, func, help)
        sp.add_argument("--q0", help="start x1,x2")
        sp.add_argument("--q1", help="end x1,x2")
        sp.add_argument("--grid", type=int, default=1000)
    sub.choices["geodesic-h2"].add_argument("--metric", default="halfplane", help=f"{sorted(builtins.METRICS)}")
    sub.choices["ansatz-h2"].add_argument("--omega-max", type=float, default=3.0)
    sub.choices["ansatz-h2"].add_argument("--omega-steps", type=int, default=30)

    sp = add("euler-top", cmd_euler_top, "integrate the rigid-body Euler equations")
    sp.add_argument("--inertia", default="1,2,3", help="principal moments I1,I2,I3")
    sp.add_argument("--omega", default="1,0.01,0.01", help="initial body angular velocity")
    sp.add_argument("--omega0", default="0,0,0", help="offset velocity in the cost")
    sp.add_argument("--T", type=float, default=10.0)
    sp.add_argument("--dt", type=float, default=1e-3)

    sp = add("verify", cmd_verify, "perturbation test of a candidate trajectory")
    sp.add_argument("--in", dest="input", help="candidate CSV as written by the matching subcommand")
    sp.add_argument("--cost", choices=["line", "h2", "so3", "se3", "direct", "reparam"], default="line")
    sp.add_argument("--density", default="one", help="density for --cost reparam")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--amplitude", type=float, default=0.05)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        status = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK if status is None else status


def main(argv=None):
    sys.exit(run(argv))
