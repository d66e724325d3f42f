"""Command line entry point: ``fracfem {solve,converge,fhn,validate}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .mesh import load_mesh
from .problems import PROBLEMS, fhn_mesh_n, fhn_spec
from .timestep import Discretization, TimeGrid, begm_solve, fhn_simulate

log = logging.getLogger("fracfem")


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and np.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _tau(text):
    if text in ("h2", "h"):
        return text
    return str(_positive_float(text))


def _ladder(text):
    try:
        return [_positive_int(p) for p in text.split(",") if p.strip()]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"bad ladder {text!r}: {exc}") from None


def _default_threads():
    env = os.environ.get("FRACFEM_THREADS")
    if env:
        return _positive_int(env)
    return os.cpu_count() or 1


def build_parser():
    p = argparse.ArgumentParser(prog="fracfem",
                                description="Nonlinear Riesz space-fractional diffusion solver")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, problems):
        sp.add_argument("--problem", choices=problems, default=problems[0])
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--beta", type=float)
        sp.add_argument("--kx", type=_positive_float)
        sp.add_argument("--ky", type=_positive_float)
        sp.add_argument("--T", type=_positive_float)
        sp.add_argument("--out", type=Path, default=Path("fracfem_out"))
        sp.add_argument("--threads", type=_positive_int, default=None)
        sp.add_argument("-v", "--verbose", action="store_true")

    names = list(PROBLEMS)
    s = sub.add_parser("solve", help="single run with field output")
    common(s, names)
    s.add_argument("--h", type=_positive_float, help="nominal mesh size, n = round(1/h)")
    s.add_argument("--mesh", type=Path, help="mesh file instead of --h")
    s.add_argument("--tau", type=_tau, default="h2")
    s.add_argument("--snapshots", type=_nonneg_int, default=0, help="write every n-th step")

    c = sub.add_parser("converge", help="convergence table over a mesh ladder")
    common(c, names)
    c.add_argument("--ladder", type=_ladder, default=[5, 10, 20, 40],
                   help="comma separated subdivision counts (h = 1/n)")
    c.add_argument("--tau", type=_tau, default="h2")
    c.add_argument("--energy", choices=analysis.ENERGY_REFERENCES, default="interpolant",
                   help="reference for the energy-norm error")

    f = sub.add_parser("fhn", help="FitzHugh-Nagumo run")
    common(f, ["fhn"])
    f.add_argument("--h", type=_positive_float,
                   help="nominal mesh size (default: diameter/20)")
    f.add_argument("--mesh", type=Path)
    f.add_argument("--tau", type=_positive_float, default=1.0)
    f.add_argument("--snapshots", type=_nonneg_int, default=0)

    v = sub.add_parser("validate", help="run the oracle checks")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", type=Path, default=None)
    v.add_argument("--threads", type=_positive_int, default=None)
    v.add_argument("-v", "--verbose", action="store_true")
    return p


_PARAMS = ("alpha", "beta", "kx", "ky")


def _resolve(args, spec, T_default):
    """Fill unset parameters from ``spec`` so ``run.txt`` records what actually ran."""
    for k in _PARAMS:
        setattr(args, k, getattr(spec, k))
    if args.T is None:
        args.T = T_default


def _problem(args):
    kwargs = {k: getattr(args, k) for k in _PARAMS if getattr(args, k) is not None}
    spec = PROBLEMS[args.problem](**kwargs)
    _resolve(args, spec, 1.0)
    return spec


def _write_run(out, args, extra=()):
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"{k} = {v}" for k, v in sorted(vars(args).items())]
    lines += [f"{k} = {v}" for k, v in extra]
    (out / "run.txt").write_text("\n".join(lines) + "\n")


def _mesh_for(args, problem, default_n=None):
    if args.mesh is not None and args.h is not None:
        raise SystemExit("fracfem: error: --h and --mesh are exclusive")
    if args.mesh is not None:
        return load_mesh(args.mesh), None
    if args.h is None and default_n is None:
        raise SystemExit("fracfem: error: one of --h or --mesh is required")
    n = default_n if args.h is None else max(1, round(1.0 / args.h))
    return problem.make_mesh(n), n


def cmd_solve(args):
    problem = _problem(args)
    T = args.T
    mesh, n = _mesh_for(args, problem)
    h = 1.0 / n if n else mesh.h
    grid = TimeGrid.from_final_time(T, analysis.tau_for(args.tau, h))
    _write_run(args.out, args, [("tau_resolved", grid.tau),
                                ("n_steps", grid.n_steps), ("num_vertices", mesh.num_vertices),
                                ("num_cells", mesh.num_cells), ("mesh_h", mesh.h)])
    disc = Discretization.for_problem(mesh, problem, threads=args.threads)
    traj = begm_solve(mesh, problem, grid, disc, snapshot_every=args.snapshots)
    for st in traj.snapshots:
        analysis.write_field(mesh, st.u, args.out / f"u_{st.n:06d}.vtk")
    u = traj.final.u
    analysis.write_field(mesh, u, args.out / "u_final.vtk")
    if problem.u_exact is not None:
        t = grid.T
        report = {
            "error_l2": analysis.error_l2(mesh, u, problem.u_exact, t, disc.rule),
            "error_linf": analysis.error_linf(mesh, u, problem.u_exact, t, disc.rule),
            "error_energy": analysis.error_energy(mesh, u, problem.u_exact, t, problem.alpha,
                                                  problem.beta, problem.kx, problem.ky,
                                                  disc.rule, disc.derivs),
        }
        text = "".join(f"{k} {v:.6e}\n" for k, v in report.items())
        (args.out / "errors.txt").write_text(text)
        print(text, end="")
    return 0


def cmd_converge(args):
    problem = _problem(args)
    _write_run(args.out, args)
    records = analysis.convergence_study(problem, args.ladder, args.tau, args.T,
                                         threads=args.threads, energy=args.energy)
    analysis.write_csv(records, args.out / "convergence.csv")
    print((args.out / "convergence.csv").read_text(), end="")
    return 0


def cmd_fhn(args):
    spec, w0, params = fhn_spec(**{k: getattr(args, k) for k in _PARAMS
                                   if getattr(args, k) is not None})
    _resolve(args, spec, 200.0)
    diameter = 2 * params.r
    mesh, _ = _mesh_for(args, spec, default_n=fhn_mesh_n(params))
    grid = TimeGrid.from_final_time(args.T, args.tau)
    _write_run(args.out, args, [("n_steps", grid.n_steps),
                                ("num_vertices", mesh.num_vertices), ("mesh_h", mesh.h),
                                ("diameter", diameter)])
    traj = fhn_simulate(mesh, spec, w0, params, grid, snapshot_every=args.snapshots,
                        threads=args.threads)
    for st in traj.snapshots:
        analysis.write_field(mesh, st.u, args.out / f"fhn_{st.n:06d}.vtk", extra={"w": st.w})
    final = traj.final
    analysis.write_field(mesh, final.u, args.out / "fhn_final.vtk", extra={"w": final.w})
    area = analysis.excited_area(mesh, final.u)
    print(f"u_min {final.u.min():.6e}\nu_max {final.u.max():.6e}\nexcited_area {area:.6e}")
    return 0


def cmd_validate(args):
    from .validate import run_checks
    results = run_checks(seed=args.seed, threads=args.threads)
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    print("\n".join(lines))
    if args.out is not None:
        _write_run(args.out, args)
        (args.out / "validate.txt").write_text("\n".join(lines) + "\n")
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {"solve": cmd_solve, "converge": cmd_converge, "fhn": cmd_fhn,
            "validate": cmd_validate}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        if args.threads is None:
            args.threads = _default_threads()
    except argparse.ArgumentTypeError as exc:
        parser.error(f"FRACFEM_THREADS: {exc}")
    if args.command != "validate":
        # the FitzHugh-Nagumo run also accepts the classical order 1
        closed = args.command == "fhn"
        for name in ("alpha", "beta"):
            v = getattr(args, name)
            if v is not None and not (0.5 < v < 1.0 or (closed and v == 1.0)):
                parser.error(f"--{name} must lie in (1/2, 1), got {v}")
    try:
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            parser.error(exc.code.split("error: ", 1)[-1])
        raise
    except Exception as exc:  # noqa: BLE001
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
