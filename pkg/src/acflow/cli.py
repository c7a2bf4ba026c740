"""Command-line entry points for the scenario harness.

Subcommands: simulate, entropy, monotonicity, converge, curvature-sweep,
gap-probe, csf.  Scenario configuration is a single JSON document mirroring
ScenarioConfig; outputs are CSV reports plus two-column plot-data files.
The exit code is 0 iff every assertion in the run passed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np


def _load_config(path: str):
    from .harness import ScenarioConfig

    with open(path) as fh:
        return ScenarioConfig.from_json(fh.read())


def _cmd_simulate(args) -> int:
    from .harness import run_scenario

    cfg = _load_config(args.config)
    rep = run_scenario(cfg, outdir=args.out, traj_out=args.trajectory)
    for name, ok, detail in rep.checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    print(f"report written to {args.out}")
    return 0 if rep.passed else 1


def _cmd_entropy(args) -> int:
    from .diagnostics import entropy
    from .fields import read_field

    u = read_field(args.snapshot)
    res = entropy(u, args.eps, normalized=args.normalized)
    print(f"entropy = {res.value!r} at center=({res.center[0]!r}, {res.center[1]!r}) "
          f"s={res.scale!r} rho={res.rho!r}")
    return 0


def _cmd_monotonicity(args) -> int:
    from .diagnostics import gaussian_density_trace
    from .solver import Trajectory

    traj = Trajectory.load(args.trajectory)
    center = np.array([float(v) for v in args.center.split(",")])
    times, vals, max_up = gaussian_density_trace(traj, center, args.scale)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("x,y\n")
            for t, v in zip(times, vals):
                fh.write(f"{float(t)!r},{float(v)!r}\n")
    print(f"max upward jump = {max_up!r} over {len(vals)} snapshots")
    return 0


def _cmd_converge(args) -> int:
    from .harness import convergence_sweep, thresholds

    eps = [float(v) for v in args.eps.split(",")]
    table = convergence_sweep(eps, args.metric, outdir=args.out)
    key = {"nodal-hausdorff": "min_order_nodal", "csf-defect": "min_order_defect",
           "phi-sup": "min_order_phi"}.get(args.metric)
    print(f"metric={args.metric} fitted_order={table.fitted_order!r} "
          f"residual={table.fit_residual!r}")
    for e, v in zip(table.epsilons, table.errors):
        print(f"  eps={e!r}  error={v!r}")
    if key is None:
        return 0
    target = thresholds()[key]
    ok = table.fitted_order >= target
    print(f"{'PASS' if ok else 'FAIL'} order >= {target}")
    return 0 if ok else 1


def _cmd_curvature_sweep(args) -> int:
    from .harness import curvature_sweep

    radii = [float(v) for v in args.radii.split(",")]
    rep = curvature_sweep(radii, args.eps, outdir=args.out)
    for name, ok, detail in rep.checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if rep.passed else 1


def _cmd_gap_probe(args) -> int:
    from .harness import gap_probe

    cfg = _load_config(args.config) if args.config else None
    rep = gap_probe(cfg, outdir=args.out)
    for name, ok, detail in rep.checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if rep.passed else 1


def _cmd_csf(args) -> int:
    from .csf import front_tracking
    from .geometry import Polyline

    curve, _ = Polyline.from_csv(args.curve)
    states = front_tracking(curve, args.dt, args.t_end)
    final = states[-1]
    if args.out:
        final.curve.to_csv(args.out, time=final.time)
    print(f"tracked to t={final.time!r}; length {final.curve.length!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="acflow",
                                description="Allen-Cahn layer laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="run a scenario config end to end")
    ps.add_argument("config")
    ps.add_argument("--out", default="acflow-out")
    ps.add_argument("--trajectory", default=None, help="directory for snapshots")
    ps.set_defaults(func=_cmd_simulate)

    pe = sub.add_parser("entropy", help="entropy of a stored snapshot")
    pe.add_argument("snapshot", help="snapshot base path (without .json/.f64)")
    pe.add_argument("--eps", type=float, required=True)
    pe.add_argument("--normalized", action="store_true")
    pe.set_defaults(func=_cmd_entropy)

    pm = sub.add_parser("monotonicity", help="Gaussian-density trace of a trajectory")
    pm.add_argument("trajectory", help="trajectory directory")
    pm.add_argument("--center", required=True, help="x,y")
    pm.add_argument("--scale", type=float, required=True, help="s_final")
    pm.add_argument("--out", default=None)
    pm.set_defaults(func=_cmd_monotonicity)

    pc = sub.add_parser("converge", help="epsilon sweep with order fit")
    pc.add_argument("config", nargs="?", default=None)
    pc.add_argument("--eps", default="0.08,0.04,0.02")
    pc.add_argument("--metric", default="nodal-hausdorff")
    pc.add_argument("--out", default=None)
    pc.set_defaults(func=_cmd_converge)

    pk = sub.add_parser("curvature-sweep", help="max|A| * r across circle radii")
    pk.add_argument("--radii", default="0.2,0.3,0.4,0.5")
    pk.add_argument("--eps", type=float, default=0.02)
    pk.add_argument("--out", default=None)
    pk.set_defaults(func=_cmd_curvature_sweep)

    pg = sub.add_parser("gap-probe", help="perturbation decay probe")
    pg.add_argument("config", nargs="?", default=None)
    pg.add_argument("--out", default=None)
    pg.set_defaults(func=_cmd_gap_probe)

    pf = sub.add_parser("csf", help="front-track a curve by curvature")
    pf.add_argument("curve", help="curve CSV (x,y with closed flag header)")
    pf.add_argument("--dt", type=float, default=1e-5)
    pf.add_argument("--t-end", type=float, default=0.05)
    pf.add_argument("--out", default=None)
    pf.set_defaults(func=_cmd_csf)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
