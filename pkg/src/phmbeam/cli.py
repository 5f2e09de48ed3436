"""Command-line entry points.

Subcommands:

* ``run``          one scenario: snapshots (VTK), extractions and series (CSV)
* ``convergence``  resolution sweep of the plane-wave case: CSV + fitted slope
* ``compare``      several solvers on one scenario: paired extractions plus a
                   runtime table (measured, never asserted)
* ``mesh-info``    validate a mesh file and print counts and quality numbers

Exit codes: 0 success, 2 configuration/validation error, 3 stability abort
(NaN or growth sentinel), 1 unexpected failure. Data CSVs are byte-stable
across reruns; ``timings.csv`` holds wall-clock measurements and is exempt.
The ``--threads`` flag is accepted for interface compatibility and recorded;
kernels are vectorized and their results do not depend on it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import cases, diagnostics, em
from .io.config import ConfigError, load_config, scenario_from_config
from .io.tables import write_csv
from .io.vtkio import write_vtk_structured, write_vtk_unstructured
from .runner import run_scenario, wave_error
from .scenario import Scenario, ScenarioError, UNSTRUCTURED_SOLVERS
from .structured.grid import GridError
from .unstructured.mesh import MeshError, parse_msh

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNSTABLE = 0, 1, 2, 3


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario configuration file (INI)")
    p.add_argument("--case", help="bundled case name (alternative to --config)")
    p.add_argument("--solver", help="beam_et|beam_ctu|fvs|fdtd|beam_u|fvs_u")
    p.add_argument("--n", help="cells per axis")
    p.add_argument("--dim", help="dimension for the plane-wave case")
    p.add_argument("--omega", help="relaxation parameter or 'detector'")
    p.add_argument("--lambda", dest="lam", help="kinetic speed factor")
    p.add_argument("--chi", help="electric cleaning speed factor")
    p.add_argument("--gamma", help="magnetic cleaning speed factor")
    p.add_argument("--cfl", help="CFL number (solver-specific meaning)")
    p.add_argument("--t-end", dest="t_end", help="final time")
    p.add_argument("--mesh", help="mesh file for unstructured cases")
    p.add_argument("--strict-cfl", action="store_const", const="true",
                   dest="strict_cfl", help="error instead of warn above the "
                   "FVS stability bound")
    p.add_argument("--out-dir", default="out", help="output directory")
    p.add_argument("--threads", type=int, default=1,
                   help="worker hint; results are independent of it")


def _build_scenario(args) -> Scenario:
    cfg = load_config(args.config) if args.config else {"scenario": {}}
    overrides = {k: getattr(args, k, None) for k in
                 ("case", "solver", "n", "dim", "omega", "chi", "gamma",
                  "cfl", "t_end", "mesh", "strict_cfl")}
    overrides["lambda"] = args.lam
    if overrides.get("mesh"):
        overrides["mesh"] = str(overrides["mesh"])
    return scenario_from_config(cfg, overrides)


def _write_outputs(out_dir: Path, scn: Scenario, result) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    geometry = result.grid
    unstructured = scn.solver in UNSTRUCTURED_SOLVERS

    snaps = dict(result.snapshots)
    snaps.setdefault(result.t, result.u)
    for t, u in sorted(snaps.items()):
        path = out_dir / f"{scn.name}_{scn.solver}_t{t:g}.vtk"
        if unstructured:
            write_vtk_unstructured(path, geometry, u, title=f"t={t:g}")
        else:
            write_vtk_structured(path, geometry, u, title=f"t={t:g}")
        written.append(str(path))

    for line in scn.lines:
        table = diagnostics.extract_line(result.u, geometry, line)
        path = out_dir / f"{scn.name}_{scn.solver}_{line.name}.csv"
        write_csv(path, table)
        written.append(str(path))
    for circle in scn.circles:
        table = diagnostics.extract_circle(result.u, geometry, circle)
        path = out_dir / f"{scn.name}_{scn.solver}_{circle.name}.csv"
        write_csv(path, table)
        written.append(str(path))

    series = result.report.series
    table = {"t": series["t"], "max_abs_monitor": series["max_abs_monitor"],
             "min_monitor": series["min_monitor"]}
    for comp in range(em.NCOMP):
        table[f"sum_{em.COMPONENT_NAMES[comp]}"] = series["sum_state"][:, comp]
    path = out_dir / f"{scn.name}_{scn.solver}_series.csv"
    write_csv(path, table)
    written.append(str(path))

    if not unstructured and scn.dim == 2:
        # long-form slice of the monitored component, contour-plot ready
        centers = geometry.cell_centers()
        name = em.COMPONENT_NAMES[scn.monitor]
        path = out_dir / f"{scn.name}_{scn.solver}_field.csv"
        write_csv(path, {
            "x": centers[..., 0].ravel(), "y": centers[..., 1].ravel(),
            name: result.u[..., scn.monitor].ravel()})
        written.append(str(path))
    result.report.outputs = written
    return written


def _print_report(report) -> None:
    wall = report.total_wall
    print(f"scenario {report.scenario}: solver={report.solver} "
          f"cells={report.cells} steps={report.steps} dt={report.dt:g}")
    phases = ", ".join(f"{k}={v:.3f}s" for k, v in sorted(report.wall.items()))
    print(f"  phases: {phases or 'n/a'}")
    if wall > 0:
        print(f"  throughput: {report.throughput:,.0f} cell-steps/s")
    for note in report.notes:
        print(f"  note: {note}")
    if report.status != "ok":
        print(f"  ABORTED: {report.status} at step {report.abort_step}")


def cmd_run(args) -> int:
    scn = _build_scenario(args)
    result = run_scenario(scn)
    _write_outputs(Path(args.out_dir), scn, result)
    _print_report(result.report)
    if scn.wave is not None and scn.ic == "wave":
        print(f"  L1 error vs analytic wave: {wave_error(result, scn):.6g}")
    return EXIT_OK if result.report.status == "ok" else EXIT_UNSTABLE


def cmd_convergence(args) -> int:
    ns = [int(v) for v in args.n_list.split(",")]
    if len(ns) < 2:
        raise ConfigError("convergence needs at least two resolutions")
    dim = int(args.dim or 1)
    errors = []
    for n in ns:
        kwargs = {}
        if args.omega is not None:
            kwargs["omega"] = float(args.omega)
        if args.lam is not None:
            kwargs["lam"] = float(args.lam)
        scn = cases.scenario_plane_wave(dim, n, solver=args.solver or "beam_et",
                                        **kwargs)
        result = run_scenario(scn)
        if result.report.status != "ok":
            print(f"n={n}: aborted ({result.report.status})")
            return EXIT_UNSTABLE
        err = wave_error(result, scn)
        errors.append(err)
        print(f"n={n}: L1 error {err:.6g}")
    series = diagnostics.ConvergenceSeries(tuple(ns), tuple(errors))
    slope = diagnostics.convergence_order(series)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"convergence_{args.solver or 'beam_et'}_{dim}d.csv"
    write_csv(path, {"n": np.asarray(ns), "l1_error": np.asarray(errors)})
    print(f"fitted slope: {slope:.3f}  -> {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    if len(solvers) < 2:
        raise ConfigError("compare needs at least two solvers")
    rows = {"solver": [], "cells": [], "steps": [], "wall_s": [],
            "cell_steps_per_s": [], "overshoot": [], "status": []}
    out_dir = Path(args.out_dir)
    for solver in solvers:
        args.solver = solver
        scn = _build_scenario(args)
        result = run_scenario(scn)
        _write_outputs(out_dir, scn, result)
        rep = result.report
        over = diagnostics.overshoot_metric(rep.series["max_abs_monitor"],
                                            rep.series["min_monitor"])
        rows["solver"].append(solver)
        rows["cells"].append(rep.cells)
        rows["steps"].append(rep.steps)
        rows["wall_s"].append(round(rep.total_wall, 4))
        rows["cell_steps_per_s"].append(round(rep.throughput, 1))
        rows["overshoot"].append(over.overshoot)
        rows["status"].append(rep.status)
        _print_report(rep)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "timings.csv"
    write_csv(path, rows)
    base = rows["wall_s"][0]
    for s, w in zip(rows["solver"], rows["wall_s"]):
        ratio = w / base if base > 0 else float("nan")
        print(f"{s}: wall {w:.3f}s  ratio vs {rows['solver'][0]}: {ratio:.2f}")
    print(f"runtime table -> {path} (measured, not asserted)")
    return EXIT_OK


def cmd_mesh_info(args) -> int:
    mesh = parse_msh(args.mesh)
    print(f"{args.mesh}: {mesh.num_cells} cells, {mesh.num_faces} faces, "
          f"{len(mesh.nodes)} nodes")
    print(f"  total volume: {mesh.cell_volume.sum():.6g}")
    print(f"  cell volume min/max: {mesh.cell_volume.min():.3e} / "
          f"{mesh.cell_volume.max():.3e}")
    print(f"  closure residual: {mesh.closure_residual():.3e}")
    for name in mesh.patch_names:
        print(f"  patch {name}: {len(mesh.patch_faces(name))} faces")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phmbeam",
        description="Kinetic beam solvers for the perfectly hyperbolic "
                    "Maxwell system")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    _scenario_flags(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_conv = sub.add_parser("convergence", help="plane-wave resolution sweep")
    _scenario_flags(p_conv)
    p_conv.add_argument("--n-list", default="20,40,80",
                        help="comma-separated resolutions")
    p_conv.set_defaults(fn=cmd_convergence)

    p_cmp = sub.add_parser("compare", help="run several solvers on one case")
    _scenario_flags(p_cmp)
    p_cmp.add_argument("--solvers", required=True,
                       help="comma-separated solver list")
    p_cmp.set_defaults(fn=cmd_compare)

    p_mesh = sub.add_parser("mesh-info", help="validate and describe a mesh")
    p_mesh.add_argument("mesh", help="mesh file path")
    p_mesh.set_defaults(fn=cmd_mesh_info)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ScenarioError, GridError, MeshError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
