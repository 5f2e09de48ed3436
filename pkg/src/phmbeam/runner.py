"""Dispatch a scenario to the right driver and shared error metrics."""

from __future__ import annotations

import numpy as np

from . import em
from .scenario import Scenario, UNSTRUCTURED_SOLVERS


def run_scenario(scn: Scenario, mesh=None, kinds=None):
    if scn.solver in UNSTRUCTURED_SOLVERS:
        from .unstructured import solver
        return solver.run(scn, mesh=mesh, kinds=kinds)
    from .structured import driver
    return driver.run(scn)


def wave_error(result, scn: Scenario, comps=(em.EZ, em.BY),
               kind: str = "L1") -> float:
    """Error of the final state against the scenario's analytic wave.

    Structured kinetic/FVS runs compare at cell centers; FDTD compares at
    the staggered component positions and half-step B time; unstructured
    runs compare at cell centroids with volume weights.
    """
    from .diagnostics import error_norm

    if scn.solver == "fdtd":
        from .structured import fdtd
        dt = result.report.dt
        return fdtd.error_vs_analytic(result.yee, result.grid, scn.params,
                                      scn.wave, result.t, result.t - 0.5 * dt,
                                      comps=comps)
    if scn.solver in UNSTRUCTURED_SOLVERS:
        mesh = result.grid
        exact = em.analytic_plane_wave(scn.wave, mesh.cell_centroid, result.t,
                                       scn.params)
        errs = [error_norm(result.u[:, c], exact[:, c], kind,
                           volumes=mesh.cell_volume) for c in comps]
        return float(np.mean(errs))
    grid = result.grid
    exact = em.analytic_plane_wave(scn.wave, grid.cell_centers(), result.t,
                                   scn.params)
    errs = [error_norm(result.u[..., c], exact[..., c], kind) for c in comps]
    return float(np.mean(errs))
