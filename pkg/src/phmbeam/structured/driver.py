"""Run orchestration for the structured solvers.

Advances a scenario to t_end, collecting per-phase wall times, diagnostic
series, requested snapshots, and watching the stability sentinels (NaN and
optional L-infinity growth). The exact-transport solver requires unit beam
CFL; a clipped final step falls back to the CTU transport, which is the
same scheme evaluated at fractional CFL.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .. import em, kinetic
from ..em import PhmParams
from ..kinetic import Lattice
from ..scenario import Scenario, ScenarioError
from . import beam, fdtd, fvs
from .grid import FieldState, GridError, StructuredGrid, initial_state


@dataclass
class RunReport:
    """Bookkeeping for one run: sizes, timings, series, output manifest."""

    scenario: str
    solver: str
    resolution: tuple[int, int, int]
    steps: int = 0
    dt: float = 0.0
    wall: dict = field(default_factory=dict)
    status: str = "ok"
    abort_step: int | None = None
    series: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def total_wall(self) -> float:
        return sum(self.wall.values())

    @property
    def cells(self) -> int:
        return int(np.prod(self.resolution))

    @property
    def throughput(self) -> float:
        """cells * steps per second of accumulated phase time."""
        w = self.total_wall
        return self.cells * self.steps / w if w > 0 else float("nan")


@dataclass
class RunResult:
    report: RunReport
    grid: StructuredGrid
    u: np.ndarray                      # final macroscopic state
    yee: fdtd.YeeFields | None = None  # FDTD native fields
    state: FieldState | None = None    # kinetic beams
    snapshots: dict = field(default_factory=dict)  # time -> (nx,ny,nz,8)
    t: float = 0.0


def make_grid(scn: Scenario) -> StructuredGrid:
    dims, spacing = [], []
    for ax in range(3):
        n = scn.n[ax]
        lo, hi = scn.extent[ax]
        dims.append(n)
        spacing.append((hi - lo) / n if n > 1 else max(hi - lo, 1.0))
    origin = tuple(scn.extent[ax][0] for ax in range(3))
    return StructuredGrid(dims=tuple(dims), spacing=tuple(spacing),
                          origin=origin, bc=scn.bc)


def time_step(scn: Scenario, grid: StructuredGrid) -> float:
    """Scenario time step from the per-solver CFL rule."""
    h = min(grid.spacing[ax] for ax in grid.active_axes)
    if scn.solver in ("beam_et", "beam_ctu"):
        if scn.solver == "beam_et" and abs(scn.cfl - 1.0) > 1e-12:
            raise GridError("exact transport is only exact at unit beam CFL; "
                            f"got cfl={scn.cfl}")
        return scn.cfl * h / (scn.lam * scn.params.c)
    if scn.solver == "fvs":
        return scn.cfl * h / fvs.max_wave_speed(scn.params)
    if scn.solver == "fdtd":
        if scn.cfl > 1.0 + 1e-12:
            raise GridError(f"FDTD Courant number must be <= 1, got {scn.cfl}")
        return scn.cfl * fdtd.courant_limit(grid, scn.params)
    raise ScenarioError(f"not a structured solver: {scn.solver!r}")


def _sigma_fields(scn: Scenario, grid: StructuredGrid):
    """Conductivity at cell centers, and at Yee E positions for FDTD."""
    if scn.sigma is None:
        return None, None
    centers = grid.cell_centers()
    sig_c = scn.sigma.evaluate(centers)
    if scn.solver != "fdtd":
        return sig_c, None
    sig_e = np.empty(grid.dims + (3,))
    for comp in range(3):
        pos = fdtd.component_positions(grid, fdtd.E_OFFSETS, comp)
        sig_e[..., comp] = scn.sigma.evaluate(pos)
    return sig_c, sig_e


def run(scn: Scenario) -> RunResult:
    """Advance the scenario to t_end, clipping the last step."""
    if scn.solver not in ("beam_et", "beam_ctu", "fvs", "fdtd"):
        raise ScenarioError(f"not a structured solver: {scn.solver!r}")
    grid = make_grid(scn)
    params = scn.params
    dt = time_step(scn, grid)
    centers = grid.cell_centers()
    u0 = scn.initial_condition(centers)
    sigma_c, sigma_e = _sigma_fields(scn, grid)

    lattice = None
    state = None
    yee = None
    if scn.solver in ("beam_et", "beam_ctu"):
        lattice = Lattice(dim=grid.dim, lam=scn.lam, c=params.c)
        state = initial_state(grid, lattice, params, u0)
        current = lambda: state.u  # noqa: E731
    elif scn.solver == "fvs":
        fvs.check_cfl(grid, params, dt, strict=scn.strict_cfl)
        u = u0.copy()
        current = lambda: u  # noqa: E731
    else:
        yee = fdtd.init_yee(grid, params, dt,
                            scn.wave if scn.ic == "wave" else None,
                            ic_fn=scn.initial_condition)
        current = lambda: fdtd.macro_state(yee)  # noqa: E731

    report = RunReport(scenario=scn.name, solver=scn.solver,
                       resolution=grid.dims, dt=dt)
    result = RunResult(report=report, grid=grid, u=u0, state=state, yee=yee)

    mon = scn.monitor
    initial_max = float(np.max(np.abs(u0[..., mon])))
    series_t, series_max, series_min = [0.0], [initial_max], [
        float(np.min(u0[..., mon]))]
    series_sum = [u0.reshape(-1, em.NCOMP).sum(axis=0)]
    phi_steps = []

    pending = sorted(set(scn.snapshot_times))
    while pending and pending[0] <= 0.0:
        result.snapshots[pending.pop(0)] = u0.copy()

    t = 0.0
    step = 0
    guard = scn.growth_guard
    while scn.t_end - t > 1e-9 * dt:
        remaining = scn.t_end - t
        step_dt = remaining if remaining <= dt * (1 + 1e-9) else dt
        clipped = step_dt < dt * (1 - 1e-9)
        if not clipped:
            step_dt = dt  # absorb roundoff so exact-transport stays exact
        rho_half = None
        if scn.charge is not None:
            rho_half = scn.charge.evaluate(centers, t + 0.5 * step_dt)
        phi_before = current()[..., em.PHI].copy() if scn.charge is not None else None

        if scn.solver in ("beam_et", "beam_ctu"):
            transport = "ctu" if (scn.solver == "beam_ctu" or clipped) else "et"
            if clipped and scn.solver == "beam_et" and not report.notes:
                report.notes.append("final clipped step used CTU transport")
            state = beam.step_beam(state, grid, lattice, params, scn.policy,
                                   step_dt, t, transport, wave=scn.wave,
                                   sigma=sigma_c, rho_half=rho_half,
                                   timers=report.wall)
        elif scn.solver == "fvs":
            u = fvs.step_fvs(u, grid, params, step_dt, t,
                             reconstruction=scn.reconstruction,
                             time_scheme=scn.time_scheme, limiter=scn.limiter,
                             wave=scn.wave, sigma=sigma_c, rho_half=rho_half,
                             timers=report.wall)
        else:
            yee = fdtd.step_fdtd(yee, grid, params, step_dt, sigma_e=sigma_e,
                                 timers=report.wall)

        t += step_dt
        step += 1
        field_now = current()
        mono = field_now[..., mon]
        series_t.append(t)
        series_max.append(float(np.max(np.abs(mono))))
        series_min.append(float(np.min(mono)))
        series_sum.append(field_now.reshape(-1, em.NCOMP).sum(axis=0))
        if phi_before is not None:
            dphi = field_now[..., em.PHI] - phi_before
            phi_steps.append((t, step_dt, float(np.sum(dphi * dphi))))

        if not np.isfinite(series_max[-1]) or not np.all(np.isfinite(mono)):
            report.status, report.abort_step = "nan", step
            break
        if guard is not None and initial_max > 0 \
                and series_max[-1] > guard * initial_max:
            report.status, report.abort_step = "growth", step
            break

        while pending and t >= pending[0] - 0.5 * dt:
            result.snapshots[pending.pop(0)] = field_now.copy()

    report.steps = step
    report.series["t"] = np.asarray(series_t)
    report.series["max_abs_monitor"] = np.asarray(series_max)
    report.series["min_monitor"] = np.asarray(series_min)
    report.series["sum_state"] = np.asarray(series_sum)
    if phi_steps:
        report.series["phi_step"] = np.asarray(phi_steps)
    result.u = current().copy()
    result.t = t
    result.state = state
    result.yee = yee
    return result
