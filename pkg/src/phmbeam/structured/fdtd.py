"""Yee-grid FDTD baseline for the pure Maxwell curl equations.

E components live on edge centers, B components on face centers:

    Ex (i+1/2, j, k)    Bx (i, j+1/2, k+1/2)
    Ey (i, j+1/2, k)    By (i+1/2, j, k+1/2)
    Ez (i, j, k+1/2)    Bz (i+1/2, j+1/2, k)

E is stored at integer times, B at half steps, updated leapfrog. No
cleaning potentials here; the solver handles the curl system

    dE/dt = c^2 curl B - sigma E / eps0,      dB/dt = -curl E

with the conductive term folded into the E update semi-implicitly.
Boundaries are periodic; inactive axes degenerate automatically since a
difference across a single wrapped layer vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..em import BX, BY, BZ, EX, EY, EZ, NCOMP, PhmParams, WaveConfig, analytic_plane_wave
from .grid import GridError, StructuredGrid


@dataclass
class YeeFields:
    """Staggered fields: e and b are (nx, ny, nz, 3) on their Yee offsets."""

    e: np.ndarray
    b: np.ndarray

    def copy(self) -> "YeeFields":
        return YeeFields(e=self.e.copy(), b=self.b.copy())


# fractional cell offsets of each staggered component
E_OFFSETS = np.array([[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]])
B_OFFSETS = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])


def component_positions(grid: StructuredGrid, offsets: np.ndarray,
                        comp: int) -> np.ndarray:
    """(nx, ny, nz, 3) positions of one staggered component."""
    axes = []
    for ax in range(3):
        off = offsets[comp, ax] if grid.dims[ax] > 1 else 0.5
        axes.append(grid.origin[ax] + (np.arange(grid.dims[ax]) + off)
                    * grid.spacing[ax])
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def courant_limit(grid: StructuredGrid, params: PhmParams) -> float:
    h = min(grid.spacing[ax] for ax in grid.active_axes)
    return h / (params.c * np.sqrt(grid.dim))


def init_yee(grid: StructuredGrid, params: PhmParams, dt: float,
             wave: WaveConfig | None, ic_fn=None) -> YeeFields:
    """Seed E at t=0 and B at t=-dt/2.

    With an analytic wave both fields come from the exact solution; otherwise
    ``ic_fn(pos) -> U`` is sampled at each component's staggered position and
    B is backed up by half a curl step (B(-dt/2) = B(0) + dt/2 curl E(0)).
    """
    e = np.zeros(grid.dims + (3,))
    b = np.zeros(grid.dims + (3,))
    if wave is not None and wave.kind != "none":
        for comp in range(3):
            pos_e = component_positions(grid, E_OFFSETS, comp)
            e[..., comp] = analytic_plane_wave(wave, pos_e, 0.0, params)[..., EX + comp]
            pos_b = component_positions(grid, B_OFFSETS, comp)
            b[..., comp] = analytic_plane_wave(wave, pos_b, -0.5 * dt,
                                               params)[..., BX + comp]
    else:
        if ic_fn is not None:
            for comp in range(3):
                pos_e = component_positions(grid, E_OFFSETS, comp)
                e[..., comp] = ic_fn(pos_e)[..., EX + comp]
                pos_b = component_positions(grid, B_OFFSETS, comp)
                b[..., comp] = ic_fn(pos_b)[..., BX + comp]
        b += 0.5 * dt * _curl_e(e, grid)
    return YeeFields(e=e, b=b)


def _diff_fwd(a: np.ndarray, ax: int, h: float) -> np.ndarray:
    return (np.roll(a, -1, axis=ax) - a) / h


def _diff_bwd(a: np.ndarray, ax: int, h: float) -> np.ndarray:
    return (a - np.roll(a, 1, axis=ax)) / h


def _curl_e(e: np.ndarray, grid: StructuredGrid) -> np.ndarray:
    dx, dy, dz = grid.spacing
    out = np.empty_like(e)
    out[..., 0] = _diff_fwd(e[..., 2], 1, dy) - _diff_fwd(e[..., 1], 2, dz)
    out[..., 1] = _diff_fwd(e[..., 0], 2, dz) - _diff_fwd(e[..., 2], 0, dx)
    out[..., 2] = _diff_fwd(e[..., 1], 0, dx) - _diff_fwd(e[..., 0], 1, dy)
    return out


def _curl_b(b: np.ndarray, grid: StructuredGrid) -> np.ndarray:
    dx, dy, dz = grid.spacing
    out = np.empty_like(b)
    out[..., 0] = _diff_bwd(b[..., 2], 1, dy) - _diff_bwd(b[..., 1], 2, dz)
    out[..., 1] = _diff_bwd(b[..., 0], 2, dz) - _diff_bwd(b[..., 2], 0, dx)
    out[..., 2] = _diff_bwd(b[..., 1], 0, dx) - _diff_bwd(b[..., 0], 1, dy)
    return out


def step_fdtd(yee: YeeFields, grid: StructuredGrid, params: PhmParams, dt: float,
              sigma_e: np.ndarray | None = None,
              timers: dict | None = None) -> YeeFields:
    """One leapfrog step: B to t+dt/2, then E to t+dt.

    ``sigma_e`` holds the conductivity sampled at each E component's own
    position, shape (nx, ny, nz, 3).
    """
    from time import perf_counter

    if grid.bc != "periodic":
        raise GridError("the FDTD baseline supports periodic boundaries only")
    if dt > courant_limit(grid, params) * (1 + 1e-12):
        raise GridError(
            f"Courant violation: dt={dt!r} > {courant_limit(grid, params)!r}")
    t0 = perf_counter() if timers is not None else 0.0
    yee.b -= dt * _curl_e(yee.e, grid)
    de = dt * params.c**2 * _curl_b(yee.b, grid)
    if sigma_e is None:
        yee.e += de
    else:
        s = sigma_e * (dt / params.eps0)
        yee.e = ((1.0 - 0.5 * s) * yee.e + de) / (1.0 + 0.5 * s)
    if timers is not None:
        timers["transport"] = timers.get("transport", 0.0) + (perf_counter() - t0)
    return yee


def macro_state(yee: YeeFields) -> np.ndarray:
    """(nx, ny, nz, 8) with each component at its own Yee offset; phi = psi = 0."""
    u = np.zeros(yee.e.shape[:-1] + (NCOMP,))
    u[..., EX:EX + 3] = yee.e
    u[..., BX:BX + 3] = yee.b
    return u


def error_vs_analytic(yee: YeeFields, grid: StructuredGrid, params: PhmParams,
                      wave: WaveConfig, t_e: float, t_b: float,
                      comps=(EZ, BY)) -> float:
    """Mean L1 error against the exact wave at each component's Yee position.

    E components are compared at time ``t_e``, B components at their native
    half-step time ``t_b`` (= t_e - dt/2 after a whole step).
    """
    total = 0.0
    for comp in comps:
        if comp in (EX, EY, EZ):
            pos = component_positions(grid, E_OFFSETS, comp - EX)
            num = yee.e[..., comp - EX]
            t = t_e
        else:
            pos = component_positions(grid, B_OFFSETS, comp - BX)
            num = yee.b[..., comp - BX]
            t = t_b
        exact = analytic_plane_wave(wave, pos, t, params)[..., comp]
        total += float(np.mean(np.abs(num - exact)))
    return total / len(comps)
