"""Beam-ET and Beam-CTU kinetic steps on Cartesian grids.

The four-step update per time step:

  1. collision  f* = (1-omega) f + omega g(U)
  2. transport  exact one-cell shift (ET) or corner-transport-upwind
                finite-volume fluxes (CTU)
  3. map        U* = sum_k f_k
  4. source     U[n+1] = U* + dt S(U[n+1/2]); the conductive part uses the
                closed-form Crank-Nicolson update, and the beams absorb the
                macroscopic increment weighted by the lattice weights so
                that sum_k f_k == U stays exact.

At unit beam CFL (dt*lam*c = dx) the CTU fluxes telescope to the exact
shift, so both transports produce identical states.
"""

from __future__ import annotations

import numpy as np

from .. import em, kinetic
from ..em import PhmParams, WaveConfig
from ..kinetic import Lattice, RelaxationPolicy
from .grid import GridError, StructuredGrid, pad_beams


def transport_et(f: np.ndarray, grid: StructuredGrid, lattice: Lattice,
                 dt: float, t: float, params: PhmParams,
                 wave: WaveConfig | None = None) -> np.ndarray:
    """Exact transport: shift each beam one cell along its velocity signs."""
    grid.require_unit_beam_cfl(lattice, dt)
    signs = lattice.signs
    if grid.bc == "periodic":
        out = np.empty_like(f)
        axes = grid.active_axes
        for k in range(f.shape[0]):
            shift = tuple(int(signs[k, ax]) for ax in axes)
            out[k] = np.roll(f[k], shift, axis=axes)
        return out
    padded = pad_beams(f, grid, 1, t, lattice, params, wave)
    out = np.empty_like(f)
    for k in range(f.shape[0]):
        sl = [k]
        for ax in range(3):
            if grid.dims[ax] == 1:
                sl.append(slice(None))
            else:
                s = int(signs[k, ax])
                sl.append(slice(1 - s, 1 - s + grid.dims[ax]))
        out[k] = padded[tuple(sl)]
    return out


def _shifted(a: np.ndarray, s: int, axis: int) -> np.ndarray:
    """a evaluated one cell upwind: result[i] = a[i - s] (pad edges discarded)."""
    return np.roll(a, s, axis=axis)


def transport_ctu(f: np.ndarray, grid: StructuredGrid, lattice: Lattice,
                  dt: float, t: float, params: PhmParams,
                  wave: WaveConfig | None = None) -> np.ndarray:
    """Finite-volume upwind transport with corner-transport-upwind corrections.

    Interface states pick up one transverse-gradient term per transverse
    axis plus the corner cross term; at unit beam CFL the update reproduces
    the exact shift to round-off.
    """
    cfl = max(abs(lattice.velocities[0, ax]) * dt / grid.spacing[ax]
              for ax in grid.active_axes)
    if cfl > 1.0 + 1e-12:
        raise GridError(f"CTU transport needs beam CFL <= 1, got {cfl!r}")

    padded = pad_beams(f, grid, 1, t, lattice, params, wave)
    axes = grid.active_axes
    out = f.copy()
    # interior slices per axis in padded coordinates
    core = {ax: slice(1, 1 + grid.dims[ax]) for ax in axes}

    for k in range(f.shape[0]):
        pk = padded[k]
        v = lattice.velocities[k]
        nu = {ax: v[ax] * dt / grid.spacing[ax] for ax in axes}
        # beam-axis offset for the array axis: beams move along every active axis
        for d in axes:
            sd = 1 if v[d] > 0 else -1
            # upwind cell for each of the n+1 faces along d (padded coords)
            take = slice(0, grid.dims[d] + 1) if sd > 0 else slice(1, grid.dims[d] + 2)
            sl = [slice(None)] * 4
            sl[d] = take
            fu = pk[tuple(sl)]
            trans = [e for e in axes if e != d]
            corr = fu
            for e in trans:
                se = 1 if v[e] > 0 else -1
                de = fu - _shifted(fu, se, e)
                corr = corr - 0.5 * abs(nu[e]) * de
            if len(trans) == 2:
                e1, e2 = trans
                s1 = 1 if v[e1] > 0 else -1
                s2 = 1 if v[e2] > 0 else -1
                d12 = (fu - _shifted(fu, s1, e1)
                       - _shifted(fu, s2, e2) + _shifted(_shifted(fu, s1, e1), s2, e2))
                corr = corr + (abs(nu[e1]) * abs(nu[e2]) / 3.0) * d12
            flux = v[d] * corr
            # crop transverse axes to the interior, then difference along d
            crop = [slice(None)] * 4
            for e in trans:
                crop[e] = core[e]
            flux = flux[tuple(crop)]
            lo = [slice(None)] * 4
            hi = [slice(None)] * 4
            lo[d] = slice(0, grid.dims[d])
            hi[d] = slice(1, grid.dims[d] + 1)
            out[k] -= (dt / grid.spacing[d]) * (flux[tuple(hi)] - flux[tuple(lo)])
    return out


def apply_sources(u_star: np.ndarray, f: np.ndarray | None, dt: float, t: float,
                  params: PhmParams, lattice: Lattice | None = None,
                  sigma: np.ndarray | None = None,
                  rho: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    """Source sub-step U[n+1] = U* + dt S(U[n+1/2]).

    The conduction term J = sigma E is integrated with the closed-form
    Crank-Nicolson factor (1 - s/2)/(1 + s/2), s = sigma dt / eps0, which
    stays stable for arbitrarily stiff sigma. ``rho`` is the charge density
    evaluated at the half step. Beams, when given, absorb the macroscopic
    increment with the lattice weights so moments stay consistent.
    """
    u_new = u_star.copy()
    if sigma is not None:
        s = sigma * (dt / params.eps0)
        fac = (1.0 - 0.5 * s) / (1.0 + 0.5 * s)
        u_new[..., 0:3] = u_star[..., 0:3] * fac[..., None]
    if rho is not None:
        u_new[..., em.PHI] = u_star[..., em.PHI] + dt * params.chi * rho / params.eps0
    if f is not None:
        delta = u_new - u_star
        if np.any(delta):
            f = f + lattice.weight * delta[None, ...]
    return u_new, f


def step_beam(state, grid: StructuredGrid, lattice: Lattice, params: PhmParams,
              policy: RelaxationPolicy, dt: float, t: float, transport: str,
              wave: WaveConfig | None = None,
              sigma: np.ndarray | None = None,
              rho_half: np.ndarray | None = None,
              timers: dict | None = None):
    """One full kinetic step; ``transport`` is 'et' or 'ctu'. Returns new state."""
    from time import perf_counter

    def tick():
        return perf_counter() if timers is not None else 0.0

    t0 = tick()
    omega = policy.omega_for(state.u, grid.spacing, dt)
    f = kinetic.collide(state.f, state.u, omega, lattice, params)
    t1 = tick()
    if transport == "et":
        f = transport_et(f, grid, lattice, dt, t, params, wave)
    elif transport == "ctu":
        f = transport_ctu(f, grid, lattice, dt, t, params, wave)
    else:
        raise GridError(f"unknown transport {transport!r}")
    t2 = tick()
    u_star = kinetic.moments(f)
    t3 = tick()
    u_new, f = apply_sources(u_star, f, dt, t, params, lattice,
                             sigma=sigma, rho=rho_half)
    t4 = tick()
    if timers is not None:
        timers["collision"] = timers.get("collision", 0.0) + (t1 - t0)
        timers["transport"] = timers.get("transport", 0.0) + (t2 - t1)
        timers["map"] = timers.get("map", 0.0) + (t3 - t2)
        timers["source"] = timers.get("source", 0.0) + (t4 - t3)
    state.f, state.u = f, u_new
    return state
