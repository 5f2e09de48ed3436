"""Bundled scenario builders reproducing the test-case suite at desk scale.

Each builder returns a fully validated Scenario. Defaults follow the case
definitions: normalized units, chi = gamma = 1 cleaning, and per-case
lattice speed factors chosen so that the convergence and stability targets
are met at desk resolutions (recorded in the README).
"""

from __future__ import annotations

import numpy as np

from . import em
from .em import PhmParams, WaveConfig
from .kinetic import RelaxationPolicy
from .scenario import (
    ChargeLaw, CircleSpec, LineSpec, Scenario, ScenarioError, SigmaMask,
)

# discontinuous cases lean on the lam > 1 dissipation for stabilization
PULSE_LAM = 2.0


def stable_lam(dim: int, omega: float) -> float:
    """Default lattice speed factor for a beam run.

    The collide-and-shift scheme is power-bounded only when the smallest
    beam projection dominates the wave cone, lam >= sqrt(dim) (verified by
    a von Neumann scan over the 8m-dimensional symbol). At omega = 1 the
    update is a projection and stays neutrally stable for any lam >= 1, so
    first-order runs use a smaller lam that keeps the (lam^2-1) dissipation
    out of the saturated regime at coarse resolutions.
    """
    if omega <= 1.0:
        return 1.2
    return {1: 1.2, 2: 1.5, 3: 2.0}[dim]


def scenario_plane_wave(dim: int, n: int, omega: float = 2.0,
                        solver: str = "beam_et", lam: float | None = None,
                        cfl: float | None = None) -> Scenario:
    """Periodic unit-box plane wave: Ez = cos(2 pi (x - c t)), By = -Ez.

    One period crosses the box per unit time, so at t_end = 1 the exact
    solution equals the initial condition.
    """
    if n < 8:
        raise ScenarioError("plane-wave case needs n >= 8")
    dims = tuple(n if ax < dim else 1 for ax in range(3))
    if lam is None:
        lam = stable_lam(dim, omega) if solver in ("beam_et", "beam_ctu") else 1.0
    if cfl is None:
        cfl = 1.0 if solver in ("beam_et", "beam_ctu") else 0.45
    return Scenario(
        name=f"plane_wave_{dim}d_n{n}",
        dim=dim, solver=solver, t_end=1.0, n=dims,
        bc="periodic", lam=lam, cfl=cfl,
        policy=RelaxationPolicy(mode="fixed_omega", omega=omega),
        wave=WaveConfig(kind="cosine", wavenumber=2.0 * np.pi),
        ic="wave", monitor=em.EZ,
    )


def scenario_rect_pulse(n: int = 100, solver: str = "beam_et",
                        cfl: float = 1.0, omega_mode: str = "detector",
                        s_max: float | None = None,
                        lam: float = PULSE_LAM) -> Scenario:
    """Square current pulse: Ez = 1 on [0.25, 0.75]^2, J = sigma Ez inside.

    The conductivity mask (sigma = 1) coincides with the initial support.
    The detector policy switches omega per cell; s_max defaults to ten
    times the initial maximum one-sided slope (10 * n for the unit jump).
    """
    if n < 50:
        raise ScenarioError("pulse case needs n >= 50")
    if omega_mode == "detector":
        policy = RelaxationPolicy(mode="detector",
                                  s_max=s_max if s_max is not None else 10.0 * n,
                                  monitored=(em.EZ,))
    else:
        policy = RelaxationPolicy(mode="fixed_omega", omega=float(omega_mode))
    diag = LineSpec(name="diagonal", start=(0.0, 0.0, 0.5), end=(1.0, 1.0, 0.5),
                    count=2 * n, components=(em.EZ,))
    return Scenario(
        name=f"rect_pulse_n{n}",
        dim=2, solver=solver, t_end=0.1, n=(n, n, 1),
        bc="periodic", lam=lam, cfl=cfl, policy=policy,
        sigma=SigmaMask(kind="box", value=1.0,
                        lo=(0.25, 0.25, 0.0), hi=(0.75, 0.75, 1.0)),
        ic="sigma_support", monitor=em.EZ, growth_guard=10.0,
        lines=(diag,), snapshot_times=(0.1,),
    )


def scenario_antenna(n: int = 80, sigma: float = 2.0e4, t_end: float = 0.1,
                     solver: str = "beam_et", lam: float = PULSE_LAM,
                     cfl: float | None = None) -> Scenario:
    """Conductive antenna in a bump-shaped incident wave (staircase mask).

    A z-aligned cylinder (length 0.25, diameter 0.05) at the box center
    carries sigma = 2e4; the incident wave Ez = Bx = f(y - y0 - t) sweeps
    it in +y. Extraction lines sit at z = 0.625 (through the upper tip)
    and z = 0.5 (midplane).
    """
    if sigma < 0:
        raise ScenarioError("antenna conductivity must be >= 0")
    if cfl is None:
        cfl = 1.0 if solver in ("beam_et", "beam_ctu") else 0.45
    mask = SigmaMask(kind="cylinder_z", value=sigma, center=(0.5, 0.5),
                     radius=0.025, z_range=(0.375, 0.625))
    lines = (
        LineSpec(name="ey_z0625", start=(0.5, 0.0, 0.625), end=(0.5, 1.0, 0.625),
                 count=2 * n, components=(em.EY,)),
        LineSpec(name="by_z05", start=(0.5, 0.0, 0.5), end=(0.5, 1.0, 0.5),
                 count=2 * n, components=(em.BY,)),
    )
    return Scenario(
        name=f"antenna_n{n}",
        dim=3, solver=solver, t_end=t_end, n=(n, n, n),
        bc="analytic_dirichlet", lam=lam, cfl=cfl,
        policy=RelaxationPolicy(mode="fixed_omega", omega=2.0),
        wave=WaveConfig(kind="bump", eta=0.25, y0=0.45),
        ic="wave", sigma=mask if sigma > 0 else None,
        monitor=em.EZ, lines=lines, snapshot_times=(t_end,),
    )


def scenario_charge_test(n: int = 200, chi: float = 1.0, gamma: float = 1.0,
                         solver: str = "beam_et", lam: float = PULSE_LAM,
                         omega: float = 1.0, t_end: float = 5.0) -> Scenario:
    """Charge injected with J = 0: the inconsistency lands in phi.

    rho(x, t) = 1e-12 * t on [0.49, 0.51]^2, zero fields initially. Needs
    chi > 0; with cleaning off the injected charge has no observable path
    and the scenario is rejected.
    """
    if n < 100:
        raise ScenarioError("charge test needs n >= 100")
    if chi <= 0:
        raise ScenarioError("charge test requires chi > 0 "
                            "(cleaning disabled defeats the test)")
    return Scenario(
        name=f"charge_n{n}",
        dim=2, solver=solver, t_end=t_end, n=(n, n, 1),
        bc="analytic_dirichlet",  # zero-wave ghosts absorb the outgoing front
        params=PhmParams(chi=chi, gamma=gamma),
        lam=lam, cfl=1.0,
        policy=RelaxationPolicy(mode="fixed_omega", omega=omega),
        wave=WaveConfig(kind="none"),
        ic="zero", charge=ChargeLaw(rho0=1.0e-12, rate=1.0,
                                    lo=(0.49, 0.49), hi=(0.51, 0.51)),
        monitor=em.EX, snapshot_times=(t_end,),
    )


def scenario_sphere(mesh_path: str, solver: str = "beam_u", t_end: float = 10.0,
                    lam: float = 2.0, cfl: float = 0.5,
                    reconstruction: str = "first_order") -> Scenario:
    """Plane-wave scattering off a PEC sphere (radius 1) in [-5, 5]^3.

    The incident wavelength 2 equals the sphere diameter (forward-dominant
    regime). Total field runs on the mesh; the scattered field is the
    total minus the incident wave. Circle extractions at radius 1.5 and
    2.5 in the z = 0.5 plane. The kinetic run needs lam >= sqrt(3) (the 3D
    sub-characteristic bound; the upwind transport alone cannot stabilize
    a growing collision symbol over thousands of steps).
    """
    circles = (
        CircleSpec(name="circle_r15", center=(0.0, 0.0, 0.5), radius=1.5,
                   count=360, components=(em.EZ,)),
        CircleSpec(name="circle_r25", center=(0.0, 0.0, 0.5), radius=2.5,
                   count=360, components=(em.EZ,)),
    )
    return Scenario(
        name="sphere_scatter",
        dim=3, solver=solver, t_end=t_end,
        mesh_path=mesh_path,
        patch_kinds=(("sphere", "pec"), ("farfield", "farfield_analytic")),
        lam=lam, cfl=cfl, reconstruction=reconstruction,
        policy=RelaxationPolicy(mode="fixed_omega", omega=2.0),
        wave=WaveConfig(kind="cosine", wavenumber=np.pi),
        ic="wave", monitor=em.EZ, circles=circles, snapshot_times=(t_end,),
    )


REGISTRY = {
    "plane_wave": scenario_plane_wave,
    "rect_pulse": scenario_rect_pulse,
    "antenna": scenario_antenna,
    "charge": scenario_charge_test,
    "sphere": scenario_sphere,
}
