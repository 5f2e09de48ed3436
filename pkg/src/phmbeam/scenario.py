"""Scenario vocabulary shared by the case library, drivers and CLI.

A Scenario is a declarative description of one run: geometry, initial
condition, sources, boundary handling, solver and relaxation settings,
and the output plan. Builders for the bundled test cases live in
``phmbeam.cases``; the drivers consume scenarios without knowing which
case they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import em
from .em import PhmParams, WaveConfig
from .kinetic import RelaxationPolicy

STRUCTURED_SOLVERS = ("beam_et", "beam_ctu", "fvs", "fdtd")
UNSTRUCTURED_SOLVERS = ("beam_u", "fvs_u")
KINETIC_SOLVERS = ("beam_et", "beam_ctu", "beam_u")


class ScenarioError(ValueError):
    """Scenario validation failure."""


@dataclass(frozen=True)
class SigmaMask:
    """Conductivity geometry: a box or a z-aligned cylinder with constant sigma."""

    kind: str  # 'box' | 'cylinder_z'
    value: float
    lo: tuple[float, float, float] = (0.0, 0.0, 0.0)
    hi: tuple[float, float, float] = (1.0, 1.0, 1.0)
    center: tuple[float, float] = (0.5, 0.5)
    radius: float = 0.025
    z_range: tuple[float, float] = (0.375, 0.625)

    def __post_init__(self):
        if self.kind not in ("box", "cylinder_z"):
            raise ScenarioError(f"unknown sigma mask kind {self.kind!r}")
        if self.value < 0:
            raise ScenarioError("conductivity must be >= 0")

    def evaluate(self, pos: np.ndarray) -> np.ndarray:
        """sigma at positions (..., 3); closed support (boundary is inside)."""
        if self.kind == "box":
            inside = np.ones(pos.shape[:-1], dtype=bool)
            for ax in range(3):
                inside &= (pos[..., ax] >= self.lo[ax]) & (pos[..., ax] <= self.hi[ax])
        else:
            r2 = ((pos[..., 0] - self.center[0]) ** 2
                  + (pos[..., 1] - self.center[1]) ** 2)
            inside = (r2 <= self.radius**2) \
                & (pos[..., 2] >= self.z_range[0]) & (pos[..., 2] <= self.z_range[1])
        return np.where(inside, self.value, 0.0)


@dataclass(frozen=True)
class ChargeLaw:
    """Linear-in-time charge injection rho(x, t) = rho0 * rate * t * F(x).

    F is the indicator of the box [lo, hi] with the closed-support
    convention H(0) = 1.
    """

    rho0: float = 1.0e-12
    rate: float = 1.0
    lo: tuple[float, float] = (0.49, 0.49)
    hi: tuple[float, float] = (0.51, 0.51)

    def evaluate(self, pos: np.ndarray, t: float) -> np.ndarray:
        inside = np.ones(pos.shape[:-1], dtype=bool)
        for ax in range(2):
            inside &= (pos[..., ax] >= self.lo[ax]) & (pos[..., ax] <= self.hi[ax])
        return np.where(inside, self.rho0 * self.rate * t, 0.0)


@dataclass(frozen=True)
class LineSpec:
    """Uniformly sampled straight segment, e.g. a grid diagonal or an axis line."""

    name: str
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    count: int = 200
    components: tuple[int, ...] = (em.EZ,)

    def points(self) -> np.ndarray:
        s = np.linspace(0.0, 1.0, self.count)[:, None]
        return np.asarray(self.start) + s * (np.asarray(self.end)
                                             - np.asarray(self.start))


@dataclass(frozen=True)
class CircleSpec:
    """Uniformly sampled circle in a z = const plane."""

    name: str
    center: tuple[float, float, float]
    radius: float
    count: int = 360
    components: tuple[int, ...] = (em.EZ,)

    def points(self) -> np.ndarray:
        theta = np.linspace(0.0, 2 * np.pi, self.count, endpoint=False)
        p = np.empty((self.count, 3))
        p[:, 0] = self.center[0] + self.radius * np.cos(theta)
        p[:, 1] = self.center[1] + self.radius * np.sin(theta)
        p[:, 2] = self.center[2]
        return p

    def parameters(self) -> np.ndarray:
        return np.linspace(0.0, 2 * np.pi, self.count, endpoint=False)


@dataclass(frozen=True)
class Scenario:
    """One fully specified run."""

    name: str
    dim: int
    solver: str
    t_end: float
    n: tuple[int, int, int] | None = None
    extent: tuple = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    bc: str = "periodic"
    mesh_path: str | None = None
    patch_kinds: tuple = ()  # ((patch_name, kind), ...)
    params: PhmParams = PhmParams()
    lam: float = 1.0
    cfl: float = 1.0
    policy: RelaxationPolicy = RelaxationPolicy(mode="fixed_omega", omega=2.0)
    reconstruction: str = "first_order"
    time_scheme: str = "euler"
    limiter: str | None = None
    strict_cfl: bool = False
    wave: WaveConfig | None = None
    ic: str = "wave"  # 'wave' | 'zero'
    sigma: SigmaMask | None = None
    charge: ChargeLaw | None = None
    growth_guard: float | None = None
    monitor: int = em.EZ
    snapshot_times: tuple[float, ...] = ()
    lines: tuple[LineSpec, ...] = ()
    circles: tuple[CircleSpec, ...] = ()

    def __post_init__(self):
        # t_end == 0 is allowed and echoes the initial condition
        if self.t_end < 0:
            raise ScenarioError(f"t_end must be >= 0, got {self.t_end}")
        if self.solver not in STRUCTURED_SOLVERS + UNSTRUCTURED_SOLVERS:
            raise ScenarioError(f"unknown solver {self.solver!r}")
        if self.solver in STRUCTURED_SOLVERS and self.n is None:
            raise ScenarioError(f"solver {self.solver!r} needs a structured grid")
        if self.solver in UNSTRUCTURED_SOLVERS and self.mesh_path is None:
            raise ScenarioError(f"solver {self.solver!r} needs a mesh")
        if self.solver == "fdtd" and self.charge is not None:
            raise ScenarioError("the FDTD baseline has no cleaning potentials; "
                                "it cannot run charge-injection cases")
        if self.charge is not None and self.params.chi <= 0:
            raise ScenarioError("charge-injection cases need chi > 0: with "
                                "cleaning disabled the injected charge cannot "
                                "be observed")

    def with_solver(self, solver: str, **overrides) -> "Scenario":
        return replace(self, solver=solver, **overrides)

    def initial_condition(self, pos: np.ndarray) -> np.ndarray:
        """Macroscopic state at t = 0 on positions (..., 3).

        ic kinds: 'wave' samples the analytic wave, 'zero' starts cold,
        'sigma_support' puts Ez = 1 on the conductivity mask's support
        (the current-pulse configuration).
        """
        u = np.zeros(pos.shape[:-1] + (em.NCOMP,))
        if self.ic == "zero":
            return u
        if self.ic == "sigma_support":
            if self.sigma is None:
                raise ScenarioError("ic='sigma_support' needs a sigma mask")
            u[..., em.EZ] = (self.sigma.evaluate(pos) > 0).astype(float)
            return u
        if self.ic == "wave":
            if self.wave is None:
                return u
            return em.analytic_plane_wave(self.wave, pos, 0.0, self.params)
        raise ScenarioError(f"unknown initial condition kind {self.ic!r}")
