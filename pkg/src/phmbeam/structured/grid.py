"""Cartesian grids, ghost padding and boundary fills for the structured solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import em, kinetic
from ..em import PhmParams, WaveConfig


class GridError(ValueError):
    """Invalid grid construction or solver/grid mismatch."""


BC_KINDS = ("periodic", "analytic_dirichlet")


@dataclass(frozen=True)
class StructuredGrid:
    """Cartesian cell block. Inactive axes have a single cell.

    ``dims`` counts cells; 1D runs use (n, 1, 1) and 2D (nx, ny, 1).
    ``bc`` applies to every boundary face.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    bc: str = "periodic"

    def __post_init__(self):
        if len(self.dims) != 3 or any(n < 1 for n in self.dims):
            raise GridError(f"dims must be three positive counts, got {self.dims}")
        if any(h <= 0 for h in self.spacing):
            raise GridError(f"spacing must be positive, got {self.spacing}")
        if self.bc not in BC_KINDS:
            raise GridError(f"bc must be one of {BC_KINDS}, got {self.bc!r}")
        active = [ax for ax in range(3) if self.dims[ax] > 1]
        if active and active != list(range(len(active))):
            raise GridError("active axes must be leading: use (n,1,1) or (nx,ny,1)")

    @classmethod
    def unit_box(cls, n: int, dim: int, bc: str = "periodic") -> "StructuredGrid":
        dims = tuple(n if ax < dim else 1 for ax in range(3))
        spacing = tuple(1.0 / n if ax < dim else 1.0 for ax in range(3))
        return cls(dims=dims, spacing=spacing, bc=bc)

    @property
    def active_axes(self) -> tuple[int, ...]:
        return tuple(ax for ax in range(3) if self.dims[ax] > 1)

    @property
    def dim(self) -> int:
        return max(1, len(self.active_axes))

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.dims))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coords(self, ax: int) -> np.ndarray:
        return self.origin[ax] + (np.arange(self.dims[ax]) + 0.5) * self.spacing[ax]

    def cell_centers(self) -> np.ndarray:
        """(nx, ny, nz, 3) cell-center positions."""
        grids = np.meshgrid(*(self.axis_coords(ax) for ax in range(3)), indexing="ij")
        return np.stack(grids, axis=-1)

    def check_uniform_cubic(self) -> float:
        h = {self.spacing[ax] for ax in self.active_axes}
        if len(h) != 1:
            raise GridError(
                f"exact transport needs equal spacing on active axes, got {self.spacing}")
        return h.pop()

    def require_unit_beam_cfl(self, lattice: kinetic.Lattice, dt: float) -> None:
        h = self.check_uniform_cubic()
        if abs(dt * lattice.speed - h) > 1e-12 * h:
            raise GridError(
                "exact transport requires dt*lam*c == dx "
                f"(dt*lam*c={dt * lattice.speed!r}, dx={h!r})")


@dataclass
class FieldState:
    """Double-buffered state of a kinetic run: beams plus macroscopic field."""

    f: np.ndarray  # (m, nx, ny, nz, 8)
    u: np.ndarray  # (nx, ny, nz, 8)

    def copy(self) -> "FieldState":
        return FieldState(f=self.f.copy(), u=self.u.copy())


def initial_state(grid: StructuredGrid, lattice: kinetic.Lattice,
                  params: PhmParams, u0: np.ndarray) -> FieldState:
    """Kinetic state initialized at local equilibrium of the macroscopic field."""
    return FieldState(f=kinetic.equilibrium(u0, lattice, params), u=u0.copy())


def _padded_positions(grid: StructuredGrid, layers: int) -> np.ndarray:
    axes = []
    for ax in range(3):
        pad = layers if grid.dims[ax] > 1 else 0
        idx = np.arange(-pad, grid.dims[ax] + pad)
        axes.append(grid.origin[ax] + (idx + 0.5) * grid.spacing[ax])
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack(grids, axis=-1)


def _ghost_shell(grid: StructuredGrid, layers: int):
    """Index arrays of the ghost region in padded coordinates, plus positions."""
    shape = tuple(n + 2 * layers if n > 1 else n for n in grid.dims)
    mask = np.zeros(shape, dtype=bool)
    for ax in range(3):
        if grid.dims[ax] == 1:
            continue
        sl = [slice(None)] * 3
        sl[ax] = slice(0, layers)
        mask[tuple(sl)] = True
        sl[ax] = slice(shape[ax] - layers, shape[ax])
        mask[tuple(sl)] = True
    idx = np.nonzero(mask)
    pos = _padded_positions(grid, layers)[idx]
    return idx, pos


_SHELL_CACHE: dict = {}


def ghost_shell(grid: StructuredGrid, layers: int):
    key = (grid, layers)
    if key not in _SHELL_CACHE:
        _SHELL_CACHE[key] = _ghost_shell(grid, layers)
    return _SHELL_CACHE[key]


def pad_state(u: np.ndarray, grid: StructuredGrid, layers: int,
              t: float, params: PhmParams,
              wave: WaveConfig | None) -> np.ndarray:
    """Pad the macroscopic field with ghost layers on active axes.

    Periodic grids wrap; analytic-Dirichlet grids take the configured wave
    evaluated at the ghost centers (corners included).
    """
    widths = [(layers, layers) if n > 1 else (0, 0) for n in grid.dims] + [(0, 0)]
    if grid.bc == "periodic":
        return np.pad(u, widths, mode="wrap")
    padded = np.pad(u, widths, mode="edge")
    idx, pos = ghost_shell(grid, layers)
    if wave is None:
        wave = WaveConfig(kind="none")
    padded[idx] = em.analytic_plane_wave(wave, pos, t, params)
    return padded


def pad_beams(f: np.ndarray, grid: StructuredGrid, layers: int, t: float,
              lattice: kinetic.Lattice, params: PhmParams,
              wave: WaveConfig | None) -> np.ndarray:
    """Pad beam arrays; analytic ghosts carry the equilibrium of the wave state."""
    widths = [(0, 0)] + [(layers, layers) if n > 1 else (0, 0)
                         for n in grid.dims] + [(0, 0)]
    if grid.bc == "periodic":
        return np.pad(f, widths, mode="wrap")
    padded = np.pad(f, widths, mode="edge")
    idx, pos = ghost_shell(grid, layers)
    if wave is None:
        wave = WaveConfig(kind="none")
    u_ghost = em.analytic_plane_wave(wave, pos, t, params)
    g_ghost = kinetic.equilibrium(u_ghost, lattice, params)
    padded[(slice(None),) + idx] = g_ghost
    return padded
