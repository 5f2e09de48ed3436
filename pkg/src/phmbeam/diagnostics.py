"""Error norms, convergence slopes, extraction probes and stability metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DiagnosticsError(ValueError):
    """Invalid diagnostic input."""


def error_norm(computed: np.ndarray, exact: np.ndarray, kind: str = "L1",
               volumes: np.ndarray | None = None) -> float:
    """Volume-weighted error norm; L1 = sum V_i |e_i| / sum V_i.

    ``volumes`` may be omitted for uniform cells (plain means are then
    volume-weighted already). Arrays must agree in shape.
    """
    c = np.asarray(computed, dtype=float)
    e = np.asarray(exact, dtype=float)
    if c.shape != e.shape:
        raise DiagnosticsError(f"shape mismatch: {c.shape} vs {e.shape}")
    err = np.abs(c - e).ravel()
    if volumes is None:
        w = np.full(err.shape, 1.0 / err.size)
    else:
        v = np.asarray(volumes, dtype=float).ravel()
        if v.shape != err.shape:
            raise DiagnosticsError("volumes do not match the field")
        w = v / v.sum()
    if kind == "L1":
        return float(np.sum(w * err))
    if kind == "L2":
        return float(np.sqrt(np.sum(w * err**2)))
    if kind == "Linf":
        return float(np.max(err))
    raise DiagnosticsError(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class ConvergenceSeries:
    """(resolution, error) pairs at strictly increasing resolution."""

    resolutions: tuple[int, ...]
    errors: tuple[float, ...]
    norm_kind: str = "L1"

    def __post_init__(self):
        if len(self.resolutions) != len(self.errors):
            raise DiagnosticsError("resolutions and errors differ in length")
        if any(b <= a for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise DiagnosticsError("resolutions must be strictly increasing")
        if any(e <= 0 for e in self.errors):
            raise DiagnosticsError("errors must be positive to fit a slope")


def convergence_order(series: ConvergenceSeries) -> float:
    """Least-squares slope of log(error) against log(1/N)."""
    if len(series.resolutions) < 2:
        raise DiagnosticsError("need at least two points to fit a slope")
    x = np.log(1.0 / np.asarray(series.resolutions, dtype=float))
    y = np.log(np.asarray(series.errors, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def successive_ratios(series: ConvergenceSeries) -> list[float]:
    e = series.errors
    return [e[i] / e[i + 1] for i in range(len(e) - 1)]


def sample_grid(u: np.ndarray, grid, points: np.ndarray,
                components: tuple[int, ...]) -> np.ndarray:
    """Nearest-cell samples of grid data at arbitrary points, (np, ncomp)."""
    pts = np.asarray(points, dtype=float)
    idx = []
    for ax in range(3):
        i = np.floor((pts[:, ax] - grid.origin[ax]) / grid.spacing[ax]).astype(int)
        idx.append(np.clip(i, 0, grid.dims[ax] - 1))
    vals = u[idx[0], idx[1], idx[2]]
    return vals[:, list(components)]


def sample_mesh(u: np.ndarray, mesh, points: np.ndarray,
                components: tuple[int, ...]) -> np.ndarray:
    """Nearest-centroid samples of unstructured cell data, (np, ncomp)."""
    pts = np.asarray(points, dtype=float)
    cells = nearest_cells(mesh, pts)
    return u[cells][:, list(components)]


def nearest_cells(mesh, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Index of the nearest cell centroid per point (brute force, chunked)."""
    pts = np.asarray(points, dtype=float)
    cent = mesh.cell_centroid
    out = np.empty(len(pts), dtype=int)
    for lo in range(0, len(pts), chunk):
        block = pts[lo:lo + chunk]
        d2 = np.sum((block[:, None, :] - cent[None, :, :]) ** 2, axis=-1)
        out[lo:lo + chunk] = np.argmin(d2, axis=1)
    return out


def _bounds_of(geometry):
    if hasattr(geometry, "dims"):
        lo = np.asarray(geometry.origin)
        hi = lo + np.asarray(geometry.dims) * np.asarray(geometry.spacing)
        return lo, hi
    return geometry.nodes.min(axis=0), geometry.nodes.max(axis=0)


def _check_intersection(geometry, pts: np.ndarray, what: str) -> None:
    lo, hi = _bounds_of(geometry)
    tol = 1e-9 * np.max(hi - lo)
    inside = np.all((pts >= lo - tol) & (pts <= hi + tol), axis=1)
    if not np.any(inside):
        raise DiagnosticsError(f"{what} does not intersect the domain "
                               f"[{lo}, {hi}]")


def extract_line(u: np.ndarray, geometry, line) -> dict:
    """Sample a LineSpec; returns a column table ready for CSV."""
    pts = line.points()
    _check_intersection(geometry, pts, f"line {line.name!r}")
    if hasattr(geometry, "dims"):
        vals = sample_grid(u, geometry, pts, line.components)
    else:
        vals = sample_mesh(u, geometry, pts, line.components)
    s = np.linspace(0.0, 1.0, line.count)
    table = {"s": s, "x": pts[:, 0], "y": pts[:, 1], "z": pts[:, 2]}
    from . import em
    for j, comp in enumerate(line.components):
        table[em.COMPONENT_NAMES[comp]] = vals[:, j]
    return table


def extract_circle(u: np.ndarray, geometry, circle) -> dict:
    """Sample a CircleSpec; returns a column table ready for CSV."""
    pts = circle.points()
    _check_intersection(geometry, pts, f"circle {circle.name!r}")
    if hasattr(geometry, "dims"):
        vals = sample_grid(u, geometry, pts, circle.components)
    else:
        vals = sample_mesh(u, geometry, pts, circle.components)
    table = {"theta": circle.parameters(),
             "x": pts[:, 0], "y": pts[:, 1], "z": pts[:, 2]}
    from . import em
    for j, comp in enumerate(circle.components):
        table[em.COMPONENT_NAMES[comp]] = vals[:, j]
    return table


def phi_inconsistency_norm(phi_old: np.ndarray, phi_new: np.ndarray, dt: float,
                           chi: float, eps0: float, rho0: float,
                           volumes: np.ndarray | float | None = None) -> float:
    """Charge/current inconsistency absorbed by the cleaning potential.

    (1 / (chi dt)) * sqrt(sum_i V_i (phi_i^{n+1} - phi_i^n)^2) / (rho0/eps0);
    the volume weighting keeps the measure mesh-independent.
    """
    if dt <= 0:
        raise DiagnosticsError(f"dt must be positive, got {dt}")
    if chi <= 0 or rho0 <= 0:
        raise DiagnosticsError("chi and rho0 must be positive")
    d = (np.asarray(phi_new, dtype=float) - np.asarray(phi_old, dtype=float)).ravel()
    if volumes is None:
        v = np.ones_like(d)
    elif np.isscalar(volumes):
        v = np.full_like(d, float(volumes))
    else:
        v = np.asarray(volumes, dtype=float).ravel()
    ss = float(np.sqrt(np.sum(v * d * d)))
    return ss / (chi * dt) / (rho0 / eps0)


@dataclass(frozen=True)
class OvershootReport:
    """Out-of-bounds excursion over a run plus final-profile total variation."""

    overshoot: float
    final_tv: float


def overshoot_metric(max_series: np.ndarray, min_series: np.ndarray,
                     final_profile: np.ndarray | None = None) -> OvershootReport:
    """Largest excursion above the initial max / below the initial min.

    ``max_series``/``min_series`` are the per-step field extrema with the
    initial values first. The optional final line profile adds its discrete
    total variation (oscillation content of the end state).
    """
    mx = np.asarray(max_series, dtype=float)
    mn = np.asarray(min_series, dtype=float)
    if mx.size < 1 or mn.size < 1:
        raise DiagnosticsError("need at least the initial snapshot")
    over = max(float(np.max(mx - mx[0])), float(np.max(mn[0] - mn)), 0.0)
    tv = 0.0
    if final_profile is not None and len(final_profile) > 1:
        tv = float(np.sum(np.abs(np.diff(np.asarray(final_profile, dtype=float)))))
    return OvershootReport(overshoot=over, final_tv=tv)
