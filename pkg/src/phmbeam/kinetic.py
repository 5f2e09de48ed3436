"""Discrete-velocity vector-BGK machinery.

Each macroscopic state U is represented by m vector-valued distribution
functions f_k (beams), one per discrete kinetic velocity:

    sum_k f_k = U            (micro-macro map)
    sum_k g_k = U            (equilibrium, zeroth moment)
    sum_k g_k (x) v_k = F(U) (equilibrium, first moment)

The D3Q4 velocities are lam*c*{(1,1,1),(1,-1,-1),(-1,1,-1),(-1,-1,1)};
dropping trailing components gives D2Q4 and D1Q2. With weights 1/m the
equilibrium closing both constraints is

    g_k = (U + F(U).v_k / (lam^2 c^2)) / m.

Collision is the Crank-Nicolson relaxation f* = (1-omega) f + omega g,
omega = (dt/tau) / (1 + dt/(2 tau)), which conserves moments exactly for
any omega. All functions are pure and per-cell parallel-safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import em
from .em import PhmParams

_PATTERN_3D = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


class KineticError(ValueError):
    """Invalid lattice or relaxation input."""


@dataclass(frozen=True)
class Lattice:
    """Discrete kinetic velocity set for one spatial dimension count."""

    dim: int
    lam: float
    c: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise KineticError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.lam < 1.0:
            raise KineticError(
                f"sub-characteristic condition requires lam >= 1, got {self.lam}")
        if self.c <= 0:
            raise KineticError("wave speed must be positive")

    @property
    def m(self) -> int:
        """Beam count: 2 in 1D, 4 in 2D/3D."""
        return 2 if self.dim == 1 else 4

    @property
    def weight(self) -> float:
        return 1.0 / self.m

    @property
    def speed(self) -> float:
        """Per-axis beam speed lam*c (the transport CFL reference)."""
        return self.lam * self.c

    @property
    def velocities(self) -> np.ndarray:
        """(m, 3) velocity vectors; inactive components are zero."""
        return _velocities(self.dim, self.lam, self.c)

    @property
    def signs(self) -> np.ndarray:
        """(m, 3) integer sign pattern of the velocities."""
        return _signs(self.dim)


@lru_cache(maxsize=None)
def _signs(dim: int) -> np.ndarray:
    if dim == 1:
        s = np.array([(1, 0, 0), (-1, 0, 0)])
    else:
        s = np.array([p for p in _PATTERN_3D])
        if dim == 2:
            s[:, 2] = 0
    s.setflags(write=False)
    return s


@lru_cache(maxsize=None)
def _velocities(dim: int, lam: float, c: float) -> np.ndarray:
    v = lam * c * _signs(dim).astype(float)
    v.setflags(write=False)
    return v


@lru_cache(maxsize=None)
def _equilibrium_matrices(lattice: Lattice, params: PhmParams) -> np.ndarray:
    """Per-beam constant matrices G_k with g_k = G_k @ U, shape (m, 8, 8)."""
    lam2c2 = (lattice.lam * lattice.c) ** 2
    a = [em.jacobian(j + 1, params) for j in range(3)]
    g = np.empty((lattice.m, em.NCOMP, em.NCOMP))
    for k, v in enumerate(lattice.velocities):
        av = v[0] * a[0] + v[1] * a[1] + v[2] * a[2]
        g[k] = lattice.weight * (np.eye(em.NCOMP) + av / lam2c2)
    g.setflags(write=False)
    return g


def equilibrium(u: np.ndarray, lattice: Lattice, params: PhmParams) -> np.ndarray:
    """Local equilibrium beams g_k(U); ``u`` has shape (..., 8), result (m, ..., 8)."""
    g = _equilibrium_matrices(lattice, params)
    u = np.asarray(u, dtype=float)
    flat = u.reshape(-1, u.shape[-1])
    out = np.matmul(flat[None, :, :], g.transpose(0, 2, 1))
    return out.reshape((lattice.m,) + u.shape)


def moments(f: np.ndarray) -> np.ndarray:
    """Macroscopic state U = sum_k f_k."""
    return f.sum(axis=0)


def flux_moments(f: np.ndarray, lattice: Lattice) -> np.ndarray:
    """First moment sum_k f_k (x) v_k, shape (..., 8, 3)."""
    return np.einsum("k...a,kj->...aj", f, lattice.velocities)


def _check_omega(omega) -> None:
    o = np.asarray(omega)
    if np.any(o <= 0.0) or np.any(o > 2.0):
        raise KineticError(f"relaxation parameter must lie in (0, 2], got {omega!r}")


def collide(f: np.ndarray, u: np.ndarray, omega, lattice: Lattice,
            params: PhmParams) -> np.ndarray:
    """Crank-Nicolson relaxation toward equilibrium: (1-omega) f + omega g(U).

    ``omega`` may be a scalar or a per-cell array broadcastable against the
    cell axes of ``f``. Moments are conserved exactly.
    """
    _check_omega(omega)
    g = equilibrium(u, lattice, params)
    w = np.asarray(omega, dtype=float)
    if w.ndim:  # per-cell field: add the component axis
        w = w[..., None]
    return f + w * (g - f)


def omega_from_tau(tau: float, dt: float) -> float:
    """Map relaxation time tau to the collision blending weight.

    omega = (dt/tau) / (1 + dt/(2 tau)); tau -> 0 gives the second-order
    over-relaxation limit omega -> 2, tau -> inf gives omega -> 0.
    """
    if tau <= 0 or dt <= 0:
        raise KineticError("tau and dt must be positive")
    r = dt / tau
    return r / (1.0 + 0.5 * r)


def tau_effective(omega: float, dt: float) -> float:
    """Numerical relaxation time dt*(1/omega - 1/2) of the split scheme.

    This is the coefficient multiplying (lam^2-1)c^2 d2/dx2 in the
    first-order equivalent equation; it vanishes at omega = 2.
    """
    _check_omega(omega)
    return dt * (1.0 / omega - 0.5)


def van_leer_slope(s_plus, s_minus):
    """L(s+, s-) = (sign(s+)+sign(s-)) * 2|s+||s-| / (|s+|+|s-|), 0-guarded."""
    sp = np.asarray(s_plus, dtype=float)
    sm = np.asarray(s_minus, dtype=float)
    denom = np.abs(sp) + np.abs(sm)
    safe = np.where(denom == 0.0, 1.0, denom)
    return (np.sign(sp) + np.sign(sm)) * 2.0 * np.abs(sp) * np.abs(sm) / safe


def smoothness_omega(s_plus, s_minus, s_max: float):
    """Per-cell omega in {1, 2} from the van-Leer smoothness detector.

    Returns 1 where L(s+,s-) vanishes (flat or oscillatory data) or where
    |L| exceeds the slope cap s_max (too steep), else 2.
    """
    if s_max <= 0:
        raise KineticError(f"s_max must be positive, got {s_max}")
    ell = van_leer_slope(s_plus, s_minus)
    first = (ell == 0.0) | (np.abs(ell) > s_max)
    return np.where(first, 1.0, 2.0)


@dataclass(frozen=True)
class RelaxationPolicy:
    """How the collision omega is chosen each step.

    mode 'fixed_omega': use ``omega`` everywhere.
    mode 'from_tau':    omega computed from ``tau`` and the step size.
    mode 'detector':    per-cell omega in {1, 2} from the smoothness
                        detector applied to the monitored components
                        (minimum over components and axes).
    """

    mode: str = "fixed_omega"
    omega: float = 2.0
    tau: float | None = None
    s_max: float | None = None
    monitored: tuple[int, ...] = (em.EZ,)

    def __post_init__(self):
        if self.mode == "fixed_omega":
            _check_omega(self.omega)
        elif self.mode == "from_tau":
            if self.tau is None or self.tau <= 0:
                raise KineticError("from_tau policy needs tau > 0")
        elif self.mode == "detector":
            if self.s_max is None or self.s_max <= 0:
                raise KineticError("detector policy needs s_max > 0")
        else:
            raise KineticError(f"unknown relaxation mode {self.mode!r}")

    def omega_for(self, u: np.ndarray, spacing, dt: float):
        """Scalar omega or per-cell field for the state ``u`` (nx, ny, nz, 8)."""
        if self.mode == "fixed_omega":
            return self.omega
        if self.mode == "from_tau":
            return omega_from_tau(self.tau, dt)
        return detector_omega_field(u, spacing, self.s_max, self.monitored)


def detector_omega_field(u: np.ndarray, spacing, s_max: float,
                         monitored: tuple[int, ...] = (em.EZ,)) -> np.ndarray:
    """Per-cell detector omega, minimum over monitored components and axes.

    One-sided slopes use periodic neighbor access, which also serves as a
    benign edge treatment for bounded runs.
    """
    spacing = np.asarray(spacing, dtype=float)
    omega = np.full(u.shape[:-1], 2.0)
    for comp in monitored:
        fld = u[..., comp]
        for ax in range(3):
            if fld.shape[ax] == 1:
                continue
            s_plus = (np.roll(fld, -1, axis=ax) - fld) / spacing[ax]
            s_minus = (fld - np.roll(fld, 1, axis=ax)) / spacing[ax]
            omega = np.minimum(omega, smoothness_omega(s_plus, s_minus, s_max))
    return omega
