"""Perfectly hyperbolic Maxwell (PHM) state algebra.

The unknown vector per cell is

    U = (Ex, Ey, Ez, Bx, By, Bz, phi, psi)

where phi and psi are the divergence-cleaning potentials convecting
Gauss-law errors out of the domain at speeds chi*c and gamma*c. The
system is linear: the flux along axis j is F_j(U) = A_j @ U with
constant Jacobians A_j, and FVS fluxes come from the eigendecomposition
of A_1 combined with a face-local rotation.

Everything here is a pure function of its inputs; all operations are
linear in U.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

# component indices into the 8-vector
EX, EY, EZ, BX, BY, BZ, PHI, PSI = range(8)
NCOMP = 8

COMPONENT_NAMES = ("Ex", "Ey", "Ez", "Bx", "By", "Bz", "phi", "psi")

# curl blocks: M_j @ w == -e_j x w, so the E-row flux c^2*M_j(B) carries
# -c^2 (curl B) into the divergence, and M_j^T(E) = e_j x E the Faraday part.
_M = np.zeros((3, 3, 3))
_M[0] = [[0, 0, 0], [0, 0, 1], [0, -1, 0]]
_M[1] = [[0, 0, -1], [0, 0, 0], [1, 0, 0]]
_M[2] = [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]
_M.setflags(write=False)


class EmError(ValueError):
    """Invalid parameter or geometric input to a PHM operation."""


@dataclass(frozen=True)
class PhmParams:
    """Wave speed, material constants and cleaning speed factors.

    Normalized units (c = eps0 = mu0 = 1) are the default; eps0*mu0*c**2 = 1
    is enforced. chi and gamma scale the propagation speed of the electric
    and magnetic cleaning waves. ``phi_drives_e=False`` is a diagnostic
    switch that drops the chi*c^2*grad(phi) feedback in the E rows so tests
    can show where charge-inconsistency information ends up; it leaves the
    phi evolution itself untouched.
    """

    c: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0
    chi: float = 1.0
    gamma: float = 1.0
    phi_drives_e: bool = True

    def __post_init__(self):
        if self.c <= 0:
            raise EmError(f"wave speed must be positive, got c={self.c}")
        if self.chi < 0 or self.gamma < 0:
            raise EmError("cleaning speed factors chi, gamma must be >= 0")
        if abs(self.eps0 * self.mu0 * self.c**2 - 1.0) > 1e-12:
            raise EmError(
                "inconsistent constants: eps0*mu0*c^2 = "
                f"{self.eps0 * self.mu0 * self.c**2!r}, expected 1"
            )

    def with_cleaning(self, chi: float, gamma: float) -> "PhmParams":
        return replace(self, chi=chi, gamma=gamma)


@dataclass(frozen=True)
class SourceDensities:
    """Current density J, charge density rho, and local conductivity.

    When ``sigma`` is nonzero the conduction model J = sigma*E applies on
    top of the explicit ``j``.
    """

    j: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rho: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise EmError(f"conductivity must be >= 0, got {self.sigma}")


def zero_state() -> np.ndarray:
    return np.zeros(NCOMP)


@lru_cache(maxsize=None)
def _jacobian_cached(axis: int, c: float, chi: float, gamma: float,
                     phi_drives_e: bool) -> np.ndarray:
    j = axis - 1
    a = np.zeros((NCOMP, NCOMP))
    c2 = c * c
    a[0:3, 3:6] = c2 * _M[j]
    a[3:6, 0:3] = _M[j].T
    if phi_drives_e:
        a[j, PHI] = chi * c2
    a[3 + j, PSI] = gamma
    a[PHI, j] = chi
    a[PSI, 3 + j] = gamma * c2
    a.setflags(write=False)
    return a


def jacobian(axis: int, params: PhmParams) -> np.ndarray:
    """Constant flux Jacobian A_axis (8x8), axis in {1, 2, 3}."""
    if axis not in (1, 2, 3):
        raise EmError(f"axis must be 1, 2 or 3, got {axis}")
    return _jacobian_cached(axis, params.c, params.chi, params.gamma,
                            params.phi_drives_e)


def flux(u: np.ndarray, axis: int, params: PhmParams) -> np.ndarray:
    """F_axis(U) = A_axis @ U. Broadcasts over leading axes of ``u``."""
    return u @ jacobian(axis, params).T


def _check_unit_normal(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise EmError(f"normal must be a 3-vector, got shape {n.shape}")
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise EmError(f"normal must have unit length, |n| = {np.linalg.norm(n)!r}")
    return n


def jacobian_normal(n, params: PhmParams) -> np.ndarray:
    """A_n = sum_j n_j A_j for a unit face normal n."""
    n = _check_unit_normal(n)
    return sum(n[j] * jacobian(j + 1, params) for j in range(3))


def flux_normal(u: np.ndarray, n, params: PhmParams) -> np.ndarray:
    """Normal flux (A_n) @ U across a face with unit normal n."""
    return u @ jacobian_normal(n, params).T


def rotation3(n) -> np.ndarray:
    """Rotation taking the unit vector n onto the x-axis (local face frame)."""
    n = _check_unit_normal(n)
    n1, n2, n3 = n
    if n1 <= -1.0 + 1e-12:
        return np.diag([-1.0, -1.0, 1.0])
    return np.array([
        [n1, n2, n3],
        [-n2, n1 + n3**2 / (1 + n1), -n2 * n3 / (1 + n1)],
        [-n3, -n2 * n3 / (1 + n1), 1 - n3**2 / (1 + n1)],
    ])


def rotation8(n) -> np.ndarray:
    """Blockwise state rotation: E and B triples rotate, phi and psi are scalars."""
    t = np.eye(NCOMP)
    r = rotation3(n)
    t[0:3, 0:3] = r
    t[3:6, 3:6] = r
    return t


def rotate_to_local(u: np.ndarray, n) -> np.ndarray:
    return u @ rotation8(n).T


def rotate_to_global(u: np.ndarray, n) -> np.ndarray:
    return u @ rotation8(n)  # T is orthogonal: T^-1 = T^T


@dataclass(frozen=True)
class EigenSystem:
    """Spectral data of A_1: eigenvalues, right eigenvectors and inverse."""

    lambdas: np.ndarray
    r: np.ndarray
    r_inv: np.ndarray

    @property
    def abs_a1(self) -> np.ndarray:
        return self.r @ np.diag(np.abs(self.lambdas)) @ self.r_inv

    @property
    def a1_plus(self) -> np.ndarray:
        lam = np.maximum(self.lambdas, 0.0)
        return self.r @ np.diag(lam) @ self.r_inv

    @property
    def a1_minus(self) -> np.ndarray:
        lam = np.minimum(self.lambdas, 0.0)
        return self.r @ np.diag(lam) @ self.r_inv


@lru_cache(maxsize=None)
def _eigensystem_cached(c: float, chi: float, gamma: float) -> EigenSystem:
    # A_1 decouples into four 2x2 subsystems; closed-form characteristic
    # fields avoid a runtime eigensolver (which goes degenerate when
    # chi*c or gamma*c collides with c).
    lambdas = np.zeros(NCOMP)
    r = np.zeros((NCOMP, NCOMP))
    r_inv = np.zeros((NCOMP, NCOMP))

    def pair(rows, speed, v_plus, v_minus, cols):
        """Fill the two eigen-columns of one decoupled 2x2 block."""
        (i, k), (cp, cm) = rows, cols
        lambdas[cp], lambdas[cm] = speed, -speed
        r[i, cp], r[k, cp] = v_plus
        r[i, cm], r[k, cm] = v_minus
        m = np.linalg.inv(np.array([[v_plus[0], v_minus[0]],
                                    [v_plus[1], v_minus[1]]]))
        r_inv[cp, i], r_inv[cp, k] = m[0]
        r_inv[cm, i], r_inv[cm, k] = m[1]

    pair((EY, BZ), c, (c, 1.0), (-c, 1.0), (0, 1))
    pair((EZ, BY), c, (-c, 1.0), (c, 1.0), (2, 3))
    pair((EX, PHI), chi * c, (c, 1.0), (-c, 1.0), (4, 5))
    pair((BX, PSI), gamma * c, (1.0, c), (1.0, -c), (6, 7))

    for a in (lambdas, r, r_inv):
        a.setflags(write=False)
    return EigenSystem(lambdas=lambdas, r=r, r_inv=r_inv)


def eigensystem_a1(params: PhmParams) -> EigenSystem:
    """Eigendecomposition of A_1 with eigenvalues {+-c, +-c, +-chi*c, +-gamma*c}."""
    if not params.phi_drives_e:
        raise EmError("eigendecomposition undefined with phi feedback disabled "
                      "(A_1 is no longer diagonalizable)")
    return _eigensystem_cached(params.c, params.chi, params.gamma)


def abs_jacobian_normal(n, params: PhmParams) -> np.ndarray:
    """|A_n| = T^-1 |A_1| T for a unit normal n."""
    t = rotation8(n)
    return t.T @ eigensystem_a1(params).abs_a1 @ t


def source_eval(u: np.ndarray, src: SourceDensities, params: PhmParams) -> np.ndarray:
    """S(U) = (-J/eps0, 0, 0, 0, chi*rho/eps0, 0), J = src.j + sigma*E."""
    u = np.asarray(u, dtype=float)
    s = np.zeros_like(u)
    jtot = np.asarray(src.j, dtype=float) + src.sigma * u[..., 0:3]
    s[..., 0:3] = -jtot / params.eps0
    s[..., PHI] = params.chi * src.rho / params.eps0
    return s


@dataclass(frozen=True)
class WaveConfig:
    """Analytic incident-wave settings.

    kind 'cosine'/'sine': Ez = A*trig(k(x - ct)), By = -Ez, travelling +x.
    kind 'bump':          Ez = Bx = f(y - y0 - ct), a compactly supported
                          bump of half-width eta travelling +y.
    kind 'none':          identically zero (used for absorbing-style ghosts).
    """

    kind: str = "cosine"
    amplitude: float = 1.0
    wavenumber: float = 2.0 * np.pi
    eta: float = 0.25
    y0: float = 0.45


def bump_profile(s, eta: float):
    """C-infinity bump: exp(1 - 1/(1 - |s|/eta)) for |s| < eta, else 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < eta
    r = np.abs(s[inside]) / eta
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r))
    return out


def analytic_plane_wave(wave: WaveConfig, x, t: float, params: PhmParams) -> np.ndarray:
    """Exact PHM solution of the configured incident wave at points ``x``.

    ``x`` has shape (..., 3); returns shape (..., 8).
    """
    x = np.asarray(x, dtype=float)
    u = np.zeros(x.shape[:-1] + (NCOMP,))
    c = params.c
    if wave.kind in ("cosine", "sine"):
        trig = np.cos if wave.kind == "cosine" else np.sin
        phase = wave.wavenumber * (x[..., 0] - c * t)
        u[..., EZ] = wave.amplitude * trig(phase)
        u[..., BY] = -u[..., EZ]
    elif wave.kind == "bump":
        f = wave.amplitude * bump_profile(x[..., 1] - wave.y0 - c * t, wave.eta)
        u[..., EZ] = f
        u[..., BX] = f
    elif wave.kind == "none":
        pass
    else:
        raise EmError(f"unknown wave kind {wave.kind!r}")
    return u


def divergence_residuals_grid(u: np.ndarray, spacing, params: PhmParams,
                              rho: np.ndarray | None = None,
                              periodic: bool = True) -> tuple[float, float]:
    """Gauss-law residuals (max|div E - rho/eps0|, max|div B|) on a grid.

    Central differences; with ``periodic=False`` only interior cells enter
    the max. ``u`` has shape (nx, ny, nz, 8).
    """
    spacing = np.asarray(spacing, dtype=float)

    def central(fld, ax):
        if u.shape[ax] == 1:
            return np.zeros_like(fld)
        d = (np.roll(fld, -1, axis=ax) - np.roll(fld, 1, axis=ax)) / (2 * spacing[ax])
        return d

    div_e = sum(central(u[..., EX + j], j) for j in range(3))
    div_b = sum(central(u[..., BX + j], j) for j in range(3))
    if rho is not None:
        div_e = div_e - np.asarray(rho) / params.eps0
    if not periodic:
        core = tuple(slice(1, -1) if u.shape[ax] > 2 else slice(None) for ax in range(3))
        div_e, div_b = div_e[core], div_b[core]
    return float(np.max(np.abs(div_e))), float(np.max(np.abs(div_b)))


def divergence_residuals_mesh(u: np.ndarray, mesh, params: PhmParams,
                              rho: np.ndarray | None = None) -> tuple[float, float]:
    """Green-Gauss Gauss-law residuals on an unstructured mesh."""
    own, nei = mesh.face_owner, mesh.face_neighbor
    interior = nei >= 0
    div = np.zeros((mesh.num_cells, 2))
    for slot, base in enumerate((EX, BX)):
        vec = u[:, base:base + 3]
        fval = np.zeros((len(own), 3))
        fval[interior] = 0.5 * (vec[own[interior]] + vec[nei[interior]])
        fval[~interior] = vec[own[~interior]]
        fn = np.einsum("fj,fj->f", fval, mesh.face_normal) * mesh.face_area
        np.add.at(div[:, slot], own, fn)
        np.subtract.at(div[:, slot], nei[interior], fn[interior])
    div /= mesh.cell_volume[:, None]
    div_e = div[:, 0] - (0 if rho is None else np.asarray(rho) / params.eps0)
    return float(np.max(np.abs(div_e))), float(np.max(np.abs(div[:, 1])))
