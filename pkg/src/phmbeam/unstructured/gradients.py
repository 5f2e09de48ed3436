"""Cell-gradient reconstruction: weighted least-squares and Green-Gauss."""

from __future__ import annotations

import numpy as np

from .mesh import UnstructuredMesh


def green_gauss(mesh: UnstructuredMesh, field: np.ndarray) -> np.ndarray:
    """Green-Gauss gradients from face-averaged values.

    ``field`` is (nc, k); the result is (nc, k, 3). Boundary faces use the
    owner value (zero normal gradient).
    """
    field = np.atleast_2d(field)
    nf = mesh.num_faces
    interior = mesh.face_neighbor >= 0
    fval = field[mesh.face_owner].copy()
    fval[interior] = 0.5 * (field[mesh.face_owner[interior]]
                            + field[mesh.face_neighbor[interior]])
    an = mesh.face_normal * mesh.face_area[:, None]          # (nf, 3)
    contrib = fval[:, :, None] * an[:, None, :]              # (nf, k, 3)
    grad = np.zeros((mesh.num_cells,) + contrib.shape[1:])
    np.add.at(grad, mesh.face_owner, contrib)
    np.subtract.at(grad, mesh.face_neighbor[interior], contrib[interior])
    return grad / mesh.cell_volume[:, None, None]


def least_squares(mesh: UnstructuredMesh, field: np.ndarray,
                  cond_tol: float = 1e-8):
    """Inverse-distance-weighted least-squares gradients over face neighbors.

    Exact for globally linear fields on interior cells. Cells whose normal
    equations are rank-deficient (boundary cells with too few neighbors)
    fall back to Green-Gauss; returns (gradients, fallback_cell_indices).
    """
    field = np.atleast_2d(field)
    nc, k = field.shape
    a = np.zeros((nc, 3, 3))
    rhs = np.zeros((nc, 3, k))

    i = mesh.interior_faces
    own, nei = mesh.face_owner[i], mesh.face_neighbor[i]
    d = mesh.neighbor_distance_vectors()[i]
    w = 1.0 / np.einsum("fj,fj->f", d, d)
    ddt = w[:, None, None] * d[:, :, None] * d[:, None, :]
    df = field[nei] - field[own]
    drhs = w[:, None, None] * d[:, :, None] * df[:, None, :]
    np.add.at(a, own, ddt)
    np.add.at(a, nei, ddt)  # the reverse stencil uses -d, -df: same products
    np.add.at(rhs, own, drhs)
    np.add.at(rhs, nei, drhs)

    eig = np.linalg.eigvalsh(a)
    ok = eig[:, 0] > cond_tol * np.maximum(eig[:, -1], 1e-300)
    grad = np.zeros((nc, k, 3))
    if np.any(ok):
        sol = np.linalg.solve(a[ok], rhs[ok])       # (n_ok, 3, k)
        grad[ok] = np.transpose(sol, (0, 2, 1))
    fallback = np.nonzero(~ok)[0]
    if len(fallback):
        gg = green_gauss(mesh, field)
        grad[fallback] = gg[fallback]
    return grad, fallback


def gradients(mesh: UnstructuredMesh, field: np.ndarray,
              method: str = "least_squares"):
    """Dispatch per the configured method; returns (grad, fallback_cells)."""
    if method == "least_squares":
        return least_squares(mesh, field)
    if method == "green_gauss":
        return green_gauss(mesh, field), np.empty(0, dtype=int)
    raise ValueError(f"unknown gradient method {method!r}")
