"""Scripted desk-scale mesh generators.

All generators are deterministic and write the documented Gmsh-2.2 subset:

* ``tet_box``: structured block Kuhn-split into 6 tets per cube. The Kuhn
  (Freudenthal) split picks face diagonals consistently across neighbor
  cubes, so the mesh conforms without parity tricks.
* ``hex_box``: the same block as hexahedra.
* ``sphere_in_box``: a cube-sphere shell between a unit-radius sphere and
  the [-size, size]^3 box, radially graded, each hex fanned into 24 tets
  around its face and cell centroids (conforming by construction).

Boundary patches: box faces are xlo/xhi/ylo/yhi/zlo/zhi; the sphere mesh
uses 'sphere' (inner) and 'farfield' (outer).
"""

from __future__ import annotations

import numpy as np

from .mesh import GMSH_HEX, GMSH_TET, UnstructuredMesh, build_mesh, write_msh

BOX_PATCHES = ("xlo", "xhi", "ylo", "yhi", "zlo", "zhi")

# Kuhn simplices of the unit cube: path 0 -> 7 through axis permutations
_KUHN_PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


def _corner(i, j, k, b):
    return (i + b[0], j + b[1], k + b[2])


def _oriented(tet, coords):
    a = coords[tet[0]]
    v = np.dot(coords[tet[1]] - a,
               np.cross(coords[tet[2]] - a, coords[tet[3]] - a))
    return tet if v > 0 else (tet[0], tet[2], tet[1], tet[3])


def _box_nodes(nx, ny, nz, bounds):
    (x0, x1), (y0, y1), (z0, z1) = bounds
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    zs = np.linspace(z0, z1, nz + 1)
    nodes = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1)
    nid = np.arange(nodes[..., 0].size).reshape(nx + 1, ny + 1, nz + 1)
    return nodes.reshape(-1, 3), nid


def _box_boundary_quads(nid, nx, ny, nz):
    """(patch_id, quad) per boundary face of the structured block."""
    quads = []
    for j in range(ny):
        for k in range(nz):
            quads.append((0, (nid[0, j, k], nid[0, j, k + 1],
                              nid[0, j + 1, k + 1], nid[0, j + 1, k])))
            quads.append((1, (nid[nx, j, k], nid[nx, j + 1, k],
                              nid[nx, j + 1, k + 1], nid[nx, j, k + 1])))
    for i in range(nx):
        for k in range(nz):
            quads.append((2, (nid[i, 0, k], nid[i + 1, 0, k],
                              nid[i + 1, 0, k + 1], nid[i, 0, k + 1])))
            quads.append((3, (nid[i, ny, k], nid[i, ny, k + 1],
                              nid[i + 1, ny, k + 1], nid[i + 1, ny, k])))
    for i in range(nx):
        for j in range(ny):
            quads.append((4, (nid[i, j, 0], nid[i, j + 1, 0],
                              nid[i + 1, j + 1, 0], nid[i + 1, j, 0])))
            quads.append((5, (nid[i, j, nz], nid[i + 1, j, nz],
                              nid[i + 1, j + 1, nz], nid[i, j + 1, nz])))
    return quads


def hex_box_elements(nx, ny, nz, bounds=((0, 1), (0, 1), (0, 1))):
    nodes, nid = _box_nodes(nx, ny, nz, bounds)
    cells = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                cells.append((GMSH_HEX, np.array([
                    nid[i, j, k], nid[i + 1, j, k],
                    nid[i + 1, j + 1, k], nid[i, j + 1, k],
                    nid[i, j, k + 1], nid[i + 1, j, k + 1],
                    nid[i + 1, j + 1, k + 1], nid[i, j + 1, k + 1]])))
    surfs = [(pid, np.asarray(q)) for pid, q in _box_boundary_quads(nid, nx, ny, nz)]
    return nodes, cells, surfs


def hex_box(nx, ny, nz, bounds=((0, 1), (0, 1), (0, 1))) -> UnstructuredMesh:
    nodes, cells, surfs = hex_box_elements(nx, ny, nz, bounds)
    return build_mesh(nodes, cells, surfs, BOX_PATCHES)


def tet_box_elements(nx, ny, nz, bounds=((0, 1), (0, 1), (0, 1))):
    nodes, nid = _box_nodes(nx, ny, nz, bounds)
    cells = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                for perm in _KUHN_PERMS:
                    b = np.zeros(3, dtype=int)
                    tet = [nid[i, j, k]]
                    for ax in perm:
                        b[ax] = 1
                        tet.append(nid[_corner(i, j, k, b)])
                    cells.append((GMSH_TET,
                                  np.asarray(_oriented(tuple(tet), nodes))))
    # boundary quads split along the Kuhn diagonals: on every box face the
    # cube diagonal touching the face is the one from its min to max corner
    surfs = []
    for pid, quad in _box_boundary_quads(nid, nx, ny, nz):
        q = np.asarray(quad)
        pts = nodes[q]
        order = np.argsort(np.sum(pts, axis=1))
        lo, hi = q[order[0]], q[order[-1]]
        rest = [v for v in q if v != lo and v != hi]
        surfs.append((pid, np.array([lo, rest[0], hi])))
        surfs.append((pid, np.array([lo, hi, rest[1]])))
    return nodes, cells, surfs


def tet_box(nx, ny, nz, bounds=((0, 1), (0, 1), (0, 1))) -> UnstructuredMesh:
    nodes, cells, surfs = tet_box_elements(nx, ny, nz, bounds)
    return build_mesh(nodes, cells, surfs, BOX_PATCHES)


def unit_tet() -> UnstructuredMesh:
    """Single reference tetrahedron, all faces on patch 'wall'."""
    nodes = np.array([[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]])
    cells = [(GMSH_TET, np.arange(4))]
    surfs = [(0, np.array(f)) for f in ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))]
    return build_mesh(nodes, cells, surfs, ["wall"])


def two_tets() -> UnstructuredMesh:
    """Two unit tets sharing the x+y+z=1 face; patches 'wall'."""
    nodes = np.array([[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.],
                      [1., 1., 1.]])
    cells = [(GMSH_TET, np.array([0, 1, 2, 3])),
             (GMSH_TET, np.array([4, 1, 3, 2]))]
    surfs = [(0, np.array(f)) for f in
             ((0, 3, 2), (0, 1, 3), (0, 2, 1),
              (4, 1, 2), (4, 3, 1), (4, 2, 3))]
    return build_mesh(nodes, cells, surfs, ["wall"])


class _NodePool:
    """Deduplicates nodes by rounded coordinates."""

    def __init__(self):
        self.coords: list = []
        self._index: dict = {}

    def add(self, p) -> int:
        key = tuple(np.round(p, 9))
        idx = self._index.get(key)
        if idx is None:
            idx = len(self.coords)
            self._index[key] = idx
            self.coords.append(np.asarray(p, dtype=float))
        return idx

    def array(self) -> np.ndarray:
        return np.asarray(self.coords)


def _cube_surface_grid(n):
    """(6, n+1, n+1, 3) parameter points on the unit-cube surface."""
    lin = np.linspace(-1.0, 1.0, n + 1)
    a, b = np.meshgrid(lin, lin, indexing="ij")
    one = np.ones_like(a)
    faces = [
        np.stack([one, a, b], axis=-1), np.stack([-one, b, a], axis=-1),
        np.stack([b, one, a], axis=-1), np.stack([a, -one, b], axis=-1),
        np.stack([a, b, one], axis=-1), np.stack([b, a, -one], axis=-1),
    ]
    return np.stack(faces)


def sphere_in_box_elements(n_surf=8, n_layers=6, radius=1.0, box=5.0,
                           grading=1.6):
    """Tet mesh between a sphere and a box via the fanned cube-sphere shell."""
    surface = _cube_surface_grid(n_surf)
    pool = _NodePool()
    t = (np.arange(n_layers + 1) / n_layers) ** grading

    def layer_point(u, tl):
        u = np.asarray(u)
        inner = radius * u / np.linalg.norm(u)
        outer = box * u
        return (1 - tl) * inner + tl * outer

    # hex corner ids per (face, i, j, layer)
    corner = np.empty((6, n_surf + 1, n_surf + 1, n_layers + 1), dtype=int)
    for f in range(6):
        for i in range(n_surf + 1):
            for j in range(n_surf + 1):
                for l in range(n_layers + 1):
                    corner[f, i, j, l] = pool.add(layer_point(surface[f, i, j], t[l]))

    cells = []
    surfs = []
    coords = None  # filled after all centroids are pooled

    from .mesh import HEX_FACES

    def fan_hex(hex_ids, inner_quad, outer_quad):
        """24 tets around the hex centroid; returns boundary tris per end."""
        pts = np.asarray([pool.coords[i] for i in hex_ids])
        cc = pool.add(pts.mean(axis=0))
        tris_in, tris_out = [], []
        for face in HEX_FACES:
            ids = [hex_ids[v] for v in face]
            fc = pool.add(np.asarray([pool.coords[i] for i in ids]).mean(axis=0))
            for v in range(4):
                a, b = ids[v], ids[(v + 1) % 4]
                cells.append((GMSH_TET, np.array([b, a, fc, cc])))
                key = tuple(sorted(ids))
                if key == tuple(sorted(inner_quad)):
                    tris_in.append((a, b, fc))
                elif key == tuple(sorted(outer_quad)):
                    tris_out.append((a, b, fc))
        return tris_in, tris_out

    for f in range(6):
        for i in range(n_surf):
            for j in range(n_surf):
                for l in range(n_layers):
                    c = corner[f, i:i + 2, j:j + 2, l:l + 2]
                    # gmsh hex ordering: bottom ring then top ring
                    hex_ids = (c[0, 0, 0], c[1, 0, 0], c[1, 1, 0], c[0, 1, 0],
                               c[0, 0, 1], c[1, 0, 1], c[1, 1, 1], c[0, 1, 1])
                    inner = (c[0, 0, 0], c[1, 0, 0], c[1, 1, 0], c[0, 1, 0])
                    outer = (c[0, 0, 1], c[1, 0, 1], c[1, 1, 1], c[0, 1, 1])
                    tri_in, tri_out = fan_hex(hex_ids, inner, outer)
                    if l == 0:
                        surfs += [(0, np.asarray(tr)) for tr in tri_in]
                    if l == n_layers - 1:
                        surfs += [(1, np.asarray(tr)) for tr in tri_out]

    coords = pool.array()
    cells = [(t_, np.asarray(_oriented(tuple(ids), coords)))
             for t_, ids in cells]
    return coords, cells, surfs


def sphere_in_box(n_surf=8, n_layers=6, radius=1.0, box=5.0,
                  grading=1.6) -> UnstructuredMesh:
    nodes, cells, surfs = sphere_in_box_elements(n_surf, n_layers, radius,
                                                 box, grading)
    return build_mesh(nodes, cells, surfs, ["sphere", "farfield"])


def write_box_msh(path, nx, ny, nz, bounds=((0, 1), (0, 1), (0, 1)),
                  kind="tet"):
    maker = tet_box_elements if kind == "tet" else hex_box_elements
    nodes, cells, surfs = maker(nx, ny, nz, bounds)
    write_msh(path, nodes, cells, surfs, BOX_PATCHES)


def write_sphere_msh(path, n_surf=8, n_layers=6, radius=1.0, box=5.0,
                     grading=1.6):
    nodes, cells, surfs = sphere_in_box_elements(n_surf, n_layers, radius,
                                                 box, grading)
    write_msh(path, nodes, cells, surfs, ["sphere", "farfield"])
