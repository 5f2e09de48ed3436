"""Unstructured meshes: a Gmsh-v2.2 ASCII subset, connectivity and geometry.

Supported file subset: $MeshFormat 2.2, $PhysicalNames, $Nodes, $Elements
with element types tri (2), quad (3), tet (4), hex (5). Surface elements
carry the boundary patch via their physical group; every boundary face of
the volume мesh must be covered by exactly one tagged surface element.

Connectivity is built by hashing sorted node tuples: faces seen from two
cells become interior (normal pointing owner -> neighbor, owner = lower
cell id); the rest must match boundary surface elements. Quad faces are
fanned into triangles around the face centroid, which keeps the geometric
closure sum A*n over every closed cell exact to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GMSH_TRI, GMSH_QUAD, GMSH_TET, GMSH_HEX = 2, 3, 4, 5
_NODES_PER_TYPE = {GMSH_TRI: 3, GMSH_QUAD: 4, GMSH_TET: 4, GMSH_HEX: 8}

# local faces with outward orientation for positively oriented cells
TET_FACES = ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))
HEX_FACES = ((0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
             (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7))


class MeshError(ValueError):
    """Malformed mesh file or inconsistent connectivity/geometry."""


@dataclass
class UnstructuredMesh:
    """Cell-face connectivity with precomputed geometry.

    Interior faces have ``face_neighbor >= 0``; boundary faces carry a
    patch id into ``patch_names``. ``face_shift`` is nonzero only on faces
    created by periodic pairing: it translates the neighbor centroid next
    to the owner for distance computations.
    """

    nodes: np.ndarray                 # (np, 3)
    cell_nodes: np.ndarray            # (nc, 8), -1 padded
    cell_nnodes: np.ndarray           # (nc,)
    cell_volume: np.ndarray           # (nc,)
    cell_centroid: np.ndarray         # (nc, 3)
    face_nodes: list                  # ragged, owner-outward ordering
    face_owner: np.ndarray            # (nf,)
    face_neighbor: np.ndarray         # (nf,), -1 on boundary
    face_normal: np.ndarray           # (nf, 3), unit, outward from owner
    face_area: np.ndarray             # (nf,)
    face_centroid: np.ndarray         # (nf, 3)
    face_patch: np.ndarray            # (nf,), -1 interior
    face_shift: np.ndarray            # (nf, 3)
    patch_names: list[str] = field(default_factory=list)

    @property
    def num_cells(self) -> int:
        return len(self.cell_volume)

    @property
    def num_faces(self) -> int:
        return len(self.face_owner)

    @property
    def interior_faces(self) -> np.ndarray:
        return np.nonzero(self.face_neighbor >= 0)[0]

    def patch_id(self, name: str) -> int:
        try:
            return self.patch_names.index(name)
        except ValueError:
            raise MeshError(f"no boundary patch named {name!r}; "
                            f"have {self.patch_names}") from None

    def patch_faces(self, name: str) -> np.ndarray:
        return np.nonzero(self.face_patch == self.patch_id(name))[0]

    def closure_residual(self) -> float:
        """max over cells of |sum A n| / (cell surface area)."""
        acc = np.zeros((self.num_cells, 3))
        area = np.zeros(self.num_cells)
        an = self.face_normal * self.face_area[:, None]
        np.add.at(acc, self.face_owner, an)
        np.add.at(area, self.face_owner, self.face_area)
        interior = self.face_neighbor >= 0
        np.add.at(acc, self.face_neighbor[interior], -an[interior])
        np.add.at(area, self.face_neighbor[interior], self.face_area[interior])
        return float(np.max(np.linalg.norm(acc, axis=1) / area))

    def neighbor_distance_vectors(self) -> np.ndarray:
        """(nf, 3) owner-centroid to neighbor-centroid (periodic-corrected)."""
        d = np.zeros((self.num_faces, 3))
        i = self.interior_faces
        d[i] = (self.cell_centroid[self.face_neighbor[i]] - self.face_shift[i]
                - self.cell_centroid[self.face_owner[i]])
        return d

    def apply_periodic(self, pairs) -> "UnstructuredMesh":
        """Fuse boundary patch pairs into interior faces.

        ``pairs`` is an iterable of (patch_a, patch_b, translation) where
        translation maps patch_a face centroids onto patch_b ones. Matched
        faces of patch_b are dropped; patch_a faces become interior with
        ``face_shift`` recording the translation.
        """
        keep = np.ones(self.num_faces, dtype=bool)
        neighbor = self.face_neighbor.copy()
        patch = self.face_patch.copy()
        shift = self.face_shift.copy()
        for name_a, name_b, translation in pairs:
            fa = self.patch_faces(name_a)
            fb = self.patch_faces(name_b)
            if len(fa) != len(fb):
                raise MeshError(f"periodic patches {name_a}/{name_b} differ "
                                f"in face count: {len(fa)} vs {len(fb)}")
            t = np.asarray(translation, dtype=float)
            key_b = {tuple(np.round(c, 9)): f
                     for f, c in zip(fb, self.face_centroid[fb])}
            for f in fa:
                k = tuple(np.round(self.face_centroid[f] + t, 9))
                if k not in key_b:
                    raise MeshError(f"periodic match failed on patch {name_a} "
                                    f"at {self.face_centroid[f]}")
                fb_match = key_b.pop(k)
                neighbor[f] = self.face_owner[fb_match]
                patch[f] = -1
                shift[f] = t  # neighbor centroid - t sits next to the owner
                keep[fb_match] = False
        idx = np.nonzero(keep)[0]
        return UnstructuredMesh(
            nodes=self.nodes, cell_nodes=self.cell_nodes,
            cell_nnodes=self.cell_nnodes, cell_volume=self.cell_volume,
            cell_centroid=self.cell_centroid,
            face_nodes=[self.face_nodes[i] for i in idx],
            face_owner=self.face_owner[idx], face_neighbor=neighbor[idx],
            face_normal=self.face_normal[idx], face_area=self.face_area[idx],
            face_centroid=self.face_centroid[idx], face_patch=patch[idx],
            face_shift=shift[idx], patch_names=self.patch_names,
        )


def _tri_geometry(nodes, tris):
    """Area vectors and centroids of triangle batches (nt, 3)."""
    a, b, c = nodes[tris[:, 0]], nodes[tris[:, 1]], nodes[tris[:, 2]]
    an = 0.5 * np.cross(b - a, c - a)
    centroid = (a + b + c) / 3.0
    return an, centroid


def _face_geometry(nodes, face):
    """(area, unit normal, centroid) for a tri or centroid-fanned quad."""
    face = np.asarray(face)
    if len(face) == 3:
        an, cent = _tri_geometry(nodes, face[None, :])
        area_vec, centroid = an[0], cent[0]
        area = np.linalg.norm(area_vec)
        return area, area_vec / area, centroid
    fc = nodes[face].mean(axis=0)
    total = np.zeros(3)
    cent = np.zeros(3)
    tri_area = 0.0
    for i in range(len(face)):
        a, b = nodes[face[i]], nodes[face[(i + 1) % len(face)]]
        an = 0.5 * np.cross(b - a, fc - a)
        total += an
        w = np.linalg.norm(an)
        tri_area += w
        cent += w * (a + b + fc) / 3.0
    # the vector area keeps sum(A n) over closed cells exact even for
    # mildly non-planar quads
    area = np.linalg.norm(total)
    return area, total / area, cent / tri_area


def _tet_volumes(nodes, tets):
    a = nodes[tets[:, 0]]
    return np.einsum("ij,ij->i", nodes[tets[:, 1]] - a,
                     np.cross(nodes[tets[:, 2]] - a, nodes[tets[:, 3]] - a)) / 6.0


def _cell_geometry(nodes, conn, nnodes):
    """Volumes and centroids; hexes decompose into face-fan tets."""
    nc = len(conn)
    vol = np.zeros(nc)
    cent = np.zeros((nc, 3))
    tet_mask = nnodes == 4
    if np.any(tet_mask):
        tets = conn[tet_mask][:, :4]
        v = _tet_volumes(nodes, tets)
        vol[tet_mask] = v
        cent[tet_mask] = nodes[tets].mean(axis=1)
    hex_mask = nnodes == 8
    for ci in np.nonzero(hex_mask)[0]:
        corners = nodes[conn[ci, :8]]
        cc = corners.mean(axis=0)
        v_total = 0.0
        c_total = np.zeros(3)
        for face in HEX_FACES:
            fc = corners[list(face)].mean(axis=0)
            for i in range(4):
                a = corners[face[i]]
                b = corners[face[(i + 1) % 4]]
                # outward face fan with the interior apex has negative
                # orientation, so flip the sign
                v = -np.dot(np.cross(b - a, fc - a), cc - a) / 6.0
                if v <= 0:
                    raise MeshError(f"degenerate or inverted hex cell {ci}")
                v_total += v
                c_total += v * (a + b + fc + cc) / 4.0
        vol[ci] = v_total
        cent[ci] = c_total / v_total
    return vol, cent


def build_mesh(nodes: np.ndarray, volume_elements, surface_elements,
               patch_names) -> UnstructuredMesh:
    """Assemble connectivity and geometry from raw element lists.

    ``volume_elements``: list of (gmsh_type, node index array).
    ``surface_elements``: list of (patch_id, node index array).
    """
    nodes = np.asarray(nodes, dtype=float)
    nc = len(volume_elements)
    if nc == 0:
        raise MeshError("mesh has no volume cells")
    conn = np.full((nc, 8), -1, dtype=int)
    nnodes = np.zeros(nc, dtype=int)
    for i, (etype, ids) in enumerate(volume_elements):
        k = _NODES_PER_TYPE[etype]
        conn[i, :k] = ids
        nnodes[i] = k

    volume, centroid = _cell_geometry(nodes, conn, nnodes)
    bad = np.nonzero(volume <= 0)[0]
    if len(bad):
        raise MeshError(f"{len(bad)} cells have non-positive volume "
                        f"(first: cell {bad[0]}, volume {volume[bad[0]]!r})")

    # hash faces by sorted node tuple
    face_map: dict[tuple, list] = {}
    for ci in range(nc):
        local = TET_FACES if nnodes[ci] == 4 else HEX_FACES
        cn = conn[ci]
        for lf in local:
            fn = tuple(int(cn[j]) for j in lf)
            key = tuple(sorted(fn))
            face_map.setdefault(key, []).append((ci, fn))

    surf_lookup = {}
    for pid, ids in surface_elements:
        key = tuple(sorted(int(j) for j in ids))
        if key in surf_lookup:
            raise MeshError(f"duplicate surface element on nodes {key}")
        surf_lookup[key] = pid

    owners, neighbors, f_nodes, patches = [], [], [], []
    for key, hits in sorted(face_map.items()):
        if len(hits) > 2:
            raise MeshError(f"non-conforming face shared by {len(hits)} cells "
                            f"(nodes {key})")
        if len(hits) == 2:
            (c0, fn0), (c1, _) = hits
            owners.append(c0)
            neighbors.append(c1)
            f_nodes.append(fn0)
            patches.append(-1)
            if key in surf_lookup:
                raise MeshError(f"surface element on interior face {key}")
        else:
            (c0, fn0), = hits
            if key not in surf_lookup:
                raise MeshError(f"boundary face {key} (cell {c0}) has no "
                                "surface element / patch tag")
            owners.append(c0)
            neighbors.append(-1)
            f_nodes.append(fn0)
            patches.append(surf_lookup.pop(key))
    if surf_lookup:
        leftover = next(iter(surf_lookup))
        raise MeshError(f"{len(surf_lookup)} surface elements match no "
                        f"boundary face (first: nodes {leftover})")

    nf = len(owners)
    area = np.zeros(nf)
    normal = np.zeros((nf, 3))
    f_centroid = np.zeros((nf, 3))
    for i, fn in enumerate(f_nodes):
        area[i], normal[i], f_centroid[i] = _face_geometry(nodes, np.asarray(fn))

    mesh = UnstructuredMesh(
        nodes=nodes, cell_nodes=conn, cell_nnodes=nnodes,
        cell_volume=volume, cell_centroid=centroid,
        face_nodes=[np.asarray(fn) for fn in f_nodes],
        face_owner=np.asarray(owners, dtype=int),
        face_neighbor=np.asarray(neighbors, dtype=int),
        face_normal=normal, face_area=area, face_centroid=f_centroid,
        face_patch=np.asarray(patches, dtype=int),
        face_shift=np.zeros((nf, 3)),
        patch_names=list(patch_names),
    )
    res = mesh.closure_residual()
    if res > 1e-9:
        raise MeshError(f"geometric closure violated: max |sum A n|/area = {res!r}")
    return mesh


def parse_msh(path) -> UnstructuredMesh:
    """Parse the documented Gmsh-2.2 ASCII subset."""
    sections: dict[str, list[str]] = {}
    current = None
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("$End"):
                current = None
            elif line.startswith("$"):
                current = line[1:]
                sections[current] = []
            elif current is not None:
                sections[current].append(line)
            else:
                raise MeshError(f"{path}:{ln}: content outside any section")

    if "MeshFormat" not in sections or not sections["MeshFormat"]:
        raise MeshError(f"{path}: missing $MeshFormat")
    fmt = sections["MeshFormat"][0].split()
    if fmt[0] != "2.2" or fmt[1] != "0":
        raise MeshError(f"{path}: unsupported mesh format {fmt[:2]}, need ASCII 2.2")

    patch_names: list[str] = []
    patch_by_tag: dict[int, int] = {}
    for line in sections.get("PhysicalNames", [])[1:]:
        parts = line.split(maxsplit=2)
        tag = int(parts[1])
        name = parts[2].strip().strip('"')
        patch_by_tag[tag] = len(patch_names)
        patch_names.append(name)

    try:
        node_lines = sections["Nodes"]
        count = int(node_lines[0])
        nodes = np.empty((count, 3))
        id_map: dict[int, int] = {}
        for i, line in enumerate(node_lines[1:count + 1]):
            parts = line.split()
            id_map[int(parts[0])] = i
            nodes[i] = [float(parts[1]), float(parts[2]), float(parts[3])]
    except (KeyError, IndexError, ValueError) as exc:
        raise MeshError(f"{path}: malformed $Nodes section ({exc})") from exc

    volume_elements, surface_elements = [], []
    try:
        elem_lines = sections["Elements"]
        count = int(elem_lines[0])
        for line in elem_lines[1:count + 1]:
            parts = [int(p) for p in line.split()]
            etype, ntags = parts[1], parts[2]
            if etype not in _NODES_PER_TYPE:
                raise MeshError(f"{path}: unsupported element type {etype} "
                                f"(element {parts[0]})")
            phys = parts[3] if ntags >= 1 else -1
            ids = [id_map[j] for j in parts[3 + ntags:]]
            if len(ids) != _NODES_PER_TYPE[etype]:
                raise MeshError(f"{path}: element {parts[0]} has "
                                f"{len(ids)} nodes, expected "
                                f"{_NODES_PER_TYPE[etype]}")
            if etype in (GMSH_TET, GMSH_HEX):
                volume_elements.append((etype, np.asarray(ids)))
            else:
                if phys not in patch_by_tag:
                    raise MeshError(f"{path}: surface element {parts[0]} has "
                                    f"no named physical group (tag {phys})")
                surface_elements.append((patch_by_tag[phys], np.asarray(ids)))
    except MeshError:
        raise
    except (KeyError, IndexError, ValueError) as exc:
        raise MeshError(f"{path}: malformed $Elements section ({exc})") from exc

    return build_mesh(nodes, volume_elements, surface_elements, patch_names)


def write_msh(path, nodes, volume_elements, surface_elements, patch_names):
    """Write the subset format; inputs mirror ``build_mesh``."""
    lines = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]
    if patch_names:
        lines += ["$PhysicalNames", str(len(patch_names))]
        for i, name in enumerate(patch_names):
            lines.append(f'2 {i + 1} "{name}"')
        lines.append("$EndPhysicalNames")
    lines += ["$Nodes", str(len(nodes))]
    for i, p in enumerate(nodes, 1):
        lines.append(f"{i} {float(p[0])!r} {float(p[1])!r} {float(p[2])!r}")
    lines.append("$EndNodes")
    lines += ["$Elements", str(len(volume_elements) + len(surface_elements))]
    eid = 1
    for pid, ids in surface_elements:
        etype = GMSH_TRI if len(ids) == 3 else GMSH_QUAD
        tag = pid + 1
        lines.append(f"{eid} {etype} 2 {tag} {tag} "
                     + " ".join(str(j + 1) for j in ids))
        eid += 1
    for etype, ids in volume_elements:
        lines.append(f"{eid} {etype} 2 0 0 " + " ".join(str(j + 1) for j in ids))
        eid += 1
    lines.append("$EndElements")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def face_accumulator(mesh: UnstructuredMesh):
    """Deterministic face-to-cell divergence accumulator (cached on the mesh).

    Returns accumulate(face_values) -> per-cell sum of owner contributions
    minus neighbor contributions, reduced in a fixed presorted face order
    (np.add.reduceat segment sums), so results are independent of any
    parallel partitioning of the face loop.
    """
    plan = getattr(mesh, "_acc_plan", None)
    if plan is None:
        order_o = np.argsort(mesh.face_owner, kind="stable")
        cells_o, starts_o = np.unique(mesh.face_owner[order_o],
                                      return_index=True)
        interior = np.nonzero(mesh.face_neighbor >= 0)[0]
        nei = mesh.face_neighbor[interior]
        order_n = np.argsort(nei, kind="stable")
        cells_n, starts_n = np.unique(nei[order_n], return_index=True)
        plan = (order_o, cells_o, starts_o,
                interior[order_n], cells_n, starts_n)
        object.__setattr__(mesh, "_acc_plan", plan)
    order_o, cells_o, starts_o, faces_n, cells_n, starts_n = plan

    def accumulate(face_values: np.ndarray) -> np.ndarray:
        out = np.zeros((mesh.num_cells,) + face_values.shape[1:])
        out[cells_o] = np.add.reduceat(face_values[order_o], starts_o, axis=0)
        if len(faces_n):
            out[cells_n] -= np.add.reduceat(face_values[faces_n], starts_n,
                                            axis=0)
        return out

    return accumulate
