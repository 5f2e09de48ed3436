"""Legacy ASCII VTK snapshots: structured points for grids, unstructured
grids for meshes. All eight state components are written as named cell
scalars; output is byte-stable for identical inputs (repr floats)."""

from __future__ import annotations

import numpy as np

from ..em import COMPONENT_NAMES, NCOMP

_VTK_TET, _VTK_HEX = 10, 12


def _scalars(name: str, values: np.ndarray) -> list[str]:
    out = [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
    out += [repr(float(v)) for v in values.ravel(order="F")]
    return out


def write_vtk_structured(path, grid, u: np.ndarray, title="phmbeam snapshot"):
    """Cell-centered snapshot on a Cartesian grid (STRUCTURED_POINTS)."""
    nx, ny, nz = grid.dims
    lines = ["# vtk DataFile Version 3.0", title, "ASCII",
             "DATASET STRUCTURED_POINTS",
             f"DIMENSIONS {nx + 1} {ny + 1} {nz + 1}",
             "ORIGIN " + " ".join(repr(float(o)) for o in grid.origin),
             "SPACING " + " ".join(repr(float(h)) for h in grid.spacing),
             f"CELL_DATA {nx * ny * nz}"]
    for comp in range(NCOMP):
        lines += _scalars(COMPONENT_NAMES[comp], u[..., comp])
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_vtk_unstructured(path, mesh, u: np.ndarray,
                           title="phmbeam snapshot"):
    lines = ["# vtk DataFile Version 3.0", title, "ASCII",
             "DATASET UNSTRUCTURED_GRID",
             f"POINTS {len(mesh.nodes)} double"]
    for p in mesh.nodes:
        lines.append(" ".join(repr(float(x)) for x in p))
    sizes = mesh.cell_nnodes
    total = int(np.sum(sizes + 1))
    lines.append(f"CELLS {mesh.num_cells} {total}")
    for i in range(mesh.num_cells):
        k = sizes[i]
        ids = " ".join(str(int(v)) for v in mesh.cell_nodes[i, :k])
        lines.append(f"{k} {ids}")
    lines.append(f"CELL_TYPES {mesh.num_cells}")
    lines += [str(_VTK_TET if k == 4 else _VTK_HEX) for k in sizes]
    lines.append(f"CELL_DATA {mesh.num_cells}")
    for comp in range(NCOMP):
        lines += _scalars(COMPONENT_NAMES[comp], u[:, comp])
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vtk(path) -> dict:
    """Minimal reader for the files this package writes.

    Returns {'kind', 'dims'|'cells', 'arrays': {name: flat array}} with
    arrays in the file's cell order (Fortran order for structured grids).
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    out: dict = {"arrays": {}}
    i = 0
    ncells = None
    while i < len(lines):
        ln = lines[i]
        if ln.startswith("DATASET"):
            out["kind"] = ln.split()[1]
        elif ln.startswith("DIMENSIONS"):
            out["dims"] = tuple(int(v) for v in ln.split()[1:])
        elif ln.startswith("CELL_DATA"):
            ncells = int(ln.split()[1])
        elif ln.startswith("SCALARS"):
            name = ln.split()[1]
            vals = np.asarray([float(v) for v in lines[i + 2:i + 2 + ncells]])
            out["arrays"][name] = vals
            i += 1 + ncells
        i += 1
    return out
