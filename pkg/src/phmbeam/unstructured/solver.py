"""Beam-U and FVS-U finite-volume steps on unstructured meshes, plus the
run driver.

Beam-U transports each beam with the upwind face flux

    F = f_owner (v.n)_+ + f_neighbor (v.n)_-

optionally with linearly reconstructed face values, inside the same
collide / transport / map / source loop as the structured kinetic solvers.
FVS-U rotates each face to its local frame and applies the exact 1D upwind
flux (A_n+ U_L + A_n- U_R).

Boundary ghosts: PEC mirrors (tangential E and normal B flip, the rest
copies), far-field ghosts take the analytic incident wave at the reflected
owner centroid; kinetic solvers use the equilibrium of the ghost state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .. import em, kinetic
from ..em import PhmParams, WaveConfig
from ..kinetic import Lattice, RelaxationPolicy
from ..scenario import Scenario, ScenarioError
from .gradients import gradients
from .mesh import MeshError, UnstructuredMesh, face_accumulator, parse_msh


@dataclass
class MeshState:
    f: np.ndarray | None  # (m, nc, 8) kinetic beams
    u: np.ndarray         # (nc, 8)


def pec_ghost(u_own: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Mirror states enforcing zero tangential E and normal B at the wall.

    Tangential E and normal B flip sign (vanish at the face); normal E and
    tangential B copy over (zero normal gradient); phi, psi copy.
    """
    ghost = u_own.copy()
    e, b = u_own[:, 0:3], u_own[:, 3:6]
    en = np.einsum("fj,fj->f", e, normals)[:, None] * normals
    bn = np.einsum("fj,fj->f", b, normals)[:, None] * normals
    ghost[:, 0:3] = 2.0 * en - e        # E_n kept, E_t flipped
    ghost[:, 3:6] = b - 2.0 * bn        # B_t kept, B_n flipped
    return ghost


def reflected_centroids(mesh: UnstructuredMesh, faces: np.ndarray) -> np.ndarray:
    """Owner centroids mirrored across the face planes (ghost-cell centers)."""
    xo = mesh.cell_centroid[mesh.face_owner[faces]]
    xf = mesh.face_centroid[faces]
    n = mesh.face_normal[faces]
    dist = np.einsum("fj,fj->f", xf - xo, n)
    return xo + 2.0 * dist[:, None] * n


def boundary_ghost_states(mesh: UnstructuredMesh, u: np.ndarray,
                          kinds: dict[int, str], t: float, params: PhmParams,
                          wave: WaveConfig | None) -> np.ndarray:
    """(nf, 8) ghost states; zeros on interior faces."""
    ghost = np.zeros((mesh.num_faces, em.NCOMP))
    for pid, kind in kinds.items():
        faces = np.nonzero(mesh.face_patch == pid)[0]
        if len(faces) == 0:
            continue
        if kind == "pec":
            ghost[faces] = pec_ghost(u[mesh.face_owner[faces]],
                                     mesh.face_normal[faces])
        elif kind == "farfield_analytic":
            w = wave if wave is not None else WaveConfig(kind="none")
            ghost[faces] = em.analytic_plane_wave(
                w, reflected_centroids(mesh, faces), t, params)
        else:
            raise ScenarioError(f"unknown boundary kind {kind!r}")
    return ghost


def beam_u_time_step(mesh: UnstructuredMesh, lattice: Lattice,
                     cfl: float) -> float:
    """cfl * min_i V_i / max_k sum_f |v_k . n| A_f."""
    worst = np.zeros(mesh.num_cells)
    for v in lattice.velocities:
        vn = np.abs(mesh.face_normal @ v) * mesh.face_area
        acc = np.zeros(mesh.num_cells)
        np.add.at(acc, mesh.face_owner, vn)
        interior = mesh.face_neighbor >= 0
        np.add.at(acc, mesh.face_neighbor[interior], vn[interior])
        worst = np.maximum(worst, acc)
    return cfl * float(np.min(mesh.cell_volume / worst))


def fvs_u_time_step(mesh: UnstructuredMesh, params: PhmParams,
                    cfl: float) -> float:
    cmax = params.c * max(1.0, params.chi, params.gamma)
    acc = np.zeros(mesh.num_cells)
    a = mesh.face_area * cmax
    np.add.at(acc, mesh.face_owner, a)
    interior = mesh.face_neighbor >= 0
    np.add.at(acc, mesh.face_neighbor[interior], a[interior])
    return cfl * float(np.min(mesh.cell_volume / acc))


def _face_upwind_values(mesh, vals, up_cells, faces, grad, neighbor_side):
    """Cell values at face centroids, linearly extrapolated when grad given.

    ``neighbor_side`` marks faces whose upwind cell is the neighbor; for
    periodic faces its centroid must be translated back by the face shift.
    """
    v = vals[up_cells]
    if grad is None:
        return v
    d = mesh.face_centroid[faces] - mesh.cell_centroid[up_cells]
    d = d + neighbor_side[:, None] * mesh.face_shift[faces]
    return v + np.einsum("fkj,fj->fk", grad[up_cells], d)


def transport_beam_u(mesh: UnstructuredMesh, f: np.ndarray, lattice: Lattice,
                     params: PhmParams, dt: float,
                     ghost_u: np.ndarray | None = None,
                     reconstruction: str = "first_order") -> np.ndarray:
    """Upwind finite-volume transport of all beams; returns new beams."""
    out = f.copy()
    interior = mesh.interior_faces
    own = mesh.face_owner
    nei = mesh.face_neighbor
    boundary = np.nonzero(nei < 0)[0]
    ghost_beams = None
    if len(boundary):
        if ghost_u is None:
            raise ScenarioError("mesh has boundary faces but no ghost states")
        ghost_beams = kinetic.equilibrium(ghost_u[boundary], lattice, params)

    use_grad = reconstruction == "linear"
    for k, v in enumerate(lattice.velocities):
        grad = None
        if use_grad:
            grad, _ = gradients(mesh, f[k], method="least_squares")
        vn = mesh.face_normal @ v
        flux = np.zeros((mesh.num_faces, em.NCOMP))

        fi = interior
        pos = vn[fi] > 0
        up = np.where(pos, own[fi], nei[fi])
        neighbor_side = np.where(pos, 0.0, 1.0)
        vals = _face_upwind_values(mesh, f[k], up, fi, grad, neighbor_side)
        flux[fi] = vals * vn[fi, None]

        if len(boundary):
            bvn = vn[boundary]
            inflow = bvn < 0
            bvals = f[k][own[boundary]].copy()
            bvals[inflow] = ghost_beams[k][inflow]
            flux[boundary] = bvals * bvn[:, None]

        fa = flux * mesh.face_area[:, None]
        acc = face_accumulator(mesh)(fa)
        out[k] = f[k] - (dt / mesh.cell_volume[:, None]) * acc
    return out


def _face_rotations(mesh: UnstructuredMesh) -> np.ndarray:
    """(nf, 3, 3) local-frame rotations per face (cached on the mesh)."""
    rot = getattr(mesh, "_face_rot", None)
    if rot is None:
        rot = np.empty((mesh.num_faces, 3, 3))
        for i in range(mesh.num_faces):
            rot[i] = em.rotation3(mesh.face_normal[i])
        object.__setattr__(mesh, "_face_rot", rot)
    return rot


def _upwind_face_flux(mesh: UnstructuredMesh, params: PhmParams, faces,
                      u_l: np.ndarray, u_r: np.ndarray) -> np.ndarray:
    """1/2 A_n (U_L + U_R) - 1/2 |A_n| (U_R - U_L) on the given faces.

    The central part uses the constant axis Jacobians weighted by the
    normal components; the dissipation rotates to the face frame where
    |A_1| is diagonal: diag(chi c, c, c, gamma c, c, c, chi c, gamma c).
    """
    n = mesh.face_normal[faces]
    mean = 0.5 * (u_l + u_r)
    central = np.zeros_like(mean)
    for j in range(3):
        central += n[:, j, None] * (mean @ em.jacobian(j + 1, params).T)
    jump = 0.5 * (u_r - u_l)
    rot = _face_rotations(mesh)[faces]
    dloc = np.empty_like(jump)
    dloc[:, 0:3] = np.einsum("fij,fj->fi", rot, jump[:, 0:3])
    dloc[:, 3:6] = np.einsum("fij,fj->fi", rot, jump[:, 3:6])
    dloc[:, 6:8] = jump[:, 6:8]
    c, chi, gam = params.c, params.chi, params.gamma
    dloc *= np.array([chi * c, c, c, gam * c, c, c, chi * c, gam * c])
    diss = np.empty_like(dloc)
    diss[:, 0:3] = np.einsum("fji,fj->fi", rot, dloc[:, 0:3])
    diss[:, 3:6] = np.einsum("fji,fj->fi", rot, dloc[:, 3:6])
    diss[:, 6:8] = dloc[:, 6:8]
    return central - diss


def step_fvs_u(mesh: UnstructuredMesh, u: np.ndarray, params: PhmParams,
               dt: float, ghost_u: np.ndarray | None = None,
               reconstruction: str = "first_order",
               timers: dict | None = None) -> np.ndarray:
    """One FVS-U flux update (sources are applied by the caller)."""
    t0 = time.perf_counter() if timers is not None else 0.0
    own, nei = mesh.face_owner, mesh.face_neighbor
    fi = mesh.interior_faces
    boundary = np.nonzero(nei < 0)[0]

    grad = None
    if reconstruction == "linear":
        grad, _ = gradients(mesh, u, method="least_squares")
    u_l = _face_upwind_values(mesh, u, own[fi], fi, grad,
                              np.zeros(len(fi)))
    u_r = _face_upwind_values(mesh, u, nei[fi], fi, grad,
                              np.ones(len(fi)))
    flux = np.zeros((mesh.num_faces, em.NCOMP))
    flux[fi] = _upwind_face_flux(mesh, params, fi, u_l, u_r)
    if len(boundary):
        if ghost_u is None:
            raise ScenarioError("mesh has boundary faces but no ghost states")
        flux[boundary] = _upwind_face_flux(mesh, params, boundary,
                                           u[own[boundary]], ghost_u[boundary])
    fa = flux * mesh.face_area[:, None]
    acc = face_accumulator(mesh)(fa)
    out = u - (dt / mesh.cell_volume[:, None]) * acc
    if timers is not None:
        timers["transport"] = timers.get("transport", 0.0) \
            + (time.perf_counter() - t0)
    return out


def step_beam_u(mesh: UnstructuredMesh, state: MeshState, lattice: Lattice,
                params: PhmParams, policy: RelaxationPolicy, dt: float,
                t: float, kinds: dict[int, str],
                wave: WaveConfig | None = None,
                sigma: np.ndarray | None = None,
                rho_half: np.ndarray | None = None,
                reconstruction: str = "first_order",
                timers: dict | None = None) -> MeshState:
    """Full kinetic step on a mesh (collide, transport, map, source)."""
    from ..structured.beam import apply_sources

    def tick():
        return time.perf_counter() if timers is not None else 0.0

    t0 = tick()
    omega = policy.omega   # detector mode is a structured-grid feature
    if policy.mode == "from_tau":
        omega = kinetic.omega_from_tau(policy.tau, dt)
    elif policy.mode == "detector":
        raise ScenarioError("the smoothness detector requires a structured grid")
    f = kinetic.collide(state.f, state.u, omega, lattice, params)
    t1 = tick()
    ghost_u = None
    if np.any(mesh.face_neighbor < 0):
        ghost_u = boundary_ghost_states(mesh, state.u, kinds, t + 0.5 * dt,
                                        params, wave)
    f = transport_beam_u(mesh, f, lattice, params, dt, ghost_u, reconstruction)
    t2 = tick()
    u_star = kinetic.moments(f)
    t3 = tick()
    u_new, f = apply_sources(u_star, f, dt, t, params, lattice,
                             sigma=sigma, rho=rho_half)
    if timers is not None:
        t4 = time.perf_counter()
        timers["collision"] = timers.get("collision", 0.0) + (t1 - t0)
        timers["transport"] = timers.get("transport", 0.0) + (t2 - t1)
        timers["map"] = timers.get("map", 0.0) + (t3 - t2)
        timers["source"] = timers.get("source", 0.0) + (t4 - t3)
    return MeshState(f=f, u=u_new)


def load_mesh(scn: Scenario) -> tuple[UnstructuredMesh, dict[int, str]]:
    """Parse the scenario mesh and resolve its boundary patch kinds."""
    mesh = parse_msh(scn.mesh_path)
    kinds: dict[int, str] = {}
    for name, kind in scn.patch_kinds:
        kinds[mesh.patch_id(name)] = kind
    present = set(np.unique(mesh.face_patch[mesh.face_patch >= 0]))
    missing = present - set(kinds)
    if missing:
        names = [mesh.patch_names[i] for i in sorted(missing)]
        raise ScenarioError(f"mesh patches without a boundary kind: {names}")
    return mesh, kinds


def run(scn: Scenario, mesh: UnstructuredMesh | None = None,
        kinds: dict[int, str] | None = None):
    """Advance an unstructured scenario to t_end; mirrors the structured driver."""
    from ..structured.beam import apply_sources
    from ..structured.driver import RunReport, RunResult

    if scn.solver not in ("beam_u", "fvs_u"):
        raise ScenarioError(f"not an unstructured solver: {scn.solver!r}")
    if mesh is None:
        mesh, kinds = load_mesh(scn)
    elif kinds is None:
        kinds = {}
    params = scn.params
    u0 = scn.initial_condition(mesh.cell_centroid)
    sigma = None  # sigma masks are a structured-grid feature in the cases
    rho_fn = scn.charge

    lattice = None
    state = None
    if scn.solver == "beam_u":
        lattice = Lattice(dim=3, lam=scn.lam, c=params.c)
        dt = beam_u_time_step(mesh, lattice, scn.cfl)
        state = MeshState(f=kinetic.equilibrium(u0, lattice, params), u=u0.copy())
    else:
        dt = fvs_u_time_step(mesh, params, scn.cfl)
        u = u0.copy()

    report = RunReport(scenario=scn.name, solver=scn.solver,
                       resolution=(mesh.num_cells, 1, 1), dt=dt)
    result = RunResult(report=report, grid=mesh, u=u0)

    mon = scn.monitor
    initial_max = float(np.max(np.abs(u0[..., mon])))
    series_t = [0.0]
    series_max = [initial_max]
    series_min = [float(np.min(u0[..., mon]))]
    vols = mesh.cell_volume[:, None]
    series_sum = [(u0 * vols).sum(axis=0)]

    pending = sorted(set(scn.snapshot_times))
    while pending and pending[0] <= 0.0:
        result.snapshots[pending.pop(0)] = u0.copy()

    t = 0.0
    step = 0
    while scn.t_end - t > 1e-9 * dt:
        remaining = scn.t_end - t
        step_dt = remaining if remaining <= dt * (1 + 1e-9) else dt
        rho_half = None
        if rho_fn is not None:
            rho_half = rho_fn.evaluate(mesh.cell_centroid, t + 0.5 * step_dt)

        if scn.solver == "beam_u":
            state = step_beam_u(mesh, state, lattice, params, scn.policy,
                                step_dt, t, kinds, wave=scn.wave, sigma=sigma,
                                rho_half=rho_half,
                                reconstruction=scn.reconstruction,
                                timers=report.wall)
            u_now = state.u
        else:
            ghost_u = None
            if np.any(mesh.face_neighbor < 0):
                ghost_u = boundary_ghost_states(mesh, u, kinds,
                                                t + 0.5 * step_dt, params,
                                                scn.wave)
            u = step_fvs_u(mesh, u, params, step_dt, ghost_u,
                           reconstruction=scn.reconstruction,
                           timers=report.wall)
            t0 = time.perf_counter()
            u, _ = apply_sources(u, None, step_dt, t, params,
                                 sigma=sigma, rho=rho_half)
            report.wall["source"] = report.wall.get("source", 0.0) \
                + (time.perf_counter() - t0)
            u_now = u

        t += step_dt
        step += 1
        mono = u_now[..., mon]
        series_t.append(t)
        series_max.append(float(np.max(np.abs(mono))))
        series_min.append(float(np.min(mono)))
        series_sum.append((u_now * vols).sum(axis=0))

        if not np.all(np.isfinite(mono)):
            report.status, report.abort_step = "nan", step
            break
        if scn.growth_guard is not None and initial_max > 0 \
                and series_max[-1] > scn.growth_guard * initial_max:
            report.status, report.abort_step = "growth", step
            break

        while pending and t >= pending[0] - 0.5 * dt:
            result.snapshots[pending.pop(0)] = u_now.copy()

    report.steps = step
    report.series["t"] = np.asarray(series_t)
    report.series["max_abs_monitor"] = np.asarray(series_max)
    report.series["min_monitor"] = np.asarray(series_min)
    report.series["sum_state"] = np.asarray(series_sum)
    result.u = u_now.copy() if step > 0 else u0.copy()
    result.t = t
    result.state = state
    return result
