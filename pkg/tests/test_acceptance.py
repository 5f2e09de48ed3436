"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; the sphere-scattering criterion is marked slow (tens of minutes) and
can be excluded with ``-m "not slow"``.
"""

import dataclasses
import time
import warnings

import numpy as np
import pytest

from phmbeam import cases, diagnostics, em, kinetic
from phmbeam.diagnostics import ConvergenceSeries, convergence_order
from phmbeam.em import EX, EY, EZ, BY, BZ, PhmParams
from phmbeam.kinetic import Lattice, RelaxationPolicy
from phmbeam.runner import run_scenario, wave_error
from phmbeam.scenario import ScenarioError
from phmbeam.structured import beam, driver
from phmbeam.structured.grid import FieldState, StructuredGrid, initial_state
from phmbeam.unstructured import generate, solver as usolver


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
          + (f"  [{detail}]" if detail else ""))
    assert ok, f"{name}: {detail}"


def plane_wave_slope(dim, ns, omega):
    errs = []
    for n in ns:
        scn = cases.scenario_plane_wave(dim, n, omega=omega)
        res = run_scenario(scn)
        assert res.report.status == "ok"
        errs.append(wave_error(res, scn))
    return convergence_order(ConvergenceSeries(tuple(ns), tuple(errs))), errs


class TestConvergenceOrder:
    """Plane wave: second order at omega=2, first order at omega=1."""

    def test_convergence_order(self):
        t0 = time.time()
        s1_2, _ = plane_wave_slope(1, (20, 40, 80, 160, 320), 2.0)
        s1_1, _ = plane_wave_slope(1, (20, 40, 80, 160, 320), 1.0)
        s2_2, _ = plane_wave_slope(2, (20, 40, 80, 160), 2.0)
        s2_1, _ = plane_wave_slope(2, (20, 40, 80, 160), 1.0)
        errs3 = []
        for n in (20, 40, 80):
            scn = cases.scenario_plane_wave(3, n, omega=2.0)
            errs3.append(wave_error(run_scenario(scn), scn))
        ratios3 = [errs3[i] / errs3[i + 1] for i in range(2)]
        wall = time.time() - t0
        detail = (f"1D slopes {s1_2:.2f}/{s1_1:.2f}, 2D {s2_2:.2f}/{s2_1:.2f}, "
                  f"3D ratios {ratios3[0]:.2f},{ratios3[1]:.2f}, {wall:.0f}s")
        ok = (1.8 <= s1_2 <= 2.2 and 0.85 <= s1_1 <= 1.15
              and 1.8 <= s2_2 <= 2.2 and 0.85 <= s2_1 <= 1.15
              and all(3.4 <= r <= 4.6 for r in ratios3)
              and wall < 300.0)
        report("convergence-order", ok, detail)


class TestEtCtuEquivalence:
    """Beam-CTU telescopes to the exact shift at unit beam CFL."""

    def test_et_ctu_equivalence(self):
        worst = 0.0
        for dim, n, lam in ((2, 8, 1.5), (3, 5, 2.0)):
            dims = tuple(n if a < dim else 1 for a in range(3))
            spacing = tuple(1 / n if a < dim else 1.0 for a in range(3))
            grid = StructuredGrid(dims, spacing)
            lat = Lattice(dim=dim, lam=lam, c=1.0)
            dt = 1 / (n * lam)
            rng = np.random.default_rng(dim)
            f0 = rng.normal(size=(4,) + dims + (8,))
            pol = RelaxationPolicy(mode="fixed_omega", omega=1.7)
            s_et = FieldState(f=f0.copy(), u=kinetic.moments(f0))
            s_ctu = FieldState(f=f0.copy(), u=kinetic.moments(f0))
            for _ in range(10):
                s_et = beam.step_beam(s_et, grid, lat, PhmParams(), pol, dt,
                                      0.0, "et")
                s_ctu = beam.step_beam(s_ctu, grid, lat, PhmParams(), pol, dt,
                                       0.0, "ctu")
            worst = max(worst,
                        float(np.max(np.abs(s_et.f - s_ctu.f))),
                        float(np.max(np.abs(s_et.u - s_ctu.u))))
        report("et-ctu-equivalence", worst <= 1e-12, f"max diff {worst:.2e}")


class TestMomentConservation:
    """Equilibrium compatibility and collision/transport conservation."""

    def test_moment_suite(self):
        p = PhmParams(chi=1.3, gamma=0.8)
        worst_eq = worst_flux = worst_col = 0.0
        for dim in (1, 2, 3):
            lat = Lattice(dim=dim, lam=1.7, c=1.0)
            rng = np.random.default_rng(dim)
            u = rng.normal(size=(10_000, 8))
            g = kinetic.equilibrium(u, lat, p)
            worst_eq = max(worst_eq,
                           float(np.max(np.abs(kinetic.moments(g) - u))))
            fm = kinetic.flux_moments(g, lat)
            f_ref = np.stack([em.flux(u, j, p) for j in (1, 2, 3)], axis=-1)
            f_ref[..., dim:] = 0.0
            worst_flux = max(worst_flux, float(np.max(np.abs(fm - f_ref))))
            f = rng.normal(size=(lat.m, 10_000, 8))
            uu = kinetic.moments(f)
            for omega in (0.37, 1.0, 2.0):
                out = kinetic.collide(f, uu, omega, lat, p)
                worst_col = max(worst_col,
                                float(np.max(np.abs(kinetic.moments(out) - uu))))
        ok = worst_eq < 1e-13 and worst_flux < 1e-12 and worst_col < 1e-13
        report("moment-suite", ok,
               f"eq {worst_eq:.1e}, flux {worst_flux:.1e}, collide {worst_col:.1e}")

    def test_global_conservation_100_steps(self):
        results = {}
        # structured kinetic + FVS on a periodic 2D grid
        n = 16
        grid = StructuredGrid((n, n, 1), (1 / n, 1 / n, 1.0))
        lat = Lattice(dim=2, lam=1.5, c=1.0)
        pol = RelaxationPolicy(mode="fixed_omega", omega=2.0)
        rng = np.random.default_rng(7)
        f0 = rng.normal(size=(4, n, n, 1, 8))
        for name, transport in (("beam_et", "et"), ("beam_ctu", "ctu")):
            st = FieldState(f=f0.copy(), u=kinetic.moments(f0))
            total0 = st.u.reshape(-1, 8).sum(axis=0)
            dt = 1 / (n * 1.5) if transport == "et" else 0.8 / (n * 1.5)
            for _ in range(100):
                st = beam.step_beam(st, grid, lat, PhmParams(), pol, dt, 0.0,
                                    transport)
            drift = np.abs(st.u.reshape(-1, 8).sum(axis=0) - total0)
            results[name] = float(np.max(drift / np.maximum(np.abs(total0), 1)))
        from phmbeam.structured import fvs
        u = rng.normal(size=(n, n, 1, 8))
        total0 = u.reshape(-1, 8).sum(axis=0)
        for _ in range(100):
            u = fvs.step_fvs(u, grid, PhmParams(), 0.4 / n, 0.0)
        results["fvs"] = float(np.max(
            np.abs(u.reshape(-1, 8).sum(axis=0) - total0)
            / np.maximum(np.abs(total0), 1)))
        # unstructured kinetic on a periodic tet box
        mesh = generate.tet_box(3, 3, 3).apply_periodic(
            [("xlo", "xhi", (1, 0, 0)), ("ylo", "yhi", (0, 1, 0)),
             ("zlo", "zhi", (0, 0, 1))])
        lat3 = Lattice(dim=3, lam=2.0, c=1.0)
        fm = rng.normal(size=(4, mesh.num_cells, 8))
        stm = usolver.MeshState(f=fm, u=kinetic.moments(fm))
        vols = mesh.cell_volume[:, None]
        total0 = (stm.u * vols).sum(axis=0)
        dtm = usolver.beam_u_time_step(mesh, lat3, 0.5)
        for _ in range(100):
            stm = usolver.step_beam_u(mesh, stm, lat3, PhmParams(), pol, dtm,
                                      0.0, {})
        results["beam_u"] = float(np.max(
            np.abs((stm.u * vols).sum(axis=0) - total0)
            / np.maximum(np.abs(total0), 1)))
        worst = max(results.values())
        report("global-conservation", worst < 1e-11,
               ", ".join(f"{k} {v:.1e}" for k, v in results.items()))


class TestFvsBuildingBlocks:
    """Eigsystem identities and the rotational flux identity."""

    def test_fvs_building_blocks(self):
        rng = np.random.default_rng(2024)
        worst_spec = worst_split = worst_rot = 0.0
        for _ in range(50):
            c, chi, gam = rng.uniform(0.5, 3.0, size=3)
            p = PhmParams(c=c, eps0=1 / c**2, mu0=1.0, chi=chi, gamma=gam)
            a1 = em.jacobian(1, p)
            es = em.eigensystem_a1(p)
            ref = np.sort(np.linalg.eigvals(a1).real)
            worst_spec = max(worst_spec,
                             float(np.max(np.abs(np.sort(es.lambdas) - ref))))
            worst_split = max(
                worst_split,
                float(np.max(np.abs(es.a1_plus + es.a1_minus - a1))),
                float(np.max(np.abs(es.a1_plus - es.a1_minus - es.abs_a1))))
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            u = rng.normal(size=8)
            via_rot = em.rotate_to_global(
                em.flux(em.rotate_to_local(u, n), 1, p), n)
            worst_rot = max(worst_rot,
                            float(np.max(np.abs(em.flux_normal(u, n, p)
                                                - via_rot))))
        ok = worst_spec < 1e-10 and worst_split < 1e-10 and worst_rot < 1e-10
        report("fvs-building-blocks", ok,
               f"spectrum {worst_spec:.1e}, split {worst_split:.1e}, "
               f"rotation {worst_rot:.1e}")


class TestMultidimensionalStability:
    """Square pulse at N=100: kinetic stable at CFL 1, FVS is not."""

    def test_multidimensional_stability(self):
        t0 = time.time()
        scn = cases.scenario_rect_pulse(n=100, solver="beam_et", cfl=1.0)
        res = run_scenario(scn)
        et_ok = (res.report.status == "ok"
                 and res.report.series["max_abs_monitor"].max() <= 1.05)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res_unstable = run_scenario(cases.scenario_rect_pulse(
                n=100, solver="fvs", cfl=1.0))
            res_stable = run_scenario(cases.scenario_rect_pulse(
                n=100, solver="fvs", cfl=0.5))
        fvs_trips = res_unstable.report.status in ("growth", "nan")
        fvs_ok = res_stable.report.status == "ok"
        wall = time.time() - t0
        detail = (f"beam max {res.report.series['max_abs_monitor'].max():.3f}, "
                  f"fvs@1.0 {res_unstable.report.status} at step "
                  f"{res_unstable.report.abort_step}, fvs@0.5 "
                  f"{res_stable.report.status}, {wall:.0f}s")
        report("multidimensional-stability",
               et_ok and fvs_trips and fvs_ok and wall < 120.0, detail)


class TestOscillationSuppression:
    """Detector-switched collision beats FDTD ringing on the pulse."""

    def test_oscillation_suppression(self):
        def overshoot(scn):
            res = run_scenario(scn)
            assert res.report.status == "ok"
            s = res.report.series
            return diagnostics.overshoot_metric(
                s["max_abs_monitor"], s["min_monitor"]).overshoot

        fdtd_over = overshoot(cases.scenario_rect_pulse(n=100, solver="fdtd",
                                                        cfl=0.7))
        det_over = overshoot(cases.scenario_rect_pulse(n=100,
                                                       solver="beam_et"))
        first_over = overshoot(cases.scenario_rect_pulse(
            n=100, solver="beam_et", omega_mode="1.0"))
        ok = (fdtd_over > 0.01 and det_over < fdtd_over / 5.0
              and first_over <= 1e-3)
        report("oscillation-suppression", ok,
               f"fdtd {fdtd_over:.4f}, detector {det_over:.5f}, "
               f"omega=1 {first_over:.5f}")


class TestDissipationLaw:
    """Amplitude decay rate kappa = tau_eff (lam^2-1) c^2 k^2."""

    @staticmethod
    def measured_decay(lam, omega, n=400, t_end=2.0):
        grid = StructuredGrid((n, 1, 1), (1.0 / n, 1.0, 1.0))
        lat = Lattice(dim=1, lam=lam, c=1.0)
        x = grid.cell_centers()[..., 0]
        u0 = np.zeros((n, 1, 1, 8))
        u0[..., EY] = np.cos(2 * np.pi * x)
        u0[..., BZ] = np.cos(2 * np.pi * x)
        state = initial_state(grid, lat, PhmParams(), u0)
        pol = RelaxationPolicy(mode="fixed_omega", omega=omega)
        dt = 1.0 / (n * lam)
        steps = int(round(t_end / dt))
        times, amps = [], []
        for s in range(steps):
            state = beam.step_beam(state, grid, lat, PhmParams(), pol, dt,
                                   s * dt, "et")
            if s % 25 == 0:
                times.append((s + 1) * dt)
                amps.append(np.sqrt(2 * np.mean(state.u[..., EY] ** 2)))
        slope, _ = np.polyfit(times, np.log(amps), 1)
        return -slope

    def test_dissipation_law(self):
        lam, n, k_w = 2.0, 400, 2 * np.pi
        dt = 1.0 / (n * lam)
        rel_errs = []
        for omega in (1.0, 1.5):
            kappa = kinetic.tau_effective(omega, dt) * (lam**2 - 1) * k_w**2
            measured = self.measured_decay(lam, omega)
            rel_errs.append(abs(measured - kappa) / kappa)
        baseline = self.measured_decay(2.0, 1.0, n=400, t_end=1.0)
        lossless = self.measured_decay(1.0, 2.0, n=400, t_end=1.0)
        ok = all(r <= 0.15 for r in rel_errs) and abs(lossless) <= 0.05 * baseline
        report("dissipation-law", ok,
               f"rel errors {rel_errs[0]:.3f}/{rel_errs[1]:.3f}, "
               f"lossless/baseline {abs(lossless) / baseline:.2e}")


class TestChargeConservation:
    """Injected charge with J = 0: the PHM cleaning path carries it."""

    def test_charge_conservation(self):
        scn = cases.scenario_charge_test(n=200)
        res = run_scenario(scn)
        assert res.report.status == "ok"
        u = res.u
        rho0 = scn.charge.rho0

        nonzero = float(np.abs(u[..., EX]).max()) > 1e-3 * rho0
        # monopole pattern: dominantly radial E with quadrant symmetry
        g = res.grid
        c = g.cell_centers()[..., :2] - 0.5
        r = np.hypot(c[..., 0], c[..., 1])
        ring = (r > 0.1) & (r < 0.3)
        er = (u[..., EX] * c[..., 0] + u[..., EY] * c[..., 1]) \
            / np.maximum(r, 1e-30)
        emag = np.hypot(u[..., EX], u[..., EY])
        radial_frac = float(er[ring].sum() / emag[ring].sum())
        ex = u[:, :, 0, EX]
        asym = float(np.abs(ex + ex[::-1, :]).max()
                     / max(np.abs(ex).max(), 1e-300))
        # phi-inconsistency norm stays in a factor-2 band over t in [1, 5]
        ps = res.report.series["phi_step"]
        norms = np.sqrt(ps[:, 2] * g.cell_volume) / (scn.params.chi * ps[:, 1])
        norms /= rho0 / scn.params.eps0
        window = (ps[:, 0] >= 1.0) & (ps[:, 0] <= 5.0)
        band = float(norms[window].max() / norms[window].min())
        # chi = 0 is rejected at scenario construction
        try:
            cases.scenario_charge_test(n=200, chi=0.0)
            rejected = False
        except ScenarioError:
            rejected = True
        ok = (nonzero and radial_frac > 0.9 and asym <= 0.10
              and band <= 2.0 and rejected)
        report("charge-conservation", ok,
               f"max|Ex|/rho0 {np.abs(u[..., EX]).max() / rho0:.2e}, "
               f"radial {radial_frac:.3f}, asym {asym:.1e}, band {band:.2f}, "
               f"chi=0 rejected {rejected}")


class TestAntennaSuite:
    """Staircase antenna: dipole signature, induced B ring, clean control."""

    def test_antenna_suite(self):
        scn = cases.scenario_antenna(n=80, t_end=0.05, solver="fvs")
        res = run_scenario(scn)
        assert res.report.status == "ok"
        u, g = res.u, res.grid
        c = g.cell_centers()
        ey = u[..., EY]
        asym = float(np.abs(ey + ey[:, :, ::-1]).max()
                     / max(np.abs(ey).max(), 1e-300))
        r = np.hypot(c[..., 0] - 0.5, c[..., 1] - 0.5)
        zmid = np.argmin(np.abs(c[0, 0, :, 2] - 0.5))
        ring = (r[:, :, zmid] > 0.03) & (r[:, :, zmid] < 0.1)
        by = np.abs(u[:, :, zmid, BY])
        ring_max = float(by[ring].max())
        far_max = float(by[r[:, :, zmid] > 0.45].max())

        ctrl = cases.scenario_antenna(n=80, sigma=0.0, t_end=0.05,
                                      solver="fvs")
        res0 = run_scenario(ctrl)
        err = wave_error(res0, ctrl, comps=(EZ,))

        # the kinetic run shows the same qualitative dipole: opposite-sign
        # Ey above and below the antenna (the chiral D3Q4 lattice precludes
        # exact mirror symmetry at desk resolution, so the symmetric-part
        # bound is asserted on the mirror-preserving FVS run above)
        kin = run_scenario(cases.scenario_antenna(n=80, t_end=0.05,
                                                  solver="beam_et"))
        eyk = kin.u[..., EY]
        r2 = (c[..., 0] - 0.5) ** 2 + (c[..., 1] - 0.5) ** 2
        upper = (np.abs(c[..., 2] - 0.65) < 0.02) & (r2 < 0.03**2)
        lower = (np.abs(c[..., 2] - 0.35) < 0.02) & (r2 < 0.03**2)
        dipole = float(eyk[upper].mean()) * float(eyk[lower].mean()) < 0

        ok = (asym <= 0.20 and ring_max > 0.05 and ring_max > 10 * far_max
              and err < 0.02 and dipole)
        report("antenna-suite", ok,
               f"Ey asym {asym:.2e}, ring |By| {ring_max:.3f} vs far "
               f"{far_max:.4f}, control err {err:.4f}, kinetic dipole {dipole}")


class TestDeterminism:
    """Identical configs give byte-identical data CSVs."""

    def test_determinism(self, tmp_path):
        from phmbeam import cli
        outs = []
        for sub, threads in (("a", "1"), ("b", "4")):
            out = tmp_path / sub
            rc = cli.main(["run", "--case", "rect_pulse", "--n", "100",
                           "--solver", "beam_et", "--threads", threads,
                           "--out-dir", str(out)])
            assert rc == 0
            outs.append(out)
        same = True
        names = sorted(p.name for p in outs[0].glob("*.csv"))
        for name in names:
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                same = False
        report("determinism", same and len(names) > 0,
               f"{len(names)} CSVs compared across thread counts")


@pytest.mark.slow
class TestSphereScattering:
    """Cross-solver agreement and forward dominance on the coarse sphere."""

    def test_sphere_scattering(self, tmp_path):
        mesh_path = tmp_path / "sphere.msh"
        generate.write_sphere_msh(mesh_path, n_surf=8, n_layers=6)
        from phmbeam.unstructured.mesh import parse_msh
        mesh = parse_msh(mesh_path)
        circles = {}
        energies = {}
        for sol in ("beam_u", "fvs_u"):
            scn = cases.scenario_sphere(str(mesh_path), solver=sol)
            kinds = {mesh.patch_id(n): k for n, k in scn.patch_kinds}
            res = usolver.run(scn, mesh=mesh, kinds=kinds)
            assert res.report.status == "ok", sol
            circ = scn.circles[0]
            circles[sol] = diagnostics.sample_mesh(res.u, mesh, circ.points(),
                                                   (EZ,))[:, 0]
            incident = em.analytic_plane_wave(scn.wave, mesh.cell_centroid,
                                              res.t, scn.params)
            scat = res.u - incident
            dens = (scat[:, 0:3] ** 2).sum(axis=1) \
                + (scat[:, 3:6] ** 2).sum(axis=1)
            w = dens * mesh.cell_volume
            energies[sol] = (float(w[mesh.cell_centroid[:, 0] > 0].sum()),
                             float(w[mesh.cell_centroid[:, 0] < 0].sum()))
        rel = float(np.linalg.norm(circles["beam_u"] - circles["fvs_u"])
                    / np.linalg.norm(circles["fvs_u"]))
        forward = all(f > b for f, b in energies.values())
        report("sphere-scattering", rel <= 0.10 and forward,
               f"circle rel-L2 {rel:.3f}, fwd/bwd beam "
               f"{energies['beam_u'][0]:.2f}/{energies['beam_u'][1]:.2f}, "
               f"fvs {energies['fvs_u'][0]:.2f}/{energies['fvs_u'][1]:.2f}")
