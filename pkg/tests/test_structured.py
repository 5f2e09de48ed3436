"""Structured solvers: exact transport, CTU, FVS, driver behavior."""

import numpy as np
import pytest

from phmbeam import em, kinetic
from phmbeam.em import EY, EZ, BY, BZ, PhmParams, WaveConfig
from phmbeam.kinetic import Lattice, RelaxationPolicy
from phmbeam.scenario import Scenario
from phmbeam.structured import beam, driver, fvs
from phmbeam.structured.grid import (
    FieldState, GridError, StructuredGrid, initial_state,
)
from phmbeam import cases

RNG = np.random.default_rng(42)
P = PhmParams()


def random_state(grid, lattice, seed=0):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(lattice.m,) + grid.dims + (8,))
    return FieldState(f=f, u=kinetic.moments(f))


class TestExactTransport:
    def test_pure_shift_1d(self):
        grid = StructuredGrid((4, 1, 1), (0.25, 1.0, 1.0))
        lat = Lattice(dim=1, lam=1.0, c=1.0)
        f = np.zeros((2, 4, 1, 1, 8))
        f[0, 0, 0, 0, EY] = 1.0  # beam 0 moves +x
        out = beam.transport_et(f, grid, lat, dt=0.25, t=0.0, params=P)
        assert out[0, 1, 0, 0, EY] == 1.0
        assert out[0].sum() == 1.0

    def test_pure_shift_3d_diagonal(self):
        grid = StructuredGrid((3, 3, 3), (1 / 3,) * 3)
        lat = Lattice(dim=3, lam=1.0, c=1.0)
        f = np.zeros((4, 3, 3, 3, 8))
        f[2, 1, 1, 1, BZ] = 1.0  # beam 2 has signs (-1, +1, -1)
        out = beam.transport_et(f, grid, lat, dt=1 / 3, t=0.0, params=P)
        assert out[2, 0, 2, 0, BZ] == 1.0

    def test_cfl_mismatch_rejected(self):
        grid = StructuredGrid((4, 1, 1), (0.25, 1.0, 1.0))
        lat = Lattice(dim=1, lam=1.0, c=1.0)
        with pytest.raises(GridError):
            beam.transport_et(np.zeros((2, 4, 1, 1, 8)), grid, lat,
                              dt=0.2, t=0.0, params=P)

    def test_uniform_state_is_fixed_point(self):
        grid = StructuredGrid((6, 6, 1), (1 / 6, 1 / 6, 1.0))
        lat = Lattice(dim=2, lam=1.5, c=1.0)
        u0 = np.tile(RNG.normal(size=8), (6, 6, 1, 1))
        state = initial_state(grid, lat, P, u0)
        pol = RelaxationPolicy(mode="fixed_omega", omega=1.3)
        for k in range(5):
            state = beam.step_beam(state, grid, lat, P, pol, dt=1 / 9, t=0.0,
                                   transport="et")
        assert np.allclose(state.u, u0, atol=1e-13)


class TestCtu:
    @pytest.mark.parametrize("dim,n", [(2, 6), (3, 4)])
    def test_matches_exact_transport_at_unit_cfl(self, dim, n):
        grid = StructuredGrid(tuple(n if a < dim else 1 for a in range(3)),
                              tuple(1 / n if a < dim else 1.0 for a in range(3)))
        lat = Lattice(dim=dim, lam=1.0, c=1.0)
        dt = 1 / n
        f = np.random.default_rng(dim).normal(size=(4,) + grid.dims + (8,))
        a = beam.transport_et(f, grid, lat, dt, 0.0, P)
        b = beam.transport_ctu(f, grid, lat, dt, 0.0, P)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_ten_full_steps_equivalence(self):
        n = 5
        grid = StructuredGrid((n, n, n), (1 / n,) * 3)
        lat = Lattice(dim=3, lam=2.0, c=1.0)  # above the 3D stability bound
        dt = 1 / (2 * n)
        pol = RelaxationPolicy(mode="fixed_omega", omega=1.7)
        s_et = random_state(grid, lat, seed=3)
        s_ctu = s_et.copy()
        for _ in range(10):
            s_et = beam.step_beam(s_et, grid, lat, P, pol, dt, 0.0, "et")
            s_ctu = beam.step_beam(s_ctu, grid, lat, P, pol, dt, 0.0, "ctu")
        assert np.max(np.abs(s_et.f - s_ctu.f)) < 1e-12
        assert np.max(np.abs(s_et.u - s_ctu.u)) < 1e-12

    def test_uniform_beams_zero_flux(self):
        grid = StructuredGrid((5, 5, 1), (0.2, 0.2, 1.0))
        lat = Lattice(dim=2, lam=2.0, c=1.0)
        f = np.tile(RNG.normal(size=(4, 1, 1, 1, 8)), (1, 5, 5, 1, 1))
        out = beam.transport_ctu(f, grid, lat, dt=0.05, t=0.0, params=P)
        assert np.allclose(out, f, atol=1e-14)

    def test_cfl_above_one_rejected(self):
        grid = StructuredGrid((5, 5, 1), (0.2, 0.2, 1.0))
        lat = Lattice(dim=2, lam=2.0, c=1.0)
        with pytest.raises(GridError):
            beam.transport_ctu(np.zeros((4, 5, 5, 1, 8)), grid, lat,
                               dt=0.2, t=0.0, params=P)

    def test_fractional_cfl_matches_donor_cell(self):
        # 1D CTU at CFL nu is plain upwind: f_i <- (1-nu) f_i + nu f_{i-s}
        n = 8
        nu = 0.5
        grid = StructuredGrid((n, 1, 1), (1 / n, 1.0, 1.0))
        lat = Lattice(dim=1, lam=1.0, c=1.0)
        f = np.zeros((2, n, 1, 1, 8))
        prof = np.sin(2 * np.pi * np.arange(n) / n)
        f[0, :, 0, 0, EY] = prof   # beam 0 moves +x
        f[1, :, 0, 0, BZ] = prof   # beam 1 moves -x
        out = beam.transport_ctu(f, grid, lat, dt=nu / n, t=0.0, params=P)
        assert np.allclose(out[0, :, 0, 0, EY],
                           (1 - nu) * prof + nu * np.roll(prof, 1), atol=1e-14)
        assert np.allclose(out[1, :, 0, 0, BZ],
                           (1 - nu) * prof + nu * np.roll(prof, -1), atol=1e-14)


class TestConservation:
    @pytest.mark.parametrize("transport", ["et", "ctu"])
    def test_periodic_sum_invariant(self, transport):
        n = 8
        grid = StructuredGrid((n, n, 1), (1 / n, 1 / n, 1.0))
        lat = Lattice(dim=2, lam=1.5, c=1.0)
        state = random_state(grid, lat, seed=11)
        total0 = state.u.reshape(-1, 8).sum(axis=0)
        pol = RelaxationPolicy(mode="fixed_omega", omega=2.0)
        dt = 1 / (1.5 * n) if transport == "et" else 0.7 / (1.5 * n)
        for _ in range(30):
            state = beam.step_beam(state, grid, lat, P, pol, dt, 0.0, transport)
        total = state.u.reshape(-1, 8).sum(axis=0)
        assert np.max(np.abs(total - total0)) < 1e-11 * max(
            1.0, np.abs(total0).max())

    def test_translation_equivariance(self):
        n = 9
        grid = StructuredGrid((n, 1, 1), (1 / n, 1.0, 1.0))
        lat = Lattice(dim=1, lam=1.0, c=1.0)
        pol = RelaxationPolicy(mode="fixed_omega", omega=1.5)
        state = random_state(grid, lat, seed=5)
        shifted = FieldState(f=np.roll(state.f, 1, axis=1),
                             u=np.roll(state.u, 1, axis=0))
        a = beam.step_beam(shifted, grid, lat, P, pol, 1 / n, 0.0, "et")
        b = beam.step_beam(state, grid, lat, P, pol, 1 / n, 0.0, "et")
        assert np.allclose(a.u, np.roll(b.u, 1, axis=0), atol=1e-14)


class TestFvs:
    def test_1d_riemann_flux_against_dense_oracle(self):
        p = PhmParams(chi=1.5, gamma=0.5)
        a1 = em.jacobian(1, p)
        w, v = np.linalg.eig(a1)
        abs_a1 = (v @ np.diag(np.abs(w)) @ np.linalg.inv(v)).real
        u_l = np.zeros(8)
        u_l[EY] = 1.0
        u_r = np.zeros(8)
        expected = 0.5 * a1 @ (u_l + u_r) - 0.5 * abs_a1 @ (u_r - u_l)
        got = fvs.interface_flux_1d(u_l, u_r, p)
        assert np.allclose(got, expected, atol=1e-10)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            u_l, u_r = rng.normal(size=8), rng.normal(size=8)
            expected = 0.5 * a1 @ (u_l + u_r) - 0.5 * abs_a1 @ (u_r - u_l)
            assert np.allclose(fvs.interface_flux_1d(u_l, u_r, p), expected,
                               atol=1e-10)

    def test_uniform_field_zero_update(self):
        n = 6
        grid = StructuredGrid((n, n, 1), (1 / n, 1 / n, 1.0))
        u = np.tile(RNG.normal(size=8), (n, n, 1, 1))
        out = fvs.step_fvs(u, grid, P, dt=0.4 / n, t=0.0)
        assert np.allclose(out, u, atol=1e-13)

    def test_uniform_field_zero_update_linear_reconstruction(self):
        n = 6
        grid = StructuredGrid((n, n, 1), (1 / n, 1 / n, 1.0))
        u = np.tile(RNG.normal(size=8), (n, n, 1, 1))
        out = fvs.step_fvs(u, grid, P, dt=0.4 / n, t=0.0,
                           reconstruction="linear", time_scheme="midpoint")
        assert np.allclose(out, u, atol=1e-13)

    def test_cfl_warning_and_strict(self):
        n = 10
        grid = StructuredGrid((n, n, 1), (1 / n, 1 / n, 1.0))
        with pytest.warns(fvs.CflWarning):
            fvs.check_cfl(grid, P, dt=1.0 / n)
        with pytest.raises(GridError):
            fvs.check_cfl(grid, P, dt=1.0 / n, strict=True)

    def test_structured_matches_rotated_flux(self):
        # axis-2 fluxes equal the rotation identity applied to axis-1 matrices
        p = PhmParams(chi=1.2, gamma=0.8)
        ap, am = fvs._split_matrices(1, p)
        es = em.eigensystem_a1(p)
        t8 = em.rotation8((0.0, 1.0, 0.0))
        assert np.allclose(ap, t8.T @ es.a1_plus @ t8, atol=1e-12)
        assert np.allclose(ap + am, em.jacobian(2, p), atol=1e-12)


class TestDriverPlaneWave:
    def run_error(self, dim, n, omega, solver="beam_et"):
        scn = cases.scenario_plane_wave(dim, n, omega=omega, solver=solver)
        res = driver.run(scn)
        grid = res.grid
        exact = em.analytic_plane_wave(scn.wave, grid.cell_centers(), res.t,
                                       scn.params)
        err = np.mean(np.abs(res.u[..., EZ] - exact[..., EZ]))
        err += np.mean(np.abs(res.u[..., BY] - exact[..., BY]))
        return err / 2

    def test_second_order_ratio_1d(self):
        e40 = self.run_error(1, 40, 2.0)
        e80 = self.run_error(1, 80, 2.0)
        assert 3.4 < e40 / e80 < 4.6

    def test_first_order_ratio_1d(self):
        e40 = self.run_error(1, 40, 1.0)
        e80 = self.run_error(1, 80, 1.0)
        assert 1.6 < e40 / e80 < 2.4

    def test_lam_one_omega_two_is_exact_1d(self):
        err = self.run_error(1, 32, 2.0)  # default lam keeps both beams busy
        scn = cases.scenario_plane_wave(1, 32, omega=2.0, lam=1.0)
        res = driver.run(scn)
        exact = em.analytic_plane_wave(scn.wave, res.grid.cell_centers(), res.t,
                                       scn.params)
        exact_err = np.mean(np.abs(res.u[..., EZ] - exact[..., EZ]))
        assert exact_err < 1e-12 < err

    def test_ctu_second_order_2d(self):
        e = {n: self.run_error(2, n, 2.0, solver="beam_ctu") for n in (16, 32)}
        assert 3.0 < e[16] / e[32] < 5.0

    def test_t_end_zero_echoes_ic(self):
        import dataclasses
        base = cases.scenario_plane_wave(1, 16)
        scn = dataclasses.replace(base, t_end=0.0, snapshot_times=(0.0,))
        res = driver.run(scn)
        assert res.report.steps == 0
        assert 0.0 in res.snapshots
        ic = em.analytic_plane_wave(base.wave, res.grid.cell_centers(), 0.0, P)
        assert np.allclose(res.u, ic)


class TestDissipationLaw:
    def measured_decay(self, lam, omega, n=400, t_end=2.0):
        """Fit the exponential decay rate of the Ey amplitude of a 1D wave."""
        grid = StructuredGrid((n, 1, 1), (1.0 / n, 1.0, 1.0))
        lat = Lattice(dim=1, lam=lam, c=1.0)
        x = grid.cell_centers()
        k_w = 2 * np.pi
        u0 = np.zeros((n, 1, 1, 8))
        u0[..., EY] = np.cos(k_w * x[..., 0])
        u0[..., BZ] = np.cos(k_w * x[..., 0])  # right-moving pair (c = 1)
        state = initial_state(grid, lat, P, u0)
        pol = RelaxationPolicy(mode="fixed_omega", omega=omega)
        dt = 1.0 / (n * lam)
        steps = int(round(t_end / dt))
        times, amps = [], []
        for s in range(steps):
            state = beam.step_beam(state, grid, lat, P, pol, dt, s * dt, "et")
            if s % 25 == 0:
                times.append((s + 1) * dt)
                amps.append(np.sqrt(2 * np.mean(state.u[..., EY] ** 2)))
        slope, _ = np.polyfit(times, np.log(amps), 1)
        return -slope

    @pytest.mark.parametrize("omega", [1.0, 1.5])
    def test_decay_matches_effective_tau(self, omega):
        lam, n, k_w = 2.0, 400, 2 * np.pi
        dt = 1.0 / (n * lam)
        kappa = kinetic.tau_effective(omega, dt) * (lam**2 - 1) * k_w**2
        measured = self.measured_decay(lam, omega, n=n)
        assert measured == pytest.approx(kappa, rel=0.15)

    def test_lam_one_omega_two_nearly_lossless(self):
        lam2_rate = self.measured_decay(2.0, 1.0, n=200, t_end=1.0)
        lossless = self.measured_decay(1.0, 2.0, n=200, t_end=1.0)
        assert abs(lossless) <= 0.05 * lam2_rate


class TestSourceUpdate:
    def test_cn_conduction_closed_form(self):
        u = np.zeros((2, 1, 1, 8))
        u[..., EZ] = 4.0
        sigma = np.full((2, 1, 1), 3.0)
        out, _ = beam.apply_sources(u, None, dt=0.5, t=0.0, params=P, sigma=sigma)
        s = 3.0 * 0.5
        assert np.allclose(out[..., EZ], 4.0 * (1 - s / 2) / (1 + s / 2))

    def test_stiff_sigma_stays_bounded(self):
        u = np.zeros((1, 1, 1, 8))
        u[..., EZ] = 1.0
        sigma = np.full((1, 1, 1), 2.0e4)
        out, _ = beam.apply_sources(u, None, dt=0.0125, t=0.0, params=P,
                                    sigma=sigma)
        assert np.abs(out[..., EZ]).max() <= 1.0

    def test_charge_injection_feeds_phi_and_beams(self):
        grid = StructuredGrid((4, 4, 1), (0.25, 0.25, 1.0))
        lat = Lattice(dim=2, lam=1.0, c=1.0)
        u = np.zeros((4, 4, 1, 8))
        f = kinetic.equilibrium(u, lat, P)
        rho = np.ones((4, 4, 1))
        out, f2 = beam.apply_sources(u, f, dt=0.1, t=0.0, params=P,
                                     lattice=lat, rho=rho)
        assert np.allclose(out[..., em.PHI], 0.1)
        assert np.allclose(kinetic.moments(f2), out, atol=1e-15)
