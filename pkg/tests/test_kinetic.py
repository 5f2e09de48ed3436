"""Vector-BGK lattice, equilibrium, collision and detector tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phmbeam import em, kinetic
from phmbeam.em import EY, EZ, BZ, PhmParams
from phmbeam.kinetic import KineticError, Lattice, RelaxationPolicy

RNG = np.random.default_rng(7)


class TestLattice:
    def test_3d_velocity_pattern(self):
        lat = Lattice(dim=3, lam=1.5, c=2.0)
        expected = 3.0 * np.array(
            [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
        assert np.array_equal(lat.velocities, expected)

    def test_2d_drops_third_component(self):
        lat = Lattice(dim=2, lam=1.0, c=1.0)
        assert np.array_equal(lat.velocities[:, 2], np.zeros(4))
        assert np.array_equal(lat.velocities[:, :2],
                              [[1, 1], [1, -1], [-1, 1], [-1, -1]])

    def test_1d_two_beams(self):
        lat = Lattice(dim=1, lam=2.0, c=1.0)
        assert lat.m == 2
        assert np.array_equal(lat.velocities[:, 0], [2.0, -2.0])

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_zero_mean_and_isotropic_second_moment(self, dim):
        lat = Lattice(dim=dim, lam=1.7, c=1.3)
        v = lat.velocities
        assert np.allclose(v.sum(axis=0), 0.0)
        second = np.einsum("ki,kj->ij", v, v)
        lam2c2 = (1.7 * 1.3) ** 2
        active = np.diag([1.0] * dim + [0.0] * (3 - dim))
        # m * lam^2 c^2 / dim' with the degenerate lattice: every active
        # diagonal entry equals m * lam^2 c^2 / (m/2) ... = 4 lam^2 c^2 in 3D
        expected = lat.m * lam2c2 * active if dim > 1 else 2 * lam2c2 * active
        assert np.allclose(second, expected)

    def test_subcharacteristic_guard(self):
        with pytest.raises(KineticError):
            Lattice(dim=2, lam=0.9, c=1.0)


class TestEquilibrium:
    def test_1d_polarized_values(self):
        # g_{Ey,1} = (Ey + c Bz / lam)/2 and g_{Ey,2} = (Ey - c Bz / lam)/2
        lat = Lattice(dim=1, lam=1.0, c=1.0)
        u = np.zeros(8)
        u[EY], u[BZ] = 1.0, -1.0
        g = kinetic.equilibrium(u, lat, PhmParams())
        assert g[0, EY] == pytest.approx(0.0)
        assert g[1, EY] == pytest.approx(1.0)
        # the Bz rows from the general formula (the minus-beam flips the sign)
        assert g[0, BZ] == pytest.approx(0.5 * (-1.0 + 1.0))
        assert g[1, BZ] == pytest.approx(0.5 * (-1.0 - 1.0))

    def test_zero_state(self):
        lat = Lattice(dim=3, lam=2.0, c=1.0)
        assert np.all(kinetic.equilibrium(np.zeros(8), lat, PhmParams()) == 0)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_compatibility_constraints(self, dim):
        # brute-force moment sums against the assembled flux tensor
        lat = Lattice(dim=dim, lam=2.0, c=1.0)
        p = PhmParams(chi=1.2, gamma=0.8)
        u = RNG.normal(size=8)
        g = kinetic.equilibrium(u, lat, p)
        assert np.allclose(kinetic.moments(g), u, atol=1e-14)
        f_tensor = np.stack([em.flux(u, j, p) for j in (1, 2, 3)], axis=-1)
        active = dim
        got = kinetic.flux_moments(g, lat)
        assert np.allclose(got[:, :active], f_tensor[:, :active], atol=1e-13)
        assert np.allclose(got[:, active:], 0.0, atol=1e-13)

    def test_single_beam_moments(self):
        lat = Lattice(dim=3, lam=1.0, c=1.0)
        f = np.zeros((4, 8))
        f[0, EY] = 1.0
        assert np.allclose(kinetic.moments(f), f[0])
        fm = kinetic.flux_moments(f, lat)
        assert np.allclose(fm[EY], lat.velocities[0])


class TestCollision:
    def setup_method(self):
        self.lat = Lattice(dim=2, lam=1.5, c=1.0)
        self.p = PhmParams()

    def test_omega_one_projects_to_equilibrium(self):
        f = RNG.normal(size=(4, 8))
        u = kinetic.moments(f)
        out = kinetic.collide(f, u, 1.0, self.lat, self.p)
        assert np.allclose(out, kinetic.equilibrium(u, self.lat, self.p))

    def test_omega_two_over_relaxes(self):
        f = RNG.normal(size=(4, 8))
        u = kinetic.moments(f)
        g = kinetic.equilibrium(u, self.lat, self.p)
        out = kinetic.collide(f, u, 2.0, self.lat, self.p)
        assert np.allclose(out, 2 * g - f)

    def test_equilibrium_is_fixed_point(self):
        u = RNG.normal(size=8)
        g = kinetic.equilibrium(u, self.lat, self.p)
        out = kinetic.collide(g, u, 0.5, self.lat, self.p)
        assert np.allclose(out, g, atol=1e-14)

    def test_omega_bounds(self):
        f = np.zeros((4, 8))
        for bad in (0.0, -1.0, 2.0001):
            with pytest.raises(KineticError):
                kinetic.collide(f, np.zeros(8), bad, self.lat, self.p)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 2.0))
    def test_moment_conservation(self, seed, omega):
        rng = np.random.default_rng(seed)
        f = rng.normal(size=(4, 8))
        u = kinetic.moments(f)
        out = kinetic.collide(f, u, omega, self.lat, self.p)
        assert np.allclose(kinetic.moments(out), u, atol=1e-13)

    def test_per_cell_omega_field(self):
        f = RNG.normal(size=(4, 3, 2, 1, 8))
        u = kinetic.moments(f)
        omega = np.full((3, 2, 1), 1.0)
        omega[0, 0, 0] = 2.0
        out = kinetic.collide(f, u, omega, self.lat, self.p)
        g = kinetic.equilibrium(u, self.lat, self.p)
        assert np.allclose(out[:, 1:], g[:, 1:])
        assert np.allclose(out[:, 0, 0, 0], 2 * g[:, 0, 0, 0] - f[:, 0, 0, 0])


class TestOmegaTau:
    def test_dt_twice_tau(self):
        assert kinetic.omega_from_tau(1.0, 2.0) == pytest.approx(1.0)

    def test_limits(self):
        assert kinetic.omega_from_tau(1e12, 1.0) < 1e-10
        assert kinetic.omega_from_tau(1e-12, 1.0) == pytest.approx(2.0, abs=1e-8)

    def test_monotone_in_ratio(self):
        omegas = [kinetic.omega_from_tau(1.0, dt) for dt in (0.1, 1.0, 10.0, 100.0)]
        assert all(a < b for a, b in zip(omegas, omegas[1:]))

    def test_invalid(self):
        with pytest.raises(KineticError):
            kinetic.omega_from_tau(0.0, 1.0)
        with pytest.raises(KineticError):
            kinetic.omega_from_tau(1.0, -1.0)

    def test_tau_effective_vanishes_at_omega_two(self):
        assert kinetic.tau_effective(2.0, 0.01) == pytest.approx(0.0)
        assert kinetic.tau_effective(1.0, 0.01) == pytest.approx(0.005)


class TestDetector:
    def test_opposite_slopes_oscillation(self):
        assert kinetic.smoothness_omega(1.0, -1.0, 10.0) == 1.0

    def test_smooth_slope(self):
        # L(1, 1) = 2 <= 10
        assert kinetic.smoothness_omega(1.0, 1.0, 10.0) == 2.0

    def test_steep_slope(self):
        # L(100, 100) = 200 > 10
        assert kinetic.smoothness_omega(100.0, 100.0, 10.0) == 1.0

    def test_flat(self):
        assert kinetic.smoothness_omega(0.0, 0.0, 5.0) == 1.0
        assert kinetic.smoothness_omega(0.0, 3.0, 5.0) == 1.0

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0.1, 100))
    def test_symmetry(self, sp, sm, smax):
        assert (kinetic.smoothness_omega(sp, sm, smax)
                == kinetic.smoothness_omega(sm, sp, smax))

    def test_field_detector_min_over_axes(self):
        u = np.zeros((8, 8, 1, 8))
        x = (np.arange(8) + 0.5) / 8
        u[..., EZ] = np.sin(2 * np.pi * x)[:, None, None]  # smooth in x, flat in y
        omega = kinetic.detector_omega_field(u, (1 / 8, 1 / 8, 1.0), s_max=1e3)
        assert np.all(omega == 1.0)  # flat along y forces first order
        u[..., EZ] += np.sin(2 * np.pi * x)[None, :, None]
        omega = kinetic.detector_omega_field(u, (1 / 8, 1 / 8, 1.0), s_max=1e3)
        assert np.any(omega == 2.0)


class TestPolicy:
    def test_fixed(self):
        pol = RelaxationPolicy(mode="fixed_omega", omega=1.5)
        assert pol.omega_for(np.zeros((2, 2, 1, 8)), (0.1, 0.1, 1), 0.01) == 1.5

    def test_from_tau(self):
        pol = RelaxationPolicy(mode="from_tau", tau=0.005)
        assert pol.omega_for(np.zeros((2, 2, 1, 8)), (0.1,) * 3, 0.01) == \
            pytest.approx(kinetic.omega_from_tau(0.005, 0.01))

    def test_validation(self):
        with pytest.raises(KineticError):
            RelaxationPolicy(mode="fixed_omega", omega=3.0)
        with pytest.raises(KineticError):
            RelaxationPolicy(mode="from_tau")
        with pytest.raises(KineticError):
            RelaxationPolicy(mode="detector")
        with pytest.raises(KineticError):
            RelaxationPolicy(mode="mystery")
