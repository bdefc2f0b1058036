"""Operators L, L+-, densities and annulus energies."""

import math

import numpy as np
import pytest

import conewave as cw
from conewave.diagnostics import annulus_weights, grad_sq, sphere_l2
from conewave.initial_data import sample_on_grid


def radial_state(u_fn, ut_fn, problem, n_r=2048, r_max=8.0):
    grid = cw.RadialGrid(r_max=r_max, n_r=n_r)
    r = grid.r
    return cw.SimState(u=u_fn(r), ut=ut_fn(r), t=0.0, grid=grid, problem=problem)


def ztilt_state(problem, n=256, extent=7.0):
    data = cw.gaussian_data(angular_profile="z-tilt")
    grid = cw.AxisymGrid(p_max=extent, z_max=extent, n_rho=n, n_z=2 * n)
    return sample_on_grid(data, grid, problem), data


class TestOperators:
    def test_L_annihilates_one_over_r(self, problem):
        st = radial_state(lambda r: 1.0 / r, lambda r: 0.0 * r, problem)
        lu = cw.apply_L(st)
        assert np.abs(lu[5:-5]).max() < 1e-10

    def test_L_gaussian_oracle(self, problem):
        # L e^{-r^2} = e^{-r^2} (1/r - 2r)
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0.0 * r, problem)
        r = st.grid.r
        expect = np.exp(-(r**2)) * (1.0 / r - 2.0 * r)
        sel = r < 6.0
        assert np.abs(cw.apply_L(st) - expect)[sel].max() < 1e-6

    def test_Lpm_gaussian(self, problem):
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0.0 * r, problem)
        lp, lm = cw.apply_Lpm(st)
        assert np.allclose(lp, lm)
        st2 = radial_state(lambda r: np.exp(-(r**2)), lambda r: np.ones_like(r), problem)
        lp2, lm2 = cw.apply_Lpm(st2)
        assert np.allclose(lp2 - lm2, 2.0)

    def test_zero_state(self, problem):
        st = radial_state(lambda r: 0 * r, lambda r: 0 * r, problem)
        assert np.all(cw.apply_L(st) == 0)
        assert np.all(cw.slashed_grad_sq(st) == 0)

    def test_slashed_zero_for_radial(self, problem):
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0 * r, problem)
        assert np.all(cw.slashed_grad_sq(st) == 0.0)

    def test_slashed_ztilt_oracle(self, problem):
        # u = (1 + z/2) e^{-r^2}: |slashed u|^2 = sin^2(theta)/4 e^{-2 r^2}
        st, _ = ztilt_state(problem)
        grid = st.grid
        rho = grid.rho[:, None]
        z = grid.z[None, :]
        r = np.sqrt(rho**2 + z**2)
        expect = 0.25 * (rho / r) ** 2 * np.exp(-2 * r**2)
        got = cw.slashed_grad_sq(st)
        sel = (r > 0.2) & (r < 5.0)
        assert np.abs(got - expect)[sel].max() < 5e-4

    def test_orthogonal_decomposition(self, problem):
        # |du/dr|^2 + |slashed u|^2 = u_rho^2 + u_z^2 pointwise
        st, _ = ztilt_state(problem, n=128)
        from conewave.core import _centered_derivative

        u_rho = _centered_derivative(st.u, st.grid.drho, 0, +1)
        u_z = _centered_derivative(st.u, st.grid.dz, 1, +1)
        assert np.allclose(grad_sq(st), u_rho**2 + u_z**2, atol=1e-12)

    def test_density_kinds(self, problem):
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0.3 * np.exp(-(r**2)), problem)
        for kind in ("full", "inward", "outward", "potential", "angular"):
            d = cw.density(st, kind)
            assert d.kind == kind
            assert np.all(d.samples >= 0.0)
        with pytest.raises(cw.ConfigError):
            cw.density(st, "sideways")


class TestEnergies:
    def test_zero_state(self, problem):
        st = radial_state(lambda r: 0 * r, lambda r: 0 * r, problem)
        assert cw.energies(st) == (0.0, 0.0, 0.0)

    def test_global_decomposition_radial(self, problem):
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0.2 * np.exp(-(r**2)), problem)
        E, Em, Ep = cw.energies(st)
        assert abs(Em + Ep - E) < 1e-9 * E

    def test_global_decomposition_axisym(self, problem):
        st, _ = ztilt_state(problem, n=256)
        E, Em, Ep = cw.energies(st)
        assert abs(Em + Ep - E) < 1e-3 * E

    def test_axisym_decomposition_refines(self, problem):
        resids = []
        for n in (64, 128, 256):
            st, _ = ztilt_state(problem, n=n)
            E, Em, Ep = cw.energies(st)
            resids.append(abs(Em + Ep - E) / E)
        orders = np.log2(np.array(resids[:-1]) / np.array(resids[1:]))
        assert orders.mean() > 1.8

    def test_annulus_boundary_term_oracle(self, problem):
        # e-(r1,r2) + e+(r1,r2) - e(r1,r2) equals the sphere boundary terms
        # (1/2)[(1/r2) oint_{r2} u^2 - (1/r1) oint_{r1} u^2]
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0 * r, problem, n_r=4096)
        r1, r2 = 1.0, 2.0
        E, Em, Ep = cw.energies(st, r1, r2)
        u = lambda rr: math.exp(-(rr**2))
        oracle = 0.5 * (
            4 * math.pi * r2**2 * u(r2) ** 2 / r2 - 4 * math.pi * r1**2 * u(r1) ** 2 / r1
        )
        assert Em + Ep - E == pytest.approx(oracle, abs=2e-5)

    def test_grid_L_identity(self, problem):
        # int |L u|^2 dx = int |du/dr|^2 dx on the grid, full domain
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0 * r, problem)
        from conewave.diagnostics import _gradients, cell_volumes

        ur, _, lu = _gradients(st)
        vol = cell_volumes(st.grid)
        lhs = float(np.sum(vol * lu**2))
        rhs = float(np.sum(vol * ur**2))
        assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_invalid_annulus(self, problem):
        st = radial_state(lambda r: 0 * r, lambda r: 0 * r, problem)
        with pytest.raises(cw.ConfigError):
            cw.energies(st, 2.0, 1.0)

    def test_annulus_weights_sum_to_ball_volume(self, problem):
        # radial midpoint weights integrate r^2-like densities to second order
        g = cw.RadialGrid(r_max=4.0, n_r=512)
        w = annulus_weights(g, 0.0, 3.0)
        assert float(w.sum()) == pytest.approx(4 * math.pi * 27 / 3, rel=1e-4)
        ga = cw.AxisymGrid(p_max=4.0, z_max=4.0, n_rho=128, n_z=256)
        wa = annulus_weights(ga, 1.0, 3.0)
        expect = 4 * math.pi / 3 * (27 - 1)
        assert float(wa.sum()) == pytest.approx(expect, rel=1e-3)

    def test_sphere_l2(self, problem):
        st = radial_state(lambda r: np.exp(-(r**2)), lambda r: 0 * r, problem)
        got = sphere_l2(st, 1.0)
        assert got == pytest.approx(4 * math.pi * math.exp(-2.0), rel=1e-4)


class TestSeries:
    def test_monotonicity_and_identity_along_run(self, radial_trace_T5):
        trace, _ = radial_trace_T5
        ser = cw.energy_series(trace)
        E0 = ser.E[0]
        assert np.max(np.abs(ser.E_minus + ser.E_plus - ser.E)) < 1e-8 * E0
        assert np.max(np.diff(ser.E_minus)) <= 1e-4 * E0
        assert np.min(np.diff(ser.E_plus)) >= -1e-4 * E0
