"""Initial-data families, weighted functionals and the smooth cutoff.

Expected values carry their own oracles: scipy.integrate quadrature of the
closed-form densities, independent of the package's quadrature engine.
"""

import math

import numpy as np
import pytest
from scipy import integrate

import conewave as cw
from conewave.initial_data import (
    cutoff_profile,
    cutoff_profile_prime,
    energy_density,
    inward_density,
    sphere_integral,
    volume_integral,
)

P = 3.0

# scipy oracle for the radial Gaussian exp(-r^2), u1 = 0, p = 3:
#   E = 4 pi int [ (1/2)(2r e^-r^2)^2 + (1/4) e^-4r^2 ] r^2 dr
E_ORACLE = 4 * math.pi * integrate.quad(
    lambda r: (0.5 * 4 * r**2 * np.exp(-2 * r**2) + 0.25 * np.exp(-4 * r**2)) * r**2,
    0.0, 12.0,
)[0]
# closed form of the same number: 4 pi [ (3/16) sqrt(pi/2) + sqrt(pi)/128 ]
E_CLOSED = 4 * math.pi * (0.1875 * math.sqrt(math.pi / 2) + math.sqrt(math.pi) / 128)


class TestGaussianFamilies:
    def test_monopole_is_radial_gaussian(self, monopole):
        r = np.linspace(0.1, 4.0, 50)
        assert np.allclose(monopole.u0(r, np.zeros_like(r)), np.exp(-(r**2)))
        assert np.allclose(monopole.u1(r, np.zeros_like(r)), 0.0)
        assert monopole.radial

    def test_zero_amplitude(self):
        data = cw.gaussian_data(amplitude=0.0)
        r = np.linspace(0.0, 3.0, 10)
        assert np.all(data.u0(r, r) == 0)
        assert data.support_radius == 0.0

    def test_ztilt_angular_gradient_oracle(self, ztilt):
        # symbolic: u0 = (1 + r cos(th)/2) e^-r^2  =>  |slashed u0|^2 = sin^2/4 e^-2r^2
        r = np.linspace(0.2, 3.0, 20)[:, None]
        th = np.linspace(0.1, 3.0, 7)[None, :]
        got = ztilt.slashed_sq(r, th)
        expect = 0.25 * np.sin(th) ** 2 * np.exp(-2 * r**2)
        assert np.allclose(got, expect, rtol=1e-12)

    def test_support_radius_truncates(self, monopole, ztilt):
        for data in (monopole, ztilt):
            r = np.asarray([data.support_radius * 1.01])
            assert data.u0(r, np.zeros(1))[0] == 0.0
            r_in = np.asarray([data.support_radius * 0.99])
            assert abs(data.u0(r_in, np.zeros(1))[0]) > 0

    def test_offset_monopole_not_radial(self):
        data = cw.gaussian_data(offset=1.0)
        assert not data.radial
        # peak sits at (r, theta) = (1, 0)
        assert data.u0(np.asarray([1.0]), np.asarray([0.0]))[0] == pytest.approx(1.0)

    def test_bad_params(self):
        with pytest.raises(cw.ConfigError):
            cw.gaussian_data(width=-1.0)
        with pytest.raises(cw.ConfigError):
            cw.gaussian_data(angular_profile="quadrupole")


class TestWeightedEnergies:
    def test_zero_data(self):
        rep = cw.weighted_energies(cw.gaussian_data(amplitude=0.0), P, 0.5)
        assert rep.E == rep.E_kappa == rep.K == rep.E_10 == 0.0

    def test_energy_against_scipy_oracle(self, monopole):
        rep = cw.weighted_energies(monopole, P, 0.75)
        assert E_ORACLE == pytest.approx(E_CLOSED, rel=1e-12)
        assert rep.E == pytest.approx(E_ORACLE, rel=1e-9)

    def test_kappa_zero_doubles(self, monopole):
        rep = cw.weighted_energies(monopole, P, 0.0)
        assert rep.E_kappa == pytest.approx(2.0 * rep.E, rel=1e-12)

    def test_kappa_one_closed_form(self, monopole):
        # weighted part = pi + pi/32 for the unit radial Gaussian at p = 3
        rep = cw.weighted_energies(monopole, P, 1.0)
        assert rep.E_kappa - rep.E == pytest.approx(math.pi + math.pi / 32, rel=1e-10)
        assert rep.E_10 == pytest.approx(math.pi + math.pi / 32, rel=1e-10)

    def test_inward_weighted_oracle(self, monopole):
        # K = 4 pi int r^k [ (u0' + u0/r)^2/4 + u0^4/8 ] r^2 dr with scipy
        k = 0.75

        def dens(r):
            u = np.exp(-(r**2))
            lp = -2 * r * u + u / r
            return r**k * (0.25 * lp**2 + u**4 / 8.0) * r**2

        oracle = 4 * math.pi * integrate.quad(dens, 0.0, 12.0, limit=200)[0]
        rep = cw.weighted_energies(monopole, P, k)
        assert rep.K == pytest.approx(oracle, rel=1e-8)

    def test_ztilt_energy_against_2d_oracle(self, ztilt):
        def dens(th, r):
            e = np.exp(-(r**2))
            u = (1 + 0.5 * r * np.cos(th)) * e
            ur = e * (0.5 * np.cos(th) - 2 * r * (1 + 0.5 * r * np.cos(th)))
            uth_r = -0.5 * np.sin(th) * e
            return (0.5 * (ur**2 + uth_r**2) + 0.25 * u**4) * r**2 * np.sin(th)

        oracle = 2 * math.pi * integrate.dblquad(dens, 0, 10.0, 0, math.pi, epsabs=1e-12)[0]
        rep = cw.weighted_energies(ztilt, P, 0.75)
        assert rep.E == pytest.approx(oracle, rel=1e-8)

    def test_report_orderings(self, monopole, ztilt):
        for data in (monopole, ztilt):
            rep = cw.weighted_energies(data, P, 0.75)
            assert 0 < rep.E <= rep.E_kappa
            assert 0 < rep.K <= rep.E_kappa


class TestOperatorIdentities:
    """Quadrature identities tying |L u0|^2 to |du0/dr|^2."""

    @pytest.mark.parametrize("family", ["monopole", "ztilt", "offset", "cutoff"])
    def test_L_identity_global(self, family, monopole, ztilt):
        data = {
            "monopole": monopole,
            "ztilt": ztilt,
            "offset": cw.gaussian_data(offset=0.7),
            "cutoff": cw.cutoff_data(cw.gaussian_data(), 1.0),
        }[family]

        def l_sq(r, th):
            return (data.du0_dr(r, th) + data.u0(r, th) / r) ** 2

        def ur_sq(r, th):
            return data.du0_dr(r, th) ** 2

        R, w, rad = data.support_radius, data.width_hint, data.radial
        lhs = volume_integral(l_sq, R, w, rad)
        rhs = volume_integral(ur_sq, R, w, rad)
        assert lhs == pytest.approx(rhs, rel=1e-6)

    @pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
    def test_annulus_identity_with_boundary_term(self, R, ztilt):
        data = ztilt

        def diff(r, th):
            return (data.du0_dr(r, th) + data.u0(r, th) / r) ** 2 - data.du0_dr(r, th) ** 2

        inner = volume_integral(
            diff, R, data.width_hint, data.radial
        )
        boundary = sphere_integral(
            lambda r, th: data.u0(r, th) ** 2, R, data.radial
        ) / R
        assert inner == pytest.approx(boundary, rel=1e-6)
        outer = volume_integral(
            diff, data.support_radius, data.width_hint, data.radial, r_min=R
        )
        assert outer == pytest.approx(-boundary, rel=1e-6)

    def test_inward_outward_comparison_inequality(self, monopole, ztilt):
        # weighted inward+outward quadratic forms are dominated by the full
        # weighted energy (strict inequality carried by the boundary flux)
        k = 0.75
        for data in (monopole, ztilt):
            def lhs_dens(r, th):
                lp = data.du0_dr(r, th) + data.u0(r, th) / r + data.u1(r, th)
                lm = data.du0_dr(r, th) + data.u0(r, th) / r - data.u1(r, th)
                return r**k * (
                    0.25 * lp**2 + 0.25 * lm**2 + 0.5 * data.slashed_sq(r, th)
                    + np.abs(data.u0(r, th)) ** (P + 1) / (P + 1)
                )

            def rhs_dens(r, th):
                return r**k * (
                    0.5 * data.grad_sq(r, th) + 0.5 * data.u1(r, th) ** 2
                    + np.abs(data.u0(r, th)) ** (P + 1) / (P + 1)
                )

            lhs = volume_integral(lhs_dens, data.support_radius, data.width_hint, data.radial)
            rhs = volume_integral(rhs_dens, data.support_radius, data.width_hint, data.radial)
            assert lhs <= rhs * (1 + 1e-6)


class TestCutoff:
    def test_profile_shape(self):
        xi = np.asarray([0.0, 0.3, 0.49, 1.0, 2.0])
        phi = cutoff_profile(xi)
        assert np.all(phi[:3] == 0.0)
        assert np.all(phi[3:] == 1.0)
        mid = cutoff_profile(np.linspace(0.5, 1.0, 100))
        assert np.all(np.diff(mid) >= 0)

    def test_profile_prime_matches_fd(self):
        xi = np.linspace(0.55, 0.95, 17)
        h = 1e-6
        fd = (cutoff_profile(xi + h) - cutoff_profile(xi - h)) / (2 * h)
        assert np.allclose(cutoff_profile_prime(xi), fd, atol=1e-5)

    def test_cutoff_support(self, monopole):
        cut = cw.cutoff_data(monopole, 1.0)
        r = np.asarray([0.2, 0.45])
        assert np.all(cut.u0(r, np.zeros_like(r)) == 0.0)
        r = np.asarray([1.1, 2.0])
        assert np.allclose(cut.u0(r, np.zeros_like(r)), monopole.u0(r, np.zeros_like(r)))

    def test_cutoff_of_zero_is_zero(self):
        cut = cw.cutoff_data(cw.gaussian_data(amplitude=0.0), 1.0)
        r = np.linspace(0, 3, 7)
        assert np.all(cut.u0(r, r) == 0)

    def test_small_r_limit_recovers_data(self, monopole):
        # P_r f -> f pointwise outside any neighbourhood of the origin
        r_eval = np.linspace(0.05, 4.0, 60)
        for rc in (0.04, 0.02, 0.01):
            cut = cw.cutoff_data(monopole, rc)
            err = np.abs(cut.u0(r_eval, 0 * r_eval) - monopole.u0(r_eval, 0 * r_eval)).max()
            assert err == 0.0  # identical beyond r >= rc

    def test_energy_bound_with_annulus_constant(self, monopole):
        # E(P_1 u) <= E(u) + C int_{1/2<|x|<1} u^2/|x|^2 with
        # C = 2 + 2 sup|phi'|^2 (AM-GM with delta = 1 on the gradient term)
        rep0 = cw.weighted_energies(monopole, P, 0.75)
        cut = cw.cutoff_data(monopole, 1.0)
        rep1 = cw.weighted_energies(cut, P, 0.75)
        ann = volume_integral(
            lambda r, th: np.where((r > 0.5) & (r < 1.0), monopole.u0(r, th) ** 2 / r**2, 0.0),
            monopole.support_radius, monopole.width_hint, monopole.radial,
        )
        phi_max = float(np.max(np.abs(cutoff_profile_prime(np.linspace(0.5, 1.0, 2001)))))
        C = 2.0 + 2.0 * phi_max**2
        assert rep1.E <= rep0.E + C * ann

    def test_E10_limsup(self, monopole):
        # the weight-|x| energy of the truncation approaches that of the data
        # from above as the cutoff radius shrinks (measured excess ~ O(r))
        base = cw.weighted_energies(monopole, P, 1.0).E_10
        excess = [
            cw.weighted_energies(cw.cutoff_data(monopole, rc), P, 1.0).E_10 - base
            for rc in (0.25, 0.125, 0.0625)
        ]
        assert excess[0] > excess[1] > excess[2]
        assert excess[-1] <= 0.02 * base


class TestSamplers:
    def test_energy_density_nonnegative(self, ztilt):
        r = np.linspace(0.05, 5, 40)[:, None]
        th = np.linspace(0, math.pi, 9)[None, :]
        assert np.all(energy_density(ztilt, P)(r, th) >= 0)
        assert np.all(inward_density(ztilt, P)(r, th) >= 0)

    def test_make_data_registry(self):
        assert cw.make_data("gaussian-monopole", amplitude=2.0).params["amplitude"] == 2.0
        assert cw.make_data("zero").support_radius == 0.0
        with pytest.raises(cw.ConfigError):
            cw.make_data("plane-wave")
