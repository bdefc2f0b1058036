"""Bound checks, decay fits, trends and norm accumulators."""

import numpy as np
import pytest

import conewave as cw
from conewave.analysis import make_check


class TestBoundCheck:
    def test_pass_semantics(self):
        c = make_check("x", 1.0, 2.0, "demo")
        assert c.passed and c.margin == 1.0
        c2 = make_check("x", 2.019, 2.0, "demo")  # within 1% allowance
        assert c2.passed
        c3 = make_check("x", 2.1, 2.0, "demo")
        assert not c3.passed

    def test_zero_rhs(self):
        assert make_check("z", 0.0, 0.0, "demo").passed
        assert not make_check("z", 0.5, 0.0, "demo").passed


class TestDecayFit:
    def test_exact_power_law(self):
        t = np.linspace(1.0, 40.0, 200)
        fit = cw.decay_fit(t, t ** (-0.8), (1.0, 40.0))
        assert fit.alpha == pytest.approx(0.8, abs=1e-12)
        assert fit.amplitude == pytest.approx(1.0, abs=1e-12)
        assert fit.residual < 1e-12

    def test_constant_series(self):
        t = np.linspace(1.0, 40.0, 100)
        fit = cw.decay_fit(t, np.full_like(t, 2.5), (1.0, 40.0))
        assert fit.alpha == pytest.approx(0.0, abs=1e-12)
        assert fit.amplitude == pytest.approx(2.5, rel=1e-12)

    def test_window_excludes_small_t(self):
        t = np.linspace(0.1, 20.0, 300)
        fit = cw.decay_fit(t, t ** (-1.0), (0.1, 20.0))
        assert fit.window[0] == 1.0

    def test_needs_enough_samples(self):
        t = np.linspace(1, 2, 5)
        with pytest.raises(cw.ConfigError):
            cw.decay_fit(t, t, (1.0, 2.0))

    def test_decay_bound_check_synthetic(self):
        t = np.linspace(1.0, 40.0, 400)
        e = 2.0 * t ** (-0.9)  # decays faster than t^-0.75
        chk = cw.decay_bound_check(t, e, kappa=0.75, K=1.0)
        assert chk.passed
        grow = 0.1 * t ** (0.2)  # grows: sup attained late
        chk2 = cw.decay_bound_check(t, grow, kappa=0.75, K=1.0)
        assert not chk2.passed


class TestTrends:
    def test_inner_cone_zero_trace(self, zero_trace):
        trace, _ = zero_trace
        trend = cw.inner_cone_energy(trace, 0.5)
        assert np.all(trend.e_minus_inner == 0.0)

    def test_inner_cone_requires_valid_c(self, zero_trace):
        trace, _ = zero_trace
        with pytest.raises(cw.ConfigError):
            cw.inner_cone_energy(trace, 1.5)

    def test_inner_cone_gaussian(self, radial_trace_T12):
        trace, _ = radial_trace_T12
        trend = cw.inner_cone_energy(trace, 0.5)
        assert trend.conclusive
        assert trend.decreasing
        assert trend.last_quarter_mean <= 0.5 * trend.first_quarter_mean

    def test_linear_interior_empties(self):
        # linear sanity oracle: sharp Huygens-like evacuation of the interior
        data = cw.gaussian_data()
        prob = cw.ProblemSpec(3.0)
        grid = cw.causal_grid(data, 10.0, "radial1d", n_r=1024)
        trace, _ = cw.evolve(
            data, prob, cw.SolverConfig(t_end=10.0, nonlinear=False, store_stride=4), grid
        )
        trend = cw.inner_cone_energy(trace, 0.5)
        assert trend.decreasing
        assert trend.last_quarter_mean < 1e-3 * trend.first_quarter_mean


class TestMorawetzChecks:
    def test_zero_trace(self, zero_trace):
        trace, _ = zero_trace
        chk = cw.morawetz_bound_check(trace, 1.0)
        assert chk.lhs == 0.0 and chk.rhs == 0.0 and chk.passed

    def test_lhs_nondecreasing_in_window(self, radial_trace_T5):
        trace, _ = radial_trace_T5
        c_half = cw.morawetz_bound_check(trace, 1.0, window=(0.0, 2.0))
        c_full = cw.morawetz_bound_check(trace, 1.0, window=(0.0, 4.5))
        assert c_full.lhs >= c_half.lhs
        assert c_full.passed

    def test_weighted_checks_pass(self, radial_trace_T12, monopole):
        trace, _ = radial_trace_T12
        chk = cw.weighted_morawetz_check(trace, monopole, kappa=0.75)
        assert chk.passed and chk.lhs > 0
        chk3 = cw.weighted_morawetz_p3(trace, monopole)
        assert chk3.passed

    def test_weighted_kappa_range(self, radial_trace_T5, monopole):
        trace, _ = radial_trace_T5
        with pytest.raises(cw.ConfigError):
            cw.weighted_morawetz_check(trace, monopole, kappa=1.5)

    def test_p3_variant_near_kappa1_limit(self, radial_trace_T12, monopole):
        # the kappa -> 1 general bound and the linear-weight variant track
        # each other on radial data
        trace, _ = radial_trace_T12
        a = cw.weighted_morawetz_check(trace, monopole, kappa=0.95)
        b = cw.weighted_morawetz_p3(trace, monopole)
        assert a.lhs == pytest.approx(b.lhs, rel=0.35)
        assert a.passed and b.passed

    def test_ztilt_weighted(self, axisym_trace_ztilt, ztilt):
        trace, _ = axisym_trace_ztilt
        chk = cw.weighted_morawetz_check(trace, ztilt, kappa=0.75)
        assert chk.passed
        chk2 = cw.weighted_morawetz_p3(trace, ztilt)
        assert chk2.passed


class TestScatteringNorms:
    def test_zero_trace(self, zero_trace):
        trace, _ = zero_trace
        sn = cw.scattering_norms(trace, q=6.0)
        assert sn.norm_lq_lp1((trace.t_first, trace.t_last)) == 0.0
        assert sn.st_norm((trace.t_first, trace.t_last)) == 0.0

    def test_additive_over_windows(self, radial_trace_T5):
        trace, _ = radial_trace_T5
        sn = cw.scattering_norms(trace, q=6.0, kappa=0.75)
        whole = sn._seg(sn.cum_q, (0.0, 4.0))
        parts = sn._seg(sn.cum_q, (0.0, 2.0)) + sn._seg(sn.cum_q, (2.0, 4.0))
        assert whole == pytest.approx(parts, rel=1e-12)

    def test_lp1_bounded_by_energy(self, radial_trace_T5):
        # ||u(t)||_(p+1)^(p+1) is one term of the conserved energy
        trace, _ = radial_trace_T5
        E = cw.total_energy(trace.state_at(0.0))
        p = trace.problem.p
        sn = cw.scattering_norms(trace, 6.0)
        sup = float(np.max(sn.lp1_series))
        assert sup ** (p + 1) <= (p + 1) * E * (1 + 1e-9)

    def test_increments_decay(self, radial_trace_T12):
        trace, _ = radial_trace_T12
        sn = cw.scattering_norms(trace, q=6.0, kappa=0.75)
        early = sn.increment_per_unit_time((1.0, 5.0))
        late = sn.increment_per_unit_time((8.0, 12.0))
        assert late < early

    def test_q_flagging(self, radial_trace_T5):
        trace, _ = radial_trace_T5
        assert cw.scattering_norms(trace, q=4.0, kappa=0.75).q_flagged
        assert not cw.scattering_norms(trace, q=6.0, kappa=0.75).q_flagged


class TestBoundBattery:
    def test_all_pass_on_gaussian(self, radial_trace_T12):
        trace, _ = radial_trace_T12
        checks = cw.measure_and_flux_bounds(trace)
        assert checks, "battery must produce checks"
        failed = [c.name for c in checks if not c.passed]
        assert not failed, failed

    def test_zero_trace_battery(self, zero_trace):
        trace, _ = zero_trace
        checks = cw.measure_and_flux_bounds(trace)
        assert all(c.passed for c in checks)


class TestInconclusiveTrend:
    def test_short_window_reported_inconclusive(self):
        data = cw.gaussian_data()
        prob = cw.ProblemSpec(3.0)
        grid = cw.causal_grid(data, 0.5, "radial1d", n_r=256)
        trace, _ = cw.evolve(data, prob, cw.SolverConfig(t_end=0.5, store_stride=16), grid)
        trend = cw.inner_cone_energy(trace, 0.5)
        assert not trend.conclusive
