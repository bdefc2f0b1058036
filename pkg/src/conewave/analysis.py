"""Aggregate checks: interior-control bounds, weighted budgets, decay trends.

Every asymptotic statement of the underlying theory ("-> 0 as t -> infinity")
is rendered here as a finite-window surrogate: a one-sided bound with an
explicit discretization allowance, or a first-quarter/last-quarter trend over
the simulated horizon.  Nothing extrapolates beyond the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Array,
    ConfigError,
    RadialGrid,
    SimState,
    SpacetimeTrace,
    cone_shell_region,
    slab_region,
)
from .diagnostics import (
    EnergySeries,
    _gradients,
    annulus_weights,
    cell_volumes,
    energies,
    energy_series,
    radius_field,
    sphere_l2,
    total_energy,
)
from .flux import (
    _origin_series,
    cone_flux,
    estimate_mu,
    morawetz_integral,
    pi_mu,
)
from .initial_data import InitialData, weighted_energies

DEFAULT_TOL = 1e-2  # discretization allowance for inequality checks


@dataclass(frozen=True)
class BoundCheck:
    """One verified inequality: pass iff margin = rhs - lhs >= -tol*rhs."""

    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    provenance: str
    tol: float = DEFAULT_TOL

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": bool(self.passed),
            "provenance": self.provenance,
            "tol": self.tol,
        }


def make_check(name: str, lhs: float, rhs: float, provenance: str, tol: float = DEFAULT_TOL) -> BoundCheck:
    margin = rhs - lhs
    passed = margin >= -tol * max(rhs, 0.0) - 1e-14
    return BoundCheck(
        name=name, lhs=float(lhs), rhs=float(rhs), margin=float(margin),
        passed=bool(passed), provenance=provenance, tol=tol,
    )


def _window(trace: SpacetimeTrace, window) -> tuple[float, float]:
    if window is None:
        return trace.t_first, trace.t_last
    t1, t2 = window
    if t2 <= t1:
        raise ConfigError("empty analysis window")
    return max(t1, trace.t_first), min(t2, trace.t_last)


def _frame_time_integral(trace: SpacetimeTrace, window, frame_fn) -> float:
    """Trapezoid-in-time of a per-snapshot reduction over stored frames."""
    t1, t2 = window
    inner = trace.times[(trace.times > t1) & (trace.times < t2)]
    ts = np.unique(np.concatenate([[t1], inner, [t2]]))
    vals = np.array([frame_fn(trace.state_at(float(t))) for t in ts])
    return float(np.trapezoid(vals, ts))


# ---------------------------------------------------------------------------
# Interior-control (Morawetz-type) bounds
# ---------------------------------------------------------------------------


def morawetz_bound_check(trace: SpacetimeTrace, R: float, window=None) -> BoundCheck:
    """Windowed interior-control functional against its 2E ceiling.

    LHS = (1/R) iint_{|x|<R} [ |grad u|^2/2 + u_t^2/2 + (p-2)/(p+1) |u|^(p+1) ]
        + (1/(2R^2)) iint_{|x|=R} |u|^2
        + iint_{|x|>R} [ (p-1)/(p+1) |u|^(p+1) + |slashed u|^2 ] / |x|

    computed over the stored window (a lower bound of the all-time integral),
    must stay below twice the conserved energy.
    """
    grid = trace.grid
    if not grid.contains_radius(R):
        raise ConfigError(f"R={R} outside the grid")
    p = trace.problem.p
    w_in = annulus_weights(grid, 0.0, R)
    w_out = annulus_weights(grid, R, np.inf)
    r = radius_field(grid)
    t1, t2 = _window(trace, window)

    def interior(state: SimState) -> float:
        ur, slash2, _ = _gradients(state)
        pot = np.abs(state.u) ** (p + 1)
        dens = 0.5 * (ur**2 + slash2) + 0.5 * state.ut**2 + (p - 2.0) / (p + 1.0) * pot
        return float(np.sum(w_in * dens)) / R

    def shell(state: SimState) -> float:
        return sphere_l2(state, R) / (2.0 * R**2)

    def exterior(state: SimState) -> float:
        _, slash2, _ = _gradients(state)
        pot = np.abs(state.u) ** (p + 1)
        dens = ((p - 1.0) / (p + 1.0) * pot + slash2) / r
        return float(np.sum(w_out * dens))

    lhs = (
        _frame_time_integral(trace, (t1, t2), interior)
        + _frame_time_integral(trace, (t1, t2), shell)
        + _frame_time_integral(trace, (t1, t2), exterior)
    )
    E = total_energy(trace.state_at(trace.t_first))
    return make_check(
        name=f"interior_control_R{R:g}",
        lhs=lhs,
        rhs=2.0 * E,
        provenance="windowed interior-control functional dominated by twice the energy",
    )


def _weighted_mu_integral(trace: SpacetimeTrace, weight_fn, window) -> float:
    """pi * int a(t) dmu(t) over the window via the origin-oracle density."""
    t1, t2 = window
    t1 = max(t1, 0.0)
    if t2 <= t1:
        return 0.0
    inner = trace.times[(trace.times > t1) & (trace.times < t2)]
    ts = np.unique(np.concatenate([[t1], inner, [t2]]))
    u0 = np.interp(ts, trace.times, _origin_series(trace))
    vals = weight_fn(ts) * u0**2
    return math.pi * float(np.trapezoid(vals, ts))


def weighted_morawetz_check(
    trace: SpacetimeTrace,
    data: InitialData,
    kappa: float,
    gamma: float | None = None,
    window=None,
) -> BoundCheck:
    """Weighted inward-energy budget with weight a(r) = r^kappa.

    LHS = pi int a(t) dmu + iint a(|x|+t) [ (p-1-2g)/(2(p+1)) |u|^(p+1)/|x|
          + (1-g)/2 |slashed u|^2/|x| ],  RHS = K1 = int a(|x|) e-(x, 0) dx.
    """
    if not (0.0 < kappa < 1.0):
        raise ConfigError("kappa must lie in (0, 1)")
    g = kappa if gamma is None else gamma
    p = trace.problem.p
    grid = trace.grid
    vol = cell_volumes(grid)
    r = radius_field(grid)
    t1, t2 = _window(trace, window)
    t1 = max(t1, 0.0)

    c_pot = (p - 1.0 - 2.0 * g) / (2.0 * (p + 1.0))
    c_sl = (1.0 - g) / 2.0

    def bulk(state: SimState) -> float:
        _, slash2, _ = _gradients(state)
        pot = np.abs(state.u) ** (p + 1)
        wgt = (r + state.t) ** kappa / r
        return float(np.sum(vol * wgt * (c_pot * pot + c_sl * slash2)))

    lhs = _weighted_mu_integral(trace, lambda t: t**kappa, (t1, t2))
    lhs += _frame_time_integral(trace, (t1, t2), bulk)
    K1 = weighted_energies(data, p, kappa).K
    return make_check(
        name=f"weighted_inward_budget_kappa{kappa:g}",
        lhs=lhs,
        rhs=K1,
        provenance="r^kappa-weighted inward budget bounded by the weighted inward energy of the data",
    )


def weighted_morawetz_p3(trace: SpacetimeTrace, data: InitialData, window=None) -> BoundCheck:
    """p = 3, gamma = 1 budget with weight a(r) = r.

    LHS = pi int t dmu + iint (t/|x|) ( |u|^4/4 + |slashed u|^2/2 ),
    RHS = K1 = int |x| e-(x, 0) dx.
    """
    p = trace.problem.p
    if p != 3.0:
        raise ConfigError("the linear-weight budget requires p = 3")
    grid = trace.grid
    vol = cell_volumes(grid)
    r = radius_field(grid)
    t1, t2 = _window(trace, window)
    t1 = max(t1, 0.0)

    def bulk(state: SimState) -> float:
        _, slash2, _ = _gradients(state)
        dens = 0.25 * state.u**4 + 0.5 * slash2
        return state.t * float(np.sum(vol * dens / r))

    lhs = _weighted_mu_integral(trace, lambda t: t, (t1, t2))
    lhs += _frame_time_integral(trace, (t1, t2), bulk)
    K1 = weighted_energies(data, p, 1.0).K
    return make_check(
        name="weighted_inward_budget_p3_linear",
        lhs=lhs,
        rhs=K1,
        provenance="linear-weight inward budget at p=3 bounded by the |x|-weighted inward energy",
    )


# ---------------------------------------------------------------------------
# Decay fits and trends
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares power law E-(t) ~ C t^-alpha over a window (t >= 1)."""

    window: tuple[float, float]
    alpha: float
    amplitude: float
    residual: float
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "alpha": self.alpha,
            "amplitude": self.amplitude,
            "residual": self.residual,
            "n_samples": self.n_samples,
        }


def decay_fit(times, values, window: tuple[float, float]) -> DecayFit:
    """Fit log E- = log C - alpha log t on the window (skipping t < 1)."""
    times = np.asarray(times, float)
    values = np.asarray(values, float)
    t1 = max(window[0], 1.0)
    sel = (times >= t1) & (times <= window[1]) & (values > 0)
    if sel.sum() < 10:
        raise ConfigError(f"decay fit needs >= 10 positive samples, got {int(sel.sum())}")
    lt = np.log(times[sel])
    lv = np.log(values[sel])
    coeffs, res_arr, *_ = np.polyfit(lt, lv, 1, full=True)
    slope, intercept = coeffs
    residual = float(np.sqrt(res_arr[0] / sel.sum())) if len(res_arr) else 0.0
    return DecayFit(
        window=(t1, window[1]),
        alpha=float(-slope),
        amplitude=float(np.exp(intercept)),
        residual=residual,
        n_samples=int(sel.sum()),
    )


def decay_bound_check(times, e_minus, kappa: float, K: float, windows=None) -> BoundCheck:
    """sup over nested windows of t^kappa E-(t) must not grow as the window extends.

    C(T) = sup_{[t_lo, T]} t^kappa E-(t) / K is evaluated on nested windows;
    the check asserts C(T_max) <= C(T_min) (+1% allowance), i.e. the sup is
    attained early and later times obey the same one-sided decay envelope.
    """
    times = np.asarray(times, float)
    e_minus = np.asarray(e_minus, float)
    if windows is None:
        t_lo, t_hi = 5.0, float(times[-1])
        windows = [(t_lo, t_lo + f * (t_hi - t_lo)) for f in (0.5, 0.75, 1.0)]
    sups = []
    for a, b in windows:
        sel = (times >= a) & (times <= b)
        if not sel.any():
            raise ConfigError(f"empty decay window ({a}, {b})")
        sups.append(float(np.max(times[sel] ** kappa * e_minus[sel])) / max(K, 1e-300))
    return make_check(
        name=f"decay_envelope_kappa{kappa:g}",
        lhs=sups[-1],
        rhs=sups[0],
        provenance=f"sup t^kappa E-(t)/K non-growing over nested windows; sups={sups}",
        tol=DEFAULT_TOL,
    )


@dataclass
class InnerConeTrend:
    """E-+(t; 0, c t) series and its first-/last-quarter trend."""

    c: float
    times: Array
    e_minus_inner: Array
    e_plus_inner: Array
    first_quarter_mean: float
    last_quarter_mean: float
    decreasing: bool
    conclusive: bool

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "first_quarter_mean": self.first_quarter_mean,
            "last_quarter_mean": self.last_quarter_mean,
            "decreasing": bool(self.decreasing),
            "conclusive": bool(self.conclusive),
        }


def inner_cone_energy(trace: SpacetimeTrace, c: float, series: EnergySeries | None = None) -> InnerConeTrend:
    """Annulus energies inside |x| < c t at stored times, with a trend check.

    The desk-scale surrogate of the interior-decay limit: the mean over the
    last quarter of the series must be at most half the first-quarter mean.
    """
    if not (0.0 < c < 1.0):
        raise ConfigError("speed fraction c must lie in (0, 1)")
    h = trace.grid.min_spacing
    sel = trace.times * c >= 4.0 * h
    ts = trace.times[sel]
    em = np.empty(len(ts))
    ep = np.empty(len(ts))
    for k, t in enumerate(ts):
        state = trace.state_at(float(t))
        _, em[k], ep[k] = energies(state, 0.0, c * float(t))
    n = len(ts)
    conclusive = n >= 8
    q = max(n // 4, 1)
    first = float(np.mean(em[:q])) if n else 0.0
    last = float(np.mean(em[-q:])) if n else 0.0
    return InnerConeTrend(
        c=c,
        times=ts,
        e_minus_inner=em,
        e_plus_inner=ep,
        first_quarter_mean=first,
        last_quarter_mean=last,
        decreasing=bool(conclusive and last <= 0.5 * first),
        conclusive=conclusive,
    )


# ---------------------------------------------------------------------------
# Space-time norm accumulators
# ---------------------------------------------------------------------------


@dataclass
class ScatteringNorms:
    """Windowed ||u||_{L^q L^(p+1)} and ||u||_{L^(2(p-1))_{t,x}} accumulators.

    Cumulative integrals are stored, so values over disjoint windows add
    exactly and norms over any subwindow are O(1) lookups.
    """

    times: Array
    lp1_series: Array  # ||u(t)||_(p+1)
    cum_q: Array       # int ||u||_(p+1)^q dt
    cum_st: Array      # iint |u|^(2(p-1)) dx dt
    q: float
    p: float
    q_flagged: bool

    def _seg(self, cum: Array, window) -> float:
        a = float(np.interp(window[0], self.times, cum))
        b = float(np.interp(window[1], self.times, cum))
        return b - a

    def norm_lq_lp1(self, window) -> float:
        return self._seg(self.cum_q, window) ** (1.0 / self.q)

    def st_norm(self, window) -> float:
        return self._seg(self.cum_st, window) ** (1.0 / (2.0 * (self.p - 1.0)))

    def increment_per_unit_time(self, window) -> float:
        return self._seg(self.cum_q, window) / max(window[1] - window[0], 1e-300)

    def st_increments(self) -> Array:
        return np.concatenate([[0.0], np.diff(self.cum_st)])


def scattering_norms(trace: SpacetimeTrace, q: float, kappa: float | None = None) -> ScatteringNorms:
    """Accumulate the scattering-diagnostic norms over the stored window."""
    p = trace.problem.p
    if q <= 0:
        raise ConfigError("q must be positive")
    q_flagged = kappa is not None and q <= (p + 1.0) / kappa
    vol = cell_volumes(trace.grid)
    n = trace.n_frames
    s_p1 = np.empty(n)
    s_st = np.empty(n)
    for j in range(n):
        u = trace.u_frames[j]
        au = np.abs(u)
        s_p1[j] = float(np.sum(vol * au ** (p + 1)))
        s_st[j] = float(np.sum(vol * au ** (2.0 * (p - 1.0))))
    ts = trace.times
    integ_q = s_p1 ** (q / (p + 1.0))
    cum_q = np.concatenate([[0.0], np.cumsum(0.5 * (integ_q[1:] + integ_q[:-1]) * np.diff(ts))])
    cum_st = np.concatenate([[0.0], np.cumsum(0.5 * (s_st[1:] + s_st[:-1]) * np.diff(ts))])
    return ScatteringNorms(
        times=ts.copy(),
        lp1_series=s_p1 ** (1.0 / (p + 1.0)),
        cum_q=cum_q,
        cum_st=cum_st,
        q=q,
        p=p,
        q_flagged=q_flagged,
    )


# ---------------------------------------------------------------------------
# Measure / flux bound batteries
# ---------------------------------------------------------------------------


def measure_and_flux_bounds(
    trace: SpacetimeTrace,
    window=None,
    series: EnergySeries | None = None,
    mono_tol: float = 1e-4,
) -> list[BoundCheck]:
    """Bound battery over a full-run trace.

    - pi mu(window) <= E
    - both mu estimators agree within 5% and are nondecreasing
    - sampled cone fluxes Q <= E
    - windowed inward-energy representation
      E-(t1) = pi mu([t1,t2]) + M(slab) + E-(t2), residual <= 1% E
    - monotonicity of E- down to mono_tol * E per stored step
    """
    t1, t2 = _window(trace, window)
    E = total_energy(trace.state_at(trace.t_first))
    checks = []

    est = estimate_mu(trace, t1, t2)
    total_mu = float(est.P_origin[-1] - est.P_origin[0])
    checks.append(
        make_check("pi_mu_leq_E", math.pi * total_mu, E,
                   "total origin measure dominated by the energy", tol=DEFAULT_TOL)
    )
    checks.append(
        make_check("mu_estimators_agree", est.discrepancy, 0.05,
                   "origin oracle vs cylinder extrapolation relative gap", tol=0.0)
    )
    for nm, curve in (("origin", est.P_origin), ("cylinder", est.P_cylinder)):
        viol = float(max(0.0, -np.min(np.diff(curve)))) if len(curve) > 1 else 0.0
        scale = max(float(est.P_origin[-1]), 1e-12)
        checks.append(
            make_check(f"mu_{nm}_nondecreasing", viol, 0.01 * scale,
                       "cumulative measure curve must not decrease", tol=0.0)
        )

    grid = trace.grid
    horizon = grid.r_max if isinstance(grid, RadialGrid) else min(grid.p_max, grid.z_max)
    reach = horizon - 3.0 * grid.min_spacing

    q_worst = 0.0
    span = t2 - t1
    for s in (t2, t1 + 0.75 * span, t1 + 0.5 * span):
        a = max(t1, s - reach)
        if s - a < 4 * grid.min_spacing:
            continue
        q_worst = max(q_worst, cone_flux(trace, "Q--", s, a, s))
        q_worst = max(q_worst, cone_flux(trace, "Q+-", s, a, s))
    for tau in (t1, t1 + 0.25 * span):
        b = min(t2, tau + reach)
        if b - tau < 4 * grid.min_spacing:
            continue
        q_worst = max(q_worst, cone_flux(trace, "Q-+", tau, tau, b))
        q_worst = max(q_worst, cone_flux(trace, "Q++", tau, tau, b))
    checks.append(
        make_check("cone_flux_leq_E", q_worst, E,
                   "every cone flux dominated by the full energy", tol=DEFAULT_TOL)
    )

    em1 = energies(trace.state_at(t1))[1]
    em2 = energies(trace.state_at(t2))[1]
    slab = slab_region(t1, t2, radius=reach)
    m_slab = morawetz_integral(trace, slab)
    resid = abs(em1 - (pi_mu(trace, t1, t2) + m_slab + em2))
    checks.append(
        make_check("inward_energy_representation", resid, 0.01 * E,
                   "E-(t1) equals origin-measure + Morawetz + tail inward energy", tol=0.0)
    )

    if series is None:
        series = energy_series(trace)
    dEm = np.diff(series.E_minus)
    worst_rise = float(max(0.0, np.max(dEm))) if len(dEm) else 0.0
    checks.append(
        make_check("inward_energy_monotone", worst_rise, mono_tol * E,
                   "E-(t) decreasing up to the discretization allowance", tol=0.0)
    )
    return checks


def lift_of_r_check(
    trace: SpacetimeTrace, t0: float, r1: float, r2: float, n_samples: int = 9
) -> BoundCheck:
    """int_{r1}^{r2} Q--(t0+r; t0, t0+r) dr <= r2 * M(cone shell), 2% slack."""
    rs = np.linspace(r1, r2, n_samples)
    qs = np.array([cone_flux(trace, "Q--", t0 + r, t0, t0 + r) for r in rs])
    lhs = float(np.trapezoid(qs, rs))
    shell = cone_shell_region(t0, r1, r2)
    rhs = r2 * morawetz_integral(trace, shell)
    return make_check(
        name=f"lift_of_r_{r1:g}_{r2:g}",
        lhs=lhs,
        rhs=rhs,
        provenance="cone-flux average dominated by the cone-shell Morawetz integral",
        tol=0.02,
    )


def q_decay_trend(trace: SpacetimeTrace, window: tuple[float, float], s_values) -> BoundCheck:
    """Monotone-fit slope of s -> Q--(s; window) at the largest simulated s.

    Passes when the fitted slope is nonpositive within a noise allowance of
    2% of max Q per unit s.
    """
    s_values = np.asarray(s_values, float)
    qs = np.array([cone_flux(trace, "Q--", float(s), window[0], window[1]) for s in s_values])
    slope = float(np.polyfit(s_values, qs, 1)[0])
    span = float(s_values[-1] - s_values[0])
    allowance = 0.02 * float(np.max(qs)) / max(span, 1e-300)
    return make_check(
        name="backward_flux_trend",
        lhs=slope,
        rhs=allowance,
        provenance=f"Q--(s) nonincreasing in trend at large s; values={qs.tolist()}",
        tol=0.0,
    )
