"""Surface integrals, light-cone fluxes, the origin measure and balance ledgers.

For a spacetime region Omega swept out by a polygon Phi in the (r, t)
half-plane, the inward (resp. outward) energy current integrates over the
oriented boundary to minus (resp. plus) the Morawetz integral

    M(Omega) = int_Omega [ (p-1)/(2(p+1)) |u|^(p+1)/|x| + (1/2)|slashed u|^2/|x| ] dx dt,

with an extra +pi*mu (inward) / -pi*mu (outward) on the left when the polygon
touches the t-axis.  ``flux_balance`` assembles the per-segment integrals in
exactly this convention, so a perfectly resolved solution gives

    residual = sum(segment values) + mu_term + morawetz_term = 0

for both energy species.  The per-segment integrands (including the 1/sqrt(2)
and 1/(2 sqrt(2)) prefactors of the cone fluxes, here folded into the
sqrt(2) r^2 dOmega dt cone surface measure) are:

    segment (traversal)        inward-energy integrand          outward-energy integrand
    time slice (outward -t)    - e-                             - e+
    time slice (outward +t)    + e-                             + e+
    cylinder (normal +r)       -|L+u|^2/4 + |sl u|^2/4 + P/2    +|L-u|^2/4 - |sl u|^2/4 - P/2
    cylinder (normal -r)       +|L+u|^2/4 - |sl u|^2/4 - P/2    -|L-u|^2/4 + |sl u|^2/4 + P/2
    backward cone (up)         + [|sl u|^2/2 + 2P/(p+1)... ]    + |L-u|^2/2
    forward cone (up)          - |L+u|^2/2                      - [|sl u|^2/2 + |u|^(p+1)/(p+1)]

with P = |u|^(p+1)/(p+1), e-+ the inward/outward densities, "up"/"down"
flipping the sign, and cone entries meaning integrals of (...) r^2 dOmega dt.

The measure mu is estimated two ways: the origin oracle
d mu = |u(0,t)|^2 dt (valid for smooth solutions) and a Richardson
extrapolation in radius of the cylinder integral whose r -> 0 limit defines
pi*mu.  Cumulative curves P(t) returned by ``estimate_mu`` satisfy
mu([a, b]) = P(b) - P(a) (no factor of pi).

Ledger segments are independent pure integrals over an immutable trace and
are summed in a fixed order, so results are bit-reproducible run to run.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Array,
    AxisymGrid,
    ConfigError,
    RadialGrid,
    RegionSpec,
    Segment,
    SegmentType,
    SpacetimeTrace,
    TraceWindowError,
    validate_region,
)
from .diagnostics import energies

logger = logging.getLogger(__name__)

CONE_TIP_CELLS = 2.0  # cone integrals stop where the radius falls below 2 grid cells
MU_RADII_CELLS = (4.0, 8.0, 16.0)
THETA_NODES = 64

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _theta_nodes(trace: SpacetimeTrace, n: int = THETA_NODES):
    """Angular nodes/weights: int f dOmega = 2*pi * sum w_k f(theta_k)."""
    if isinstance(trace.grid, RadialGrid):
        return np.zeros(1), np.asarray([2.0])
    c, w = _gl(n)
    return np.arccos(np.clip(c, -1.0, 1.0)), w


def _time_nodes(trace: SpacetimeTrace, t1: float, t2: float, order: int = 4):
    """Composite Gauss-Legendre nodes aligned with stored-frame intervals.

    Fields are linear in t between frames, so per-interval Gauss nodes of
    modest order integrate the interpolant's polynomial integrands exactly.
    """
    if t2 <= t1:
        return np.empty(0), np.empty(0)
    tol = 1e-9 * max(1.0, abs(trace.t_last))
    if t1 < trace.t_first - tol or t2 > trace.t_last + tol:
        raise TraceWindowError(
            f"[{t1}, {t2}] outside stored window [{trace.t_first}, {trace.t_last}]"
        )
    x, w = _gl(order)
    times = trace.times
    if len(times) == 1:
        return np.empty(0), np.empty(0)
    ts, ws = [], []
    j0 = max(0, int(np.searchsorted(times, t1, side="right")) - 1)
    for j in range(j0, len(times) - 1):
        if float(times[j]) >= t2:
            break
        a = max(t1, float(times[j]))
        b = min(t2, float(times[j + 1]))
        if b - a <= 1e-14:
            continue
        ts.append(0.5 * (a + b) + 0.5 * (b - a) * x)
        ws.append(0.5 * (b - a) * w)
    if not ts:
        return np.empty(0), np.empty(0)
    return np.concatenate(ts), np.concatenate(ws)


def _min_spacing(trace: SpacetimeTrace) -> float:
    return trace.grid.min_spacing


# ---------------------------------------------------------------------------
# Integrand table
# ---------------------------------------------------------------------------


def _fields(trace: SpacetimeTrace, t: float, r, theta):
    u, ut, ur, slash2, rr = trace._sample_full(np.asarray(r, float), np.asarray(theta, float), t)
    return u, ut, ur, slash2, rr


def _surface_density(trace, t, r, theta, name: str) -> Array:
    """Pointwise surface integrands used by cones and cylinders."""
    p = trace.problem.p
    u, ut, ur, slash2, rr = _fields(trace, t, r, theta)
    pot = np.abs(u) ** (p + 1)
    if name == "pot_slash":  # |u|^(p+1)/(p+1) + |slashed u|^2/2
        return pot / (p + 1) + 0.5 * slash2
    lu = ur + u / rr
    if name == "lp_sq_half":
        return 0.5 * (lu + ut) ** 2
    if name == "lm_sq_half":
        return 0.5 * (lu - ut) ** 2
    if name == "cyl_inward_energy":  # outward-normal cylinder, inward energy
        return -0.25 * (lu + ut) ** 2 + 0.25 * slash2 + pot / (2.0 * (p + 1))
    if name == "cyl_outward_energy":  # outward-normal cylinder, outward energy
        return 0.25 * (lu - ut) ** 2 - 0.25 * slash2 - pot / (2.0 * (p + 1))
    if name == "mu_cylinder":  # integrand whose r -> 0 cylinder limit is pi mu
        return 0.25 * (lu + ut) ** 2 - 0.25 * slash2 - pot / (2.0 * (p + 1))
    raise KeyError(name)


def _cone_like_integral(trace, name: str, radius_of_t, t1: float, t2: float) -> float:
    """int_{t1}^{t2} r(t)^2 int_{S^2} density dOmega dt."""
    theta, wth = _theta_nodes(trace)
    ts, ws = _time_nodes(trace, t1, t2)
    total = 0.0
    for t, wt in zip(ts, ws):
        r = radius_of_t(t)
        vals = _surface_density(trace, float(t), np.full_like(theta, r), theta, name)
        total += wt * r**2 * float(np.dot(wth, vals))
    return 2.0 * np.pi * total


# ---------------------------------------------------------------------------
# Cone and cylinder fluxes
# ---------------------------------------------------------------------------

CONE_KINDS = ("Q--", "Q+-", "Q-+", "Q++")


def cone_flux(trace: SpacetimeTrace, kind: str, param: float, t1: float, t2: float) -> float:
    """Energy flux through a truncated light cone.

    kind is "Qes" with e the energy species (- inward, + outward) and s the
    cone species (- backward |x|+t = s, + forward t-|x| = tau); ``param`` is
    s or tau accordingly.  The integrand follows the surface-integral table;
    the tip is truncated at radius 2*dr and the clipped sliver is left to the
    balance residual.
    """
    if kind not in CONE_KINDS:
        raise ConfigError(f"unknown cone flux kind {kind!r}; known {CONE_KINDS}")
    energy, cone = kind[1], kind[2]
    h = _min_spacing(trace)
    tip = CONE_TIP_CELLS * h
    if cone == "-":
        if not (t1 < t2 <= param + 1e-12):
            raise ConfigError("backward cone needs t1 < t2 <= s")
        lo, hi = t1, min(t2, param - tip)
        radius_of_t = lambda t: param - t
        max_radius = param - lo
        name = "pot_slash" if energy == "-" else "lm_sq_half"
    else:
        if not (param - 1e-12 <= t1 < t2):
            raise ConfigError("forward cone needs tau <= t1 < t2")
        lo, hi = max(t1, param + tip), t2
        radius_of_t = lambda t: t - param
        max_radius = hi - param
        name = "lp_sq_half" if energy == "-" else "pot_slash"
    if hi <= lo:
        logger.debug("cone %s at %g fully inside the tip truncation; flux 0", kind, param)
        return 0.0
    if hi < t2 - 1e-12 or lo > t1 + 1e-12:
        logger.debug("cone %s tip-truncated to [%g, %g]", kind, lo, hi)
    if not trace.grid.contains_radius(max_radius):
        raise TraceWindowError(f"cone radius {max_radius:g} exits the grid")
    return _cone_like_integral(trace, name, radius_of_t, lo, hi)


def cylinder_flux(
    trace: SpacetimeTrace,
    r0: float,
    t1: float,
    t2: float,
    side: str = "inward-energy",
    orientation: str = "outward",
) -> float:
    """Flux of the chosen energy species through |x| = r0, t in [t1, t2].

    ``orientation`` is the direction of the surface normal; flipping it
    negates the value.
    """
    h = _min_spacing(trace)
    if r0 < CONE_TIP_CELLS * h:
        raise ConfigError(f"cylinder radius {r0:g} below the 2*dr floor")
    if not trace.grid.contains_radius(r0):
        raise TraceWindowError(f"cylinder radius {r0:g} exits the grid")
    if side not in ("inward-energy", "outward-energy"):
        raise ConfigError(f"unknown side {side!r}")
    if orientation not in ("outward", "inward"):
        raise ConfigError(f"unknown orientation {orientation!r}")
    name = "cyl_inward_energy" if side == "inward-energy" else "cyl_outward_energy"
    value = _cone_like_integral(trace, name, lambda t: r0, t1, t2)
    return value if orientation == "outward" else -value


# ---------------------------------------------------------------------------
# Morawetz integral
# ---------------------------------------------------------------------------


def morawetz_integral(trace: SpacetimeTrace, region: RegionSpec) -> float:
    """M(Omega) over the polygon's spacetime region."""
    region = _normalized(region)
    t_lo, t_hi = region.t_range
    _, r_hi = region.r_range
    if not trace.grid.contains_radius(max(r_hi, 1e-9)):
        raise TraceWindowError("region exits the grid")
    p = trace.problem.p
    theta, wth = _theta_nodes(trace)
    ts, ws = _time_nodes(trace, t_lo, t_hi)
    h = _min_spacing(trace)
    total = 0.0
    x_gl, w_gl = _gl(4)
    for t, wt in zip(ts, ws):
        for a, b in region.r_sections(float(t)):
            if b - a < 1e-14:
                continue
            n_seg = int(np.clip(math.ceil((b - a) / (4.0 * h)), 4, 256))
            edges = np.linspace(a, b, n_seg + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
            half = 0.5 * (edges[1:] - edges[:-1])[:, None]
            r_nodes = (mid + half * x_gl[None, :]).ravel()
            r_w = (half * w_gl[None, :]).ravel()
            u, _, _, slash2, rr = _fields(
                trace, float(t), r_nodes[:, None], theta[None, :]
            )
            dens = (p - 1) / (2.0 * (p + 1)) * np.abs(u) ** (p + 1) + 0.5 * slash2
            # 1/|x| against the r^2 volume factor leaves one power of r
            total += wt * float(np.sum((r_w * r_nodes)[:, None] * wth[None, :] * dens))
    return 2.0 * np.pi * total


# ---------------------------------------------------------------------------
# The origin measure mu
# ---------------------------------------------------------------------------


@dataclass
class MuEstimate:
    """Cumulative mu([t1, t]) under both estimators.

    P curves exclude the factor pi: mu([a, b]) = P(b) - P(a).  ``P`` aliases
    the curve of the requested primary estimator.
    """

    times: Array
    P_origin: Array
    P_cylinder: Array
    method: str
    radii: tuple[float, ...]
    discrepancy: float

    @property
    def P(self) -> Array:
        return self.P_origin if self.method == "origin_oracle" else self.P_cylinder

    def nondecreasing(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.P) >= -tol))


def _origin_series(trace: SpacetimeTrace) -> Array:
    cached = getattr(trace, "_origin_series_cache", None)
    if cached is not None:
        return cached
    vals = np.empty(trace.n_frames)
    for j in range(trace.n_frames):
        vals[j] = trace.origin_value(j)
    trace._origin_series_cache = vals  # type: ignore[attr-defined]
    return vals


def estimate_mu(
    trace: SpacetimeTrace, t1: float, t2: float, method: str = "origin_oracle"
) -> MuEstimate:
    """Cumulative origin measure over [t1, t2] by both estimators.

    origin_oracle: P(t) = int |u(0, s)|^2 ds (the smooth-solution density).
    cylinder_extrapolation: the defining cylinder integral evaluated at radii
    (4, 8, 16)*dr and Richardson-extrapolated to r -> 0 assuming leading
    order r (the empirical behaviour), then divided by pi.
    """
    if method not in ("origin_oracle", "cylinder_extrapolation"):
        raise ConfigError(f"unknown mu estimator {method!r}")
    tol = 1e-9 * max(1.0, abs(trace.t_last))
    if t1 < trace.t_first - tol or t2 > trace.t_last + tol or t2 <= t1:
        raise TraceWindowError("mu window outside trace")
    inner = trace.times[(trace.times > t1) & (trace.times < t2)]
    ts = np.unique(np.concatenate([[t1], inner, [t2]]))

    origin_frames = _origin_series(trace)
    u0 = np.interp(ts, trace.times, origin_frames)
    p_origin = np.concatenate([[0.0], np.cumsum(0.5 * (u0[1:] ** 2 + u0[:-1] ** 2) * np.diff(ts))])

    h = _min_spacing(trace)
    radii = tuple(c * h for c in MU_RADII_CELLS)
    theta, wth = _theta_nodes(trace)
    curves = []
    for r0 in radii:
        cum = np.zeros(len(ts))
        for k in range(len(ts) - 1):
            seg_ts, seg_ws = _time_nodes(trace, float(ts[k]), float(ts[k + 1]), order=2)
            val = 0.0
            for t, wt in zip(seg_ts, seg_ws):
                dens = _surface_density(trace, float(t), np.full_like(theta, r0), theta, "mu_cylinder")
                val += wt * r0**2 * float(np.dot(wth, dens))
            cum[k + 1] = cum[k] + 2.0 * np.pi * val
        curves.append(cum)
    v1, v2, v4 = curves
    p_cyl = (8.0 * v1 - 6.0 * v2 + v4) / (3.0 * np.pi)

    scale = max(float(p_origin[-1]), 1e-30)
    discrepancy = float(np.max(np.abs(p_origin - p_cyl)) / scale)
    return MuEstimate(
        times=ts,
        P_origin=p_origin,
        P_cylinder=p_cyl,
        method=method,
        radii=radii,
        discrepancy=discrepancy,
    )


def pi_mu(trace: SpacetimeTrace, t1: float, t2: float) -> float:
    """pi * mu([t1, t2]) via the primary (origin oracle) estimator."""
    if t2 <= t1:
        return 0.0
    est = estimate_mu_origin_only(trace, t1, t2)
    return math.pi * float(est[-1])


def estimate_mu_origin_only(trace: SpacetimeTrace, t1: float, t2: float) -> Array:
    inner = trace.times[(trace.times > t1) & (trace.times < t2)]
    ts = np.unique(np.concatenate([[t1], inner, [t2]]))
    u0 = np.interp(ts, trace.times, _origin_series(trace))
    return np.concatenate([[0.0], np.cumsum(0.5 * (u0[1:] ** 2 + u0[:-1] ** 2) * np.diff(ts))])


# ---------------------------------------------------------------------------
# Balance ledgers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerEntry:
    segment_id: str
    seg_type: str
    integrand: str
    value: float


@dataclass
class FluxLedger:
    """Itemized boundary integrals for one region and one energy species.

    residual = sum(segment values) + mu_term + morawetz_term, which vanishes
    for an exactly resolved solution.
    """

    region_id: str
    which: str  # "inward" | "outward"
    segments: list[LedgerEntry]
    mu_term: float
    morawetz_term: float
    residual: float
    meta: dict = field(default_factory=dict)

    @property
    def segments_total(self) -> float:
        return float(sum(e.value for e in self.segments))

    def to_dict(self) -> dict:
        return {
            "region_id": self.region_id,
            "which": self.which,
            "segments": [
                {
                    "segment_id": e.segment_id,
                    "type": e.seg_type,
                    "integrand": e.integrand,
                    "value": e.value,
                }
                for e in self.segments
            ],
            "mu_term": self.mu_term,
            "morawetz_term": self.morawetz_term,
            "residual": self.residual,
            "meta": self.meta,
        }

    def csv_rows(self) -> list[dict]:
        return [
            {
                "region_id": self.region_id,
                "segment_id": e.segment_id,
                "type": e.seg_type,
                "value": e.value,
                "mu_term": self.mu_term,
                "morawetz_term": self.morawetz_term,
                "residual": self.residual,
            }
            for e in self.segments
        ]


def _normalized(region: RegionSpec) -> RegionSpec:
    try:
        region.segments
    except Exception:
        return validate_region(region)
    return region


def _slice_value(trace, seg: Segment, which: str) -> float:
    t = seg.start[1]
    r_lo = min(seg.start[0], seg.end[0])
    r_hi = max(seg.start[0], seg.end[0])
    state = trace.state_at(t)
    _, em, ep = energies(state, r_lo, r_hi)
    inner = em if which == "inward" else ep
    sign = -1.0 if seg.kind is SegmentType.TIME_SLICE_UP else +1.0
    return sign * inner


def _cylinder_value(trace, seg: Segment, which: str) -> float:
    r0 = seg.start[0]
    t_lo = min(seg.start[1], seg.end[1])
    t_hi = max(seg.start[1], seg.end[1])
    orientation = "outward" if seg.kind is SegmentType.CYLINDER_OUTWARD else "inward"
    side = "inward-energy" if which == "inward" else "outward-energy"
    return cylinder_flux(trace, r0, t_lo, t_hi, side=side, orientation=orientation)


def _backward_cone_value(trace, seg: Segment, which: str) -> float:
    s = seg.start[0] + seg.start[1]
    t_lo = min(seg.start[1], seg.end[1])
    t_hi = max(seg.start[1], seg.end[1])
    kind = "Q--" if which == "inward" else "Q+-"
    sign = +1.0 if seg.kind is SegmentType.BACKWARD_CONE_UP else -1.0
    return sign * cone_flux(trace, kind, s, t_lo, t_hi)


def _forward_cone_value(trace, seg: Segment, which: str) -> float:
    tau = seg.start[1] - seg.start[0]
    t_lo = min(seg.start[1], seg.end[1])
    t_hi = max(seg.start[1], seg.end[1])
    kind = "Q-+" if which == "inward" else "Q++"
    sign = -1.0 if seg.kind is SegmentType.FORWARD_CONE_UP else +1.0
    return sign * cone_flux(trace, kind, tau, t_lo, t_hi)


_INTEGRAND_LABEL = {
    ("inward", SegmentType.TIME_SLICE_UP): "-e_minus",
    ("inward", SegmentType.TIME_SLICE_DOWN): "+e_minus",
    ("outward", SegmentType.TIME_SLICE_UP): "-e_plus",
    ("outward", SegmentType.TIME_SLICE_DOWN): "+e_plus",
    ("inward", SegmentType.CYLINDER_OUTWARD): "-|L+u|^2/4+|sl|^2/4+pot/2",
    ("inward", SegmentType.CYLINDER_INWARD): "+|L+u|^2/4-|sl|^2/4-pot/2",
    ("outward", SegmentType.CYLINDER_OUTWARD): "+|L-u|^2/4-|sl|^2/4-pot/2",
    ("outward", SegmentType.CYLINDER_INWARD): "-|L-u|^2/4+|sl|^2/4+pot/2",
    ("inward", SegmentType.BACKWARD_CONE_UP): "+[pot+|sl|^2/2]",
    ("inward", SegmentType.BACKWARD_CONE_DOWN): "-[pot+|sl|^2/2]",
    ("outward", SegmentType.BACKWARD_CONE_UP): "+|L-u|^2/2",
    ("outward", SegmentType.BACKWARD_CONE_DOWN): "-|L-u|^2/2",
    ("inward", SegmentType.FORWARD_CONE_UP): "-|L+u|^2/2",
    ("inward", SegmentType.FORWARD_CONE_DOWN): "+|L+u|^2/2",
    ("outward", SegmentType.FORWARD_CONE_UP): "-[pot+|sl|^2/2]",
    ("outward", SegmentType.FORWARD_CONE_DOWN): "+[pot+|sl|^2/2]",
    ("inward", SegmentType.T_AXIS): "+pi*mu",
    ("outward", SegmentType.T_AXIS): "-pi*mu",
}


def flux_balance(trace: SpacetimeTrace, region: RegionSpec, which: str = "inward") -> FluxLedger:
    """Assemble the energy-flux balance ledger for one region."""
    if which not in ("inward", "outward"):
        raise ConfigError(f"which must be inward/outward, got {which!r}")
    region = _normalized(region)
    t_lo, t_hi = region.t_range
    tol = 1e-9 * max(1.0, abs(trace.t_last))
    if t_lo < trace.t_first - tol or t_hi > trace.t_last + tol:
        raise TraceWindowError("region outside the stored time window")

    entries: list[LedgerEntry] = []
    mu_term = 0.0
    for i, seg in enumerate(region.segments):
        label = _INTEGRAND_LABEL[(which, seg.kind)]
        if seg.kind in (SegmentType.TIME_SLICE_UP, SegmentType.TIME_SLICE_DOWN):
            value = _slice_value(trace, seg, which)
        elif seg.kind in (SegmentType.CYLINDER_OUTWARD, SegmentType.CYLINDER_INWARD):
            value = _cylinder_value(trace, seg, which)
        elif seg.kind in (SegmentType.BACKWARD_CONE_UP, SegmentType.BACKWARD_CONE_DOWN):
            value = _backward_cone_value(trace, seg, which)
        elif seg.kind in (SegmentType.FORWARD_CONE_UP, SegmentType.FORWARD_CONE_DOWN):
            value = _forward_cone_value(trace, seg, which)
        else:  # T_AXIS
            t_a = min(seg.start[1], seg.end[1])
            t_b = max(seg.start[1], seg.end[1])
            sgn = +1.0 if which == "inward" else -1.0
            mu_term += sgn * pi_mu(trace, t_a, t_b)
            entries.append(LedgerEntry(f"{i}:{seg.kind.value}", seg.kind.value, label, 0.0))
            continue
        entries.append(LedgerEntry(f"{i}:{seg.kind.value}", seg.kind.value, label, float(value)))

    m = morawetz_integral(trace, region)
    morawetz_term = m if which == "inward" else -m
    residual = float(sum(e.value for e in entries) + mu_term + morawetz_term)
    return FluxLedger(
        region_id=region.region_id,
        which=which,
        segments=entries,
        mu_term=float(mu_term),
        morawetz_term=float(morawetz_term),
        residual=residual,
        meta={
            "backend": trace.grid.backend,
            "resolution": _min_spacing(trace),
            "store_stride": trace.store_stride,
        },
    )


def full_energy_closure(trace: SpacetimeTrace, region: RegionSpec) -> float:
    """Defect of the classical full-energy balance over the region.

    The inward and outward ledgers for the same region carry opposite mu and
    Morawetz terms, so their segment totals must cancel up to the annulus
    boundary terms of the inward/outward split (exactly zero for regions whose
    slices cover the full support).
    """
    lin = flux_balance(trace, region, "inward")
    lout = flux_balance(trace, region, "outward")
    return lin.segments_total + lout.segments_total
