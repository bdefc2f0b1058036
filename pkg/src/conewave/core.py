"""Grids, discrete fields, spacetime traces and region geometry.

Everything downstream (solvers, energy diagnostics, flux ledgers) is built on
four ingredients defined here:

- cell-centered grids for the radial line (``RadialGrid``) and the
  axisymmetric (rho, z) half-plane (``AxisymGrid``); nodes sit at half-integer
  multiples of the spacing so the coordinate singularities at r = 0 and
  rho = 0 are never sampled,
- immutable field snapshots (``SimState``),
- time-ordered stacks of snapshots (``SpacetimeTrace``) supporting bilinear
  (space) x linear (time) interpolation of u, u_t and spherical derivatives
  at arbitrary (r, theta, t) inside the simulated window,
- polygonal regions of the (r, t) half-plane (``RegionSpec``) whose edges are
  restricted to time slices, cylinders, characteristic lines t +- r = const
  and the t-axis.

Conventions: theta is the polar angle measured from the +z axis, so a point
(r, theta) maps to cylindrical coordinates rho = r sin(theta),
z = r cos(theta).  Polygons are normalized to counterclockwise orientation
(region on the left of each directed edge).

States and traces are immutable once a run completes; interpolation and all
reductions built on them are pure functions, safe to evaluate concurrently on
shared read-only data.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import NDArray

Array = NDArray[np.float64]

_SLOPE_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid physical or numerical configuration."""


class RegionError(ValueError):
    """Malformed spacetime region polygon."""


class TraceWindowError(ValueError):
    """Query outside the stored spacetime window."""


@dataclass(frozen=True)
class ProblemSpec:
    """Nonlinearity exponent p of the defocusing equation u_tt - Lap u = -|u|^(p-1) u.

    The critical regularity s_p = 3/2 - 2/(p-1) is derived from p.
    """

    p: float = 3.0

    def __post_init__(self) -> None:
        if not (3.0 <= self.p <= 5.0):
            raise ConfigError(f"nonlinearity exponent p={self.p} outside [3, 5]")

    @property
    def s_p(self) -> float:
        return 1.5 - 2.0 / (self.p - 1.0)


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centered 1D radial grid: nodes r_i = (i + 1/2) dr, i = 0..n_r-1."""

    r_max: float
    n_r: int

    backend = "radial1d"

    def __post_init__(self) -> None:
        if self.r_max <= 0 or self.n_r < 8:
            raise ConfigError("radial grid needs r_max > 0 and n_r >= 8")

    @property
    def dr(self) -> float:
        return self.r_max / self.n_r

    @property
    def r(self) -> Array:
        return (np.arange(self.n_r) + 0.5) * self.dr

    @property
    def min_spacing(self) -> float:
        return self.dr

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_r,)

    def contains_radius(self, r: float) -> bool:
        return 0.0 <= r <= self.r_max - 0.5 * self.dr


@dataclass(frozen=True)
class AxisymGrid:
    """Cell-centered grid on the half-plane [0, p_max] x [-z_max, z_max].

    Nodes: rho_i = (i + 1/2) drho, z_j = -z_max + (j + 1/2) dz.  Fields are
    stored with shape (n_rho, n_z).
    """

    p_max: float
    z_max: float
    n_rho: int
    n_z: int

    backend = "axisym2d"

    def __post_init__(self) -> None:
        if min(self.p_max, self.z_max) <= 0 or min(self.n_rho, self.n_z) < 8:
            raise ConfigError("axisym grid needs positive extents and >= 8 cells per axis")

    @property
    def drho(self) -> float:
        return self.p_max / self.n_rho

    @property
    def dz(self) -> float:
        return 2.0 * self.z_max / self.n_z

    @property
    def rho(self) -> Array:
        return (np.arange(self.n_rho) + 0.5) * self.drho

    @property
    def z(self) -> Array:
        return -self.z_max + (np.arange(self.n_z) + 0.5) * self.dz

    @property
    def min_spacing(self) -> float:
        return min(self.drho, self.dz)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_rho, self.n_z)

    def contains_radius(self, r: float) -> bool:
        # largest inscribed sphere around the origin
        return 0.0 <= r <= min(self.p_max, self.z_max) - self.min_spacing


Grid = RadialGrid | AxisymGrid


@dataclass(frozen=True)
class SimState:
    """Solution sample (u, u_t) on a grid at one time."""

    u: Array
    ut: Array
    t: float
    grid: Grid
    problem: ProblemSpec

    def __post_init__(self) -> None:
        if self.u.shape != self.grid.shape or self.ut.shape != self.grid.shape:
            raise ConfigError(
                f"field shape {self.u.shape}/{self.ut.shape} does not match grid {self.grid.shape}"
            )

    def validate_finite(self) -> None:
        if not (np.isfinite(self.u).all() and np.isfinite(self.ut).all()):
            raise FloatingPointError(f"non-finite field samples at t={self.t}")


def _centered_derivative(f: Array, h: float, axis: int, parity: int) -> Array:
    """Second-order centered first derivative with a reflected ghost layer.

    ``parity`` is +1 for fields even across the low boundary of ``axis``
    (value mirrors) and -1 for odd fields (value mirrors with sign flip).
    The high boundary uses a zero ghost: all evolved fields vanish there by
    causal grid sizing.
    """
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (f[1] - parity * f[0]) / (2.0 * h)
    out[-1] = (0.0 - f[-2]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def _centered_derivative4(f: Array, h: float, parity: int) -> Array:
    """Fourth-order centered first derivative of a 1D array.

    Used by grid-level energy diagnostics, where the decomposition identity
    E- + E+ = E must hold well below the O(h^2) level of the basic stencil.
    Ghosts: reflected with ``parity`` at the low end, zero at the high end.
    """
    n = f.shape[0]
    g = np.empty(n + 4, dtype=f.dtype)
    g[2:-2] = f
    g[1] = parity * f[0]
    g[0] = parity * f[1]
    g[-2] = 0.0
    g[-1] = 0.0
    return (-g[4:] + 8.0 * g[3:-1] - 8.0 * g[1:-3] + g[:-4]) / (12.0 * h)


class _FrameCache:
    """Small LRU for per-frame derived fields (keeps axisym memory bounded)."""

    def __init__(self, maxsize: int = 6):
        self._store: OrderedDict[tuple[int, str], Array] = OrderedDict()
        self.maxsize = maxsize

    def get(self, key: tuple[int, str]):
        if key in self._store:
            self._store.move_to_end(key)
            return self._store[key]
        return None

    def put(self, key: tuple[int, str], value: Array) -> None:
        self._store[key] = value
        self._store.move_to_end(key)
        while len(self._store) > self.maxsize:
            self._store.popitem(last=False)


@dataclass
class SpacetimeTrace:
    """Time-ordered solution snapshots at uniform spacing ``store_stride * dt``.

    ``u_frames`` and ``ut_frames`` have shape (n_times,) + grid.shape.
    Interpolation is linear in time between frames and (bi)linear in space;
    spatial derivatives are centered differences on the grid, interpolated.
    """

    grid: Grid
    problem: ProblemSpec
    times: Array
    u_frames: Array
    ut_frames: Array
    store_stride: int = 1
    _cache: _FrameCache = field(default_factory=_FrameCache, repr=False)

    def __post_init__(self) -> None:
        if len(self.times) != len(self.u_frames) or len(self.times) != len(self.ut_frames):
            raise ConfigError("frame count mismatch")
        if len(self.times) > 1:
            dts = np.diff(self.times)
            if not (dts > 0).all():
                raise ConfigError("trace times must be strictly increasing")
            if not np.allclose(dts, dts[0], rtol=1e-9, atol=1e-12):
                raise ConfigError("trace times must be uniformly spaced")

    @property
    def t_first(self) -> float:
        return float(self.times[0])

    @property
    def t_last(self) -> float:
        return float(self.times[-1])

    @property
    def n_frames(self) -> int:
        return len(self.times)

    # -- frame bookkeeping -------------------------------------------------

    def _bracket(self, t: float) -> tuple[int, float]:
        tol = 1e-9 * max(1.0, abs(self.t_last))
        if t < self.t_first - tol or t > self.t_last + tol:
            raise TraceWindowError(
                f"t={t} outside stored window [{self.t_first}, {self.t_last}]"
            )
        if self.n_frames == 1:
            return 0, 0.0
        dt = (self.t_last - self.t_first) / (self.n_frames - 1)
        x = (t - self.t_first) / dt
        j = int(np.clip(np.floor(x), 0, self.n_frames - 2))
        return j, float(np.clip(x - j, 0.0, 1.0))

    def _frame_field(self, j: int, name: str) -> Array:
        """Derived per-frame fields, cached: radial du; axisym u_rho / u_z."""
        cached = self._cache.get((j, name))
        if cached is not None:
            return cached
        if isinstance(self.grid, RadialGrid):
            if name == "du":
                out = _centered_derivative(self.u_frames[j], self.grid.dr, 0, +1)
            else:
                raise KeyError(name)
        else:
            if name == "u_rho":
                out = _centered_derivative(self.u_frames[j], self.grid.drho, 0, +1)
            elif name == "u_z":
                g = self.u_frames[j]
                dz = self.grid.dz
                out = np.empty_like(g)
                out[:, 1:-1] = (g[:, 2:] - g[:, :-2]) / (2.0 * dz)
                out[:, 0] = (g[:, 1] - 0.0) / (2.0 * dz)
                out[:, -1] = (0.0 - g[:, -2]) / (2.0 * dz)
            else:
                raise KeyError(name)
        self._cache.put((j, name), out)
        return out

    def state_at(self, t: float) -> SimState:
        """Linear-in-time interpolated snapshot."""
        j, a = self._bracket(t)
        if a == 0.0:
            u, ut = self.u_frames[j], self.ut_frames[j]
        else:
            u = (1.0 - a) * self.u_frames[j] + a * self.u_frames[j + 1]
            ut = (1.0 - a) * self.ut_frames[j] + a * self.ut_frames[j + 1]
        return SimState(u=u, ut=ut, t=t, grid=self.grid, problem=self.problem)

    # -- point sampling ----------------------------------------------------

    def sample(self, r, theta, t: float):
        """Interpolate (u, u_t, du/dr, u_theta) at polar points for one time.

        ``r`` and ``theta`` broadcast together.  theta is ignored on the
        radial backend (u_theta = 0 identically).
        """
        u, ut, ur, _, _ = self._sample_full(np.asarray(r, float), np.asarray(theta, float), t)
        u_theta = self._u_theta(np.asarray(r, float), np.asarray(theta, float), t)
        return u, ut, ur, u_theta

    def _u_theta(self, r: Array, theta: Array, t: float) -> Array:
        if isinstance(self.grid, RadialGrid):
            return np.zeros(np.broadcast_shapes(r.shape, theta.shape))
        j, a = self._bracket(t)
        rho = r * np.sin(theta)
        z = r * np.cos(theta)
        u_rho = self._interp_frames("u_rho", j, a, rho, z, parity=-1)
        u_z = self._interp_frames("u_z", j, a, rho, z, parity=+1)
        return r * (u_rho * np.cos(theta) - u_z * np.sin(theta))

    def _sample_full(self, r: Array, theta: Array, t: float):
        """Return (u, ut, ur, |slashed grad u|^2, r) broadcast over inputs."""
        j, a = self._bracket(t)
        r, theta = np.broadcast_arrays(r, theta)
        r = np.asarray(r, float)
        theta = np.asarray(theta, float)
        if isinstance(self.grid, RadialGrid):
            if (r > self.grid.r_max - 0.5 * self.grid.dr).any() or (r < 0).any():
                raise TraceWindowError("radius outside radial grid")
            u = self._lerp_values("u", j, a, r, self._interp_radial)
            ut = self._lerp_values("ut", j, a, r, self._interp_radial)
            ur = self._lerp_values("du", j, a, r, self._interp_radial_odd)
            slash2 = np.zeros_like(u)
            return u, ut, ur, slash2, r
        rho = r * np.sin(theta)
        z = r * np.cos(theta)
        if (rho > self.grid.p_max - 0.5 * self.grid.drho).any() or (
            np.abs(z) > self.grid.z_max - 0.5 * self.grid.dz
        ).any():
            raise TraceWindowError("point outside axisym grid")
        u = self._interp_frames("u", j, a, rho, z, parity=+1)
        ut = self._interp_frames("ut", j, a, rho, z, parity=+1)
        u_rho = self._interp_frames("u_rho", j, a, rho, z, parity=-1)
        u_z = self._interp_frames("u_z", j, a, rho, z, parity=+1)
        sin_t, cos_t = np.sin(theta), np.cos(theta)
        ur = u_rho * sin_t + u_z * cos_t
        slash2 = (u_rho * cos_t - u_z * sin_t) ** 2
        return u, ut, ur, slash2, r

    def _frame_array(self, j: int, name: str) -> Array:
        if name == "u":
            return self.u_frames[j]
        if name == "ut":
            return self.ut_frames[j]
        return self._frame_field(j, name)

    def _lerp_values(self, name: str, j: int, a: float, r: Array, interp) -> Array:
        v0 = interp(self._frame_array(j, name), r)
        if a == 0.0:
            return v0
        return (1.0 - a) * v0 + a * interp(self._frame_array(j + 1, name), r)

    def _interp_frames(self, name: str, j: int, a: float, rho: Array, z: Array, parity: int) -> Array:
        v0 = _bilinear(self._frame_array(j, name), self.grid, rho, z, parity)
        if a == 0.0:
            return v0
        v1 = _bilinear(self._frame_array(j + 1, name), self.grid, rho, z, parity)
        return (1.0 - a) * v0 + a * v1

    def _interp_radial(self, f: Array, r: Array) -> Array:
        """Linear interp on cell centers; even quadratic fit below the first node."""
        g = self.grid
        out = np.interp(r, g.r, f)
        near = r < g.r[0]
        if near.any():
            # even field: fit a + b r^2 through the first two nodes
            aa = (9.0 * f[0] - f[1]) / 8.0
            bb = (f[1] - f[0]) / (2.0 * g.dr**2)
            out = np.where(near, aa + bb * r**2, out)
        return out

    def _interp_radial_odd(self, f: Array, r: Array) -> Array:
        """As above for odd fields (e.g. du/dr of an even u): linear through 0."""
        g = self.grid
        out = np.interp(r, g.r, f)
        near = r < g.r[0]
        if near.any():
            out = np.where(near, f[0] * r / g.r[0], out)
        return out

    def origin_value(self, j: int) -> float:
        """u(0, t_j) by even extrapolation through the nearest nodes."""
        if isinstance(self.grid, RadialGrid):
            u = self.u_frames[j]
            return float((9.0 * u[0] - u[1]) / 8.0)
        g = self.grid
        u = self.u_frames[j]
        jz = int(np.searchsorted(g.z, 0.0))
        # average the two z-neighbours of z=0 in the first rho column, then
        # remove the O(drho^2) bias with the second column (even in rho)
        c0 = 0.5 * (u[0, jz - 1] + u[0, jz])
        c1 = 0.5 * (u[1, jz - 1] + u[1, jz])
        return float((9.0 * c0 - c1) / 8.0)


def _bilinear(f: Array, grid: AxisymGrid, rho: Array, z: Array, parity: int) -> Array:
    """Bilinear interpolation on cell centers with reflected ghosts at the axis."""
    drho, dz = grid.drho, grid.dz
    x = rho / drho - 0.5
    y = (z + grid.z_max) / dz - 0.5
    i0 = np.floor(x).astype(np.int64)
    j0 = np.floor(y).astype(np.int64)
    fx = x - i0
    fy = y - j0
    j0 = np.clip(j0, 0, grid.n_z - 2)
    i1 = i0 + 1
    # axis reflection: index -1 maps onto column 0 with the field's parity
    sgn0 = np.where(i0 < 0, float(parity), 1.0)
    i0r = np.where(i0 < 0, -1 - i0, i0)
    i0r = np.clip(i0r, 0, grid.n_rho - 1)
    i1 = np.clip(i1, 0, grid.n_rho - 1)
    f00 = f[i0r, j0] * sgn0
    f01 = f[i0r, j0 + 1] * sgn0
    f10 = f[i1, j0]
    f11 = f[i1, j0 + 1]
    return (
        f00 * (1 - fx) * (1 - fy)
        + f01 * (1 - fx) * fy
        + f10 * fx * (1 - fy)
        + f11 * fx * fy
    )


def interpolate(trace: SpacetimeTrace, point: tuple[float, float, float]):
    """Interpolate (u, u_t, du/dr, u_theta) at a single (r, theta, t) point."""
    r, theta, t = point
    u, ut, ur, u_theta = trace.sample(np.asarray([r]), np.asarray([theta]), t)
    return float(u[0]), float(ut[0]), float(ur[0]), float(u_theta[0])


# ---------------------------------------------------------------------------
# Regions of the (r, t) half-plane
# ---------------------------------------------------------------------------


class SegmentType(Enum):
    """Edge classification of a normalized (counterclockwise) region polygon.

    The Up/Down suffix records the traversal direction with the region kept on
    the left: for sloped and vertical edges it is the sign of dt, for time
    slices the sign of dr.  TIME_SLICE_UP is therefore the lower face of a
    region (traversed toward increasing r) and TIME_SLICE_DOWN the upper face.
    """

    TIME_SLICE_UP = "TimeSliceUp"
    TIME_SLICE_DOWN = "TimeSliceDown"
    CYLINDER_OUTWARD = "CylinderOutward"
    CYLINDER_INWARD = "CylinderInward"
    BACKWARD_CONE_UP = "BackwardConeUp"
    BACKWARD_CONE_DOWN = "BackwardConeDown"
    FORWARD_CONE_UP = "ForwardConeUp"
    FORWARD_CONE_DOWN = "ForwardConeDown"
    T_AXIS = "TAxis"


@dataclass(frozen=True)
class Segment:
    start: tuple[float, float]  # (r, t)
    end: tuple[float, float]
    kind: SegmentType


@dataclass
class RegionSpec:
    """Closed simple polygon in the (r, t) half-plane, r >= 0.

    Every edge must be parallel to a coordinate axis or to t +- r = const.
    ``validate_region`` normalizes vertex order to counterclockwise and tags
    each edge with its ``SegmentType``.
    """

    vertices: list[tuple[float, float]]
    region_id: str = "region"
    _segments: list[Segment] | None = None

    @property
    def segments(self) -> list[Segment]:
        if self._segments is None:
            raise RegionError("region not normalized; call validate_region first")
        return self._segments

    @property
    def t_range(self) -> tuple[float, float]:
        ts = [t for _, t in self.vertices]
        return min(ts), max(ts)

    @property
    def r_range(self) -> tuple[float, float]:
        rs = [r for r, _ in self.vertices]
        return min(rs), max(rs)

    def r_sections(self, t: float) -> list[tuple[float, float]]:
        """Union of r-intervals where the horizontal line at ``t`` meets the region."""
        crossings: list[float] = []
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            (r0, t0), (r1, t1) = verts[i], verts[(i + 1) % n]
            if t0 == t1:
                continue
            lo, hi = (t0, t1) if t0 < t1 else (t1, t0)
            if lo <= t < hi:  # half-open rule avoids double counting vertices
                crossings.append(r0 + (r1 - r0) * (t - t0) / (t1 - t0))
        crossings.sort()
        out = []
        for k in range(0, len(crossings) - 1, 2):
            a, b = crossings[k], crossings[k + 1]
            if b - a > 0:
                out.append((a, b))
        return out


def _signed_area(vertices: list[tuple[float, float]]) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        r0, t0 = vertices[i]
        r1, t1 = vertices[(i + 1) % n]
        s += r0 * t1 - r1 * t0
    return 0.5 * s


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(v) < 1e-14:
            return 0
        return 1 if v > 0 else -1

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    return o1 != o2 and o3 != o4


def validate_region(spec: RegionSpec) -> RegionSpec:
    """Normalize orientation and classify edges; reject malformed polygons."""
    verts = [(float(r), float(t)) for r, t in spec.vertices]
    if len(verts) < 3:
        raise RegionError("polygon needs at least 3 vertices")
    if any(r < -1e-14 for r, _ in verts):
        raise RegionError("vertices must satisfy r >= 0")
    scale = max(max(abs(r), abs(t)) for r, t in verts) or 1.0
    # closed simple polygon: no repeated consecutive vertices, no crossings
    n = len(verts)
    for i in range(n):
        if verts[i] == verts[(i + 1) % n]:
            raise RegionError("degenerate zero-length edge")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                raise RegionError("self-intersecting polygon")
    area = _signed_area(verts)
    if abs(area) < 1e-14 * scale**2:
        raise RegionError("polygon has zero area")
    if area < 0:
        verts = verts[::-1]

    segments: list[Segment] = []
    for i in range(n):
        (r0, t0), (r1, t1) = verts[i], verts[(i + 1) % n]
        dr, dt = r1 - r0, t1 - t0
        if abs(dt) <= _SLOPE_TOL * scale:
            kind = SegmentType.TIME_SLICE_UP if dr > 0 else SegmentType.TIME_SLICE_DOWN
        elif abs(dr) <= _SLOPE_TOL * scale:
            if max(abs(r0), abs(r1)) <= _SLOPE_TOL * scale:
                kind = SegmentType.T_AXIS
            else:
                kind = SegmentType.CYLINDER_OUTWARD if dt > 0 else SegmentType.CYLINDER_INWARD
        elif abs(abs(dr) - abs(dt)) <= _SLOPE_TOL * scale:
            if dr * dt < 0:  # t + r = const
                kind = SegmentType.BACKWARD_CONE_UP if dt > 0 else SegmentType.BACKWARD_CONE_DOWN
            else:  # t - r = const
                kind = SegmentType.FORWARD_CONE_UP if dt > 0 else SegmentType.FORWARD_CONE_DOWN
        else:
            raise RegionError(
                f"edge {verts[i]} -> {verts[(i + 1) % n]} has slope outside {{0, inf, +-1}}"
            )
        segments.append(Segment(start=(r0, t0), end=(r1, t1), kind=kind))
    return RegionSpec(vertices=verts, region_id=spec.region_id, _segments=segments)


# -- stock region constructors ----------------------------------------------


def cone_region(t0: float, r0: float, region_id: str | None = None) -> RegionSpec:
    """Backward cone region {t >= t0, |x| + t <= t0 + r0}."""
    if r0 <= 0:
        raise RegionError("cone region needs r0 > 0")
    rid = region_id or f"cone_t{t0:g}_r{r0:g}"
    return validate_region(
        RegionSpec([(0.0, t0), (r0, t0), (0.0, t0 + r0)], region_id=rid)
    )


def truncated_cone_region(t1: float, t2: float, s: float, region_id: str | None = None) -> RegionSpec:
    """{t1 <= t <= t2, |x| + t <= s} with t1 < t2 <= s."""
    if not (t1 < t2 <= s):
        raise RegionError("needs t1 < t2 <= s")
    rid = region_id or f"trunc_cone_s{s:g}_{t1:g}_{t2:g}"
    verts = [(0.0, t1), (s - t1, t1)]
    if t2 < s:
        verts.append((s - t2, t2))
    verts.append((0.0, t2))
    return validate_region(RegionSpec(verts, region_id=rid))


def cone_shell_region(t0: float, r1: float, r2: float, region_id: str | None = None) -> RegionSpec:
    """{t >= t0, t0 + r1 <= t + |x| <= t0 + r2} with 0 < r1 < r2."""
    if not (0 < r1 < r2):
        raise RegionError("needs 0 < r1 < r2")
    rid = region_id or f"cone_shell_t{t0:g}_{r1:g}_{r2:g}"
    return validate_region(
        RegionSpec(
            [(r1, t0), (r2, t0), (0.0, t0 + r2), (0.0, t0 + r1)],
            region_id=rid,
        )
    )


def slab_region(t1: float, t2: float, radius: float, region_id: str | None = None) -> RegionSpec:
    """Causally truncated slab R^3 x [t1, t2], realized as a ball of ``radius``."""
    if not (t1 < t2) or radius <= 0:
        raise RegionError("needs t1 < t2 and radius > 0")
    rid = region_id or f"slab_{t1:g}_{t2:g}"
    return validate_region(
        RegionSpec(
            [(0.0, t1), (radius, t1), (radius, t2), (0.0, t2)],
            region_id=rid,
        )
    )


def annulus_slab_region(
    t1: float, t2: float, r1: float, r2: float, region_id: str | None = None
) -> RegionSpec:
    """Rectangle [r1, r2] x [t1, t2] away from the axis."""
    if not (0 <= r1 < r2 and t1 < t2):
        raise RegionError("needs 0 <= r1 < r2 and t1 < t2")
    rid = region_id or f"annulus_{r1:g}_{r2:g}_{t1:g}_{t2:g}"
    return validate_region(
        RegionSpec(
            [(r1, t1), (r2, t1), (r2, t2), (r1, t2)],
            region_id=rid,
        )
    )
