"""Grids, interpolation and region validation."""

import math

import numpy as np
import pytest

import conewave as cw
from conewave.core import SegmentType


def make_radial_trace(u_fn, ut_fn, n_r=512, r_max=8.0, times=(0.0, 0.1, 0.2)):
    grid = cw.RadialGrid(r_max=r_max, n_r=n_r)
    prob = cw.ProblemSpec(3.0)
    r = grid.r
    return cw.SpacetimeTrace(
        grid=grid,
        problem=prob,
        times=np.asarray(times),
        u_frames=np.stack([u_fn(r, t) for t in times]),
        ut_frames=np.stack([ut_fn(r, t) for t in times]),
    )


def make_axisym_trace(u_fn, n=96, extent=4.0, times=(0.0, 0.1)):
    grid = cw.AxisymGrid(p_max=extent, z_max=extent, n_rho=n, n_z=2 * n)
    prob = cw.ProblemSpec(3.0)
    rho = grid.rho[:, None]
    z = grid.z[None, :]
    frames = np.stack([np.broadcast_to(u_fn(rho, z, t), grid.shape) for t in times])
    return cw.SpacetimeTrace(
        grid=grid,
        problem=prob,
        times=np.asarray(times),
        u_frames=frames,
        ut_frames=np.zeros_like(frames),
    )


class TestGrids:
    def test_radial_nodes_avoid_origin(self):
        g = cw.RadialGrid(r_max=4.0, n_r=64)
        assert g.r[0] == pytest.approx(g.dr / 2)
        assert (g.r > 0).all()

    def test_axisym_nodes_avoid_axis(self):
        g = cw.AxisymGrid(p_max=2.0, z_max=3.0, n_rho=32, n_z=48)
        assert g.rho[0] == pytest.approx(g.drho / 2)
        assert g.z[0] == pytest.approx(-3.0 + g.dz / 2)

    def test_bad_grid_rejected(self):
        with pytest.raises(cw.ConfigError):
            cw.RadialGrid(r_max=-1.0, n_r=64)
        with pytest.raises(cw.ConfigError):
            cw.AxisymGrid(p_max=1.0, z_max=1.0, n_rho=4, n_z=4)

    def test_problem_spec(self):
        p = cw.ProblemSpec(3.0)
        assert p.s_p == pytest.approx(0.5)
        assert cw.ProblemSpec(5.0).s_p == pytest.approx(1.0)
        with pytest.raises(cw.ConfigError):
            cw.ProblemSpec(2.0)


class TestInterpolation:
    def test_constant_field(self):
        tr = make_radial_trace(lambda r, t: np.ones_like(r), lambda r, t: np.zeros_like(r))
        u, ut, ur, utheta = cw.interpolate(tr, (1.234, 0.3, 0.05))
        assert u == pytest.approx(1.0)
        assert ut == pytest.approx(0.0)
        assert ur == pytest.approx(0.0, abs=1e-12)
        assert utheta == 0.0

    def test_linear_z_field_axisym(self):
        tr = make_axisym_trace(lambda rho, z, t: z + 0.0 * rho)
        u, ut, ur, utheta = cw.interpolate(tr, (1.0, 0.0, 0.05))
        assert u == pytest.approx(1.0, abs=1e-12)
        assert ur == pytest.approx(1.0, abs=1e-10)
        assert utheta == pytest.approx(0.0, abs=1e-10)
        # off-axis angle: u = r cos(theta), du/dr = cos, u_theta = -r sin
        th = 0.7
        u, _, ur, utheta = cw.interpolate(tr, (1.0, th, 0.0))
        assert ur == pytest.approx(math.cos(th), abs=5e-3)
        assert utheta == pytest.approx(-math.sin(th), abs=5e-3)

    def test_affine_exactness(self):
        # fields affine in (rho, z) interpolate to round-off
        tr = make_axisym_trace(lambda rho, z, t: 2.0 + 0.5 * rho - 1.5 * z)
        pts = [(0.5, 0.4), (1.7, 2.1), (2.5, 0.9)]
        for r, th in pts:
            u, *_ = cw.interpolate(tr, (r, th, 0.05))
            expect = 2.0 + 0.5 * r * math.sin(th) - 1.5 * r * math.cos(th)
            assert u == pytest.approx(expect, abs=1e-12)

    def test_gaussian_radial_derivative(self):
        # analytic oracle: d/dr exp(-r^2) at r=1 is -2 e^-1 ~ -0.73576
        tr = make_radial_trace(
            lambda r, t: np.exp(-(r**2)), lambda r, t: np.zeros_like(r), n_r=512
        )
        _, _, ur, _ = cw.interpolate(tr, (1.0, 0.0, 0.0))
        assert ur == pytest.approx(-2.0 * math.exp(-1.0), abs=5e-4)

    def test_derivative_refinement_order(self):
        errs = []
        for n in (128, 256, 512):
            tr = make_radial_trace(
                lambda r, t: np.exp(-(r**2)), lambda r, t: np.zeros_like(r), n_r=n
            )
            rs = np.linspace(0.3, 3.0, 41)
            _, _, ur, _ = tr.sample(rs, np.zeros_like(rs), 0.0)
            errs.append(np.abs(ur + 2 * rs * np.exp(-(rs**2))).max())
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert (orders > 1.8).all()

    def test_out_of_window_time_rejected(self):
        tr = make_radial_trace(lambda r, t: np.exp(-(r**2)), lambda r, t: 0 * r)
        with pytest.raises(cw.TraceWindowError):
            cw.interpolate(tr, (1.0, 0.0, 5.0))

    def test_outside_grid_rejected(self):
        tr = make_radial_trace(lambda r, t: np.exp(-(r**2)), lambda r, t: 0 * r)
        with pytest.raises(cw.TraceWindowError):
            cw.interpolate(tr, (100.0, 0.0, 0.1))

    def test_small_radius_even_extension(self):
        tr = make_radial_trace(lambda r, t: np.exp(-(r**2)), lambda r, t: 0 * r, n_r=512)
        u, _, ur, _ = cw.interpolate(tr, (1e-4, 0.0, 0.0))
        assert u == pytest.approx(1.0, abs=1e-4)
        assert abs(ur) < 1e-3

    def test_time_interpolation_linear(self):
        tr = make_radial_trace(
            lambda r, t: (1.0 + t) * np.exp(-(r**2)),
            lambda r, t: np.exp(-(r**2)),
            times=(0.0, 0.2, 0.4),
        )
        u_lo = cw.interpolate(tr, (1.0, 0.0, 0.0))[0]
        u_hi = cw.interpolate(tr, (1.0, 0.0, 0.2))[0]
        u_mid, ut_mid, _, _ = cw.interpolate(tr, (1.0, 0.0, 0.1))
        assert u_mid == pytest.approx(0.5 * (u_lo + u_hi), rel=1e-13)
        # u_t frames are constant in time here, so the lerp is exact
        assert ut_mid == pytest.approx(cw.interpolate(tr, (1.0, 0.0, 0.0))[1], rel=1e-13)


class TestRegions:
    def test_cone_region_segments(self):
        reg = cw.cone_region(1.0, 2.0)
        kinds = [s.kind for s in reg.segments]
        assert kinds == [
            SegmentType.TIME_SLICE_UP,
            SegmentType.BACKWARD_CONE_UP,
            SegmentType.T_AXIS,
        ]

    def test_rectangle_segments(self):
        reg = cw.annulus_slab_region(1.0, 2.0, 0.25, 1.0)
        kinds = {s.kind for s in reg.segments}
        assert kinds == {
            SegmentType.TIME_SLICE_UP,
            SegmentType.TIME_SLICE_DOWN,
            SegmentType.CYLINDER_OUTWARD,
            SegmentType.CYLINDER_INWARD,
        }

    def test_axis_edge_is_t_axis(self):
        reg = cw.slab_region(0.0, 1.0, radius=2.0)
        kinds = [s.kind for s in reg.segments]
        assert SegmentType.T_AXIS in kinds

    def test_bad_slope_rejected(self):
        with pytest.raises(cw.RegionError):
            cw.validate_region(cw.RegionSpec([(0.0, 0.0), (2.0, 1.0), (0.0, 1.0)]))

    def test_self_intersection_rejected(self):
        with pytest.raises(cw.RegionError):
            cw.validate_region(
                cw.RegionSpec([(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)])
            )

    def test_negative_radius_rejected(self):
        with pytest.raises(cw.RegionError):
            cw.validate_region(cw.RegionSpec([(-1.0, 0.0), (1.0, 0.0), (1.0, 1.0)]))

    def test_orientation_normalized(self):
        # clockwise input comes back counterclockwise
        reg = cw.validate_region(
            cw.RegionSpec([(0.0, 1.0), (2.0, 1.0), (2.0, 0.0), (0.0, 0.0)])
        )
        area = 0.0
        v = reg.vertices
        for i in range(len(v)):
            r0, t0 = v[i]
            r1, t1 = v[(i + 1) % len(v)]
            area += r0 * t1 - r1 * t0
        assert area > 0

    def test_normalization_idempotent(self):
        reg = cw.cone_region(0.0, 3.0)
        again = cw.validate_region(reg)
        assert again.vertices == reg.vertices
        assert [s.kind for s in again.segments] == [s.kind for s in reg.segments]

    def test_r_sections(self):
        reg = cw.cone_shell_region(0.0, 1.0, 2.0)
        secs = reg.r_sections(0.5)
        assert len(secs) == 1
        a, b = secs[0]
        assert a == pytest.approx(0.5)
        assert b == pytest.approx(1.5)


class TestRadialAffine:
    def test_affine_in_r_exact_off_axis(self):
        tr = make_radial_trace(lambda r, t: 2.0 + 3.0 * r, lambda r, t: 0 * r, n_r=128)
        g = tr.grid
        rs = np.linspace(g.dr, g.r_max - 2 * g.dr, 23)
        u, _, ur, _ = tr.sample(rs, np.zeros_like(rs), 0.1)
        assert np.allclose(u, 2.0 + 3.0 * rs, atol=1e-12)
        assert np.allclose(ur[rs > 2 * g.dr], 3.0, atol=1e-9)
