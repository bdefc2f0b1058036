"""Shared simulation fixtures.

The expensive traces are session-scoped and shared across test modules; each
fixture documents the run it represents.
"""

import pytest

import conewave as cw


@pytest.fixture(scope="session")
def problem():
    return cw.ProblemSpec(p=3.0)


@pytest.fixture(scope="session")
def monopole():
    return cw.gaussian_data(amplitude=1.0, width=1.0)


@pytest.fixture(scope="session")
def ztilt():
    return cw.gaussian_data(amplitude=1.0, width=1.0, angular_profile="z-tilt")


@pytest.fixture(scope="session")
def radial_trace_T5(monopole, problem):
    """Mid-resolution radial Gaussian run used by the flux/diagnostics tests."""
    grid = cw.causal_grid(monopole, 5.0, "radial1d", n_r=2048)
    trace, drift = cw.evolve(monopole, problem, cw.SolverConfig(t_end=5.0), grid)
    return trace, drift


@pytest.fixture(scope="session")
def radial_trace_T12(monopole, problem):
    """Longer radial run for analysis/trend tests."""
    grid = cw.causal_grid(monopole, 12.0, "radial1d", n_r=2048)
    trace, drift = cw.evolve(monopole, problem, cw.SolverConfig(t_end=12.0), grid)
    return trace, drift


@pytest.fixture(scope="session")
def axisym_trace_ztilt(ztilt, problem):
    """Small axisym z-tilt run exercising the non-radial code paths."""
    grid = cw.causal_grid(ztilt, 1.5, "axisym2d", n_rho=192, n_z=384)
    trace, drift = cw.evolve(
        ztilt, problem, cw.SolverConfig(t_end=1.5, store_stride=4), grid
    )
    return trace, drift


@pytest.fixture(scope="session")
def zero_trace(problem):
    """Zero data on a small radial grid: every functional must vanish."""
    data = cw.gaussian_data(amplitude=0.0)
    grid = cw.RadialGrid(r_max=6.0, n_r=256)
    trace, drift = cw.evolve(data, problem, cw.SolverConfig(t_end=2.0), grid)
    return trace, drift
