"""conewave: inward/outward energy diagnostics for the 3D defocusing wave equation."""

from .core import (
    AxisymGrid,
    ConfigError,
    ProblemSpec,
    RadialGrid,
    RegionSpec,
    RegionError,
    SegmentType,
    SimState,
    SpacetimeTrace,
    TraceWindowError,
    annulus_slab_region,
    cone_region,
    cone_shell_region,
    interpolate,
    slab_region,
    truncated_cone_region,
    validate_region,
)
from .initial_data import (
    InitialData,
    WeightedEnergyReport,
    cutoff_data,
    gaussian_data,
    make_data,
    weighted_energies,
)
from .solver import (
    EnergyDriftReport,
    SolverConfig,
    causal_grid,
    evolve,
    evolve_state,
    step_axisym,
    step_radial,
)
from .diagnostics import (
    DensityField,
    EnergySeries,
    apply_L,
    apply_Lpm,
    density,
    energies,
    energy_series,
    slashed_grad_sq,
    total_energy,
)
from .flux import (
    FluxLedger,
    MuEstimate,
    cone_flux,
    cylinder_flux,
    estimate_mu,
    flux_balance,
    full_energy_closure,
    morawetz_integral,
    pi_mu,
)
from .analysis import (
    BoundCheck,
    DecayFit,
    InnerConeTrend,
    ScatteringNorms,
    decay_bound_check,
    decay_fit,
    inner_cone_energy,
    lift_of_r_check,
    measure_and_flux_bounds,
    morawetz_bound_check,
    q_decay_trend,
    scattering_norms,
    weighted_morawetz_check,
    weighted_morawetz_p3,
)

__version__ = "0.1.0"
