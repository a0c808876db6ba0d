"""levysde: simulation and verification toolkit for distribution-dependent
SDEs driven by general Levy noise.

The library samples every supported Levy class exactly (or with controlled,
documented bias), realises the transition semigroup on periodic grids by
FFT, measures laws with exact Wasserstein distances, runs the frozen-law /
Picard particle solver, and empirically tests the quantitative estimates
the models are supposed to satisfy (gradient bounds, moment scalings,
occupation-time bounds, Wasserstein contraction).
"""

__version__ = "0.1.0"

from .errors import (
    CoverageError,
    GateError,
    GridResolutionError,
    LevysdeError,
    ModelError,
    NumericalError,
    UnsupportedDriftError,
    UnsupportedNormError,
)
from .levy_model import (
    JumpSpec,
    LevyModel,
    RadialModulator,
    SphericalMeasure,
    admissible_pq,
    brownian,
    cylindrical_stable,
    general_stable,
    isotropic_stable,
    krylov_pq_check,
    stable_radial_constant,
    stable_type,
    superpose,
    symbol,
    symbol_grid,
    symbol_lower_bound_check,
    tempered_stable,
    truncated_stable,
)
from .sampler import (
    IncrementStream,
    PathGrid,
    moment_scaling_probe,
    sample_increment,
    sample_increments,
    sample_path,
    save_path_csv,
    small_jump_cf_bias,
)
from .kernel import (
    BesselNormSpec,
    GridFunction,
    GridGeometry,
    MixedNormSpec,
    SlopeReport,
    bessel_norm,
    bump_width_panel,
    gaussian_bump,
    gradient_bound_probe,
    heat_kernel,
    load_grid_binary,
    lp_norm,
    mixed_norm,
    rough_spectrum_function,
    save_grid_binary,
    save_grid_csv,
    semigroup_apply,
    smoothing_probe,
    strong_continuity_probe,
)
from .measure import (
    EmpiricalMeasure,
    density_estimate,
    load_particles_csv,
    load_particles_binary,
    save_particles_binary,
    save_particles_csv,
    silverman_bandwidth,
    theta_moment,
    wasserstein_theta,
)
from .solver import (
    DriftSpec,
    EnsemblePath,
    FeatureDependence,
    MollifiedDriftFamily,
    PairwiseDependence,
    PicardState,
    SolverConfig,
    drift_integrability_report,
    mollify_drift,
    mollify_drift_pointwise,
    ou_drift,
    picard_iterate,
    sign_drift,
    singular_power_drift,
    solve_frozen,
    law_increment_curve,
    theta_moment_curve,
    toward_mean_drift,
    zero_drift,
)
from .krylov import (
    KrylovReport,
    SpaceTimeBump,
    krylov_ratio,
    krylov_sweep,
    standard_bump_panel,
)
