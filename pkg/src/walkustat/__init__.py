"""U-statistics of random walks in heavy-tailed random scenery.

The package simulates pair statistics U_n = sum h(xi_x, xi_y) N(x) N(y)
of walk occupation fields, the stable and stable-sheet limit objects they
converge to, and the point-process diagnostics connecting the two.
"""
from .errors import NumericError, ParameterError, RegimeError
from .kernels import (
    KernelSpec,
    KernelValidationReport,
    PowerKernel,
    ReciprocalSumKernel,
    SceneryField,
    SignedPowerKernel,
    TruncatedGaussian,
    UniformBox,
    kernel_from_string,
    kernel_value,
    sample_scenery,
    tail_constants,
    truncated_kernel_value,
    truncation_drift,
    validate_assumptions,
)
from .local_time import (
    LocalTimeField,
    estimate_local_time,
    f_functional,
    limit_cf_params,
    limit_functional,
    required_extent,
)
from .pointproc import (
    IntensityReport,
    IntensitySpec,
    TruncationTrend,
    WeightedPointSet,
    build_point_set,
    compensated_truncated_sum,
    expected_count,
    intensity_check,
    intensity_report_from_counts,
    poisson_drift,
    poisson_truncation_limit,
)
from .sheet import (
    SheetGrid,
    StepFunction2D,
    coarsen,
    integral_cf_params,
    integral_cf_params_callable,
    integrate_continuous,
    integrate_step,
    node_value,
    rectangle_increment,
    simulate_sheet,
)
from .stable import (
    DEFAULT_Z_GRID,
    EcfReport,
    StableLawParams,
    TailConstants,
    ecf_report,
    ecf_tolerance,
    empirical_cf,
    sample_stable,
    sin_integral_constant,
    stable_cf,
    two_sample_ecf_distance,
)
from .ustat import (
    MODE_INCREMENTS,
    MODE_LEVELS,
    ThetaCombination,
    UStatTrajectory,
    compute_U,
    compute_U_at_checkpoints,
    g_statistic,
    limit_G,
    local_time_exponent,
    mode_for_regime,
    normalization_a_n,
    scaled_trajectory,
)
from .walks import (
    Deterministic,
    HeavyStepWalk,
    MonteCarloEstimate,
    OccupationField,
    Regime,
    SimpleWalk,
    estimate_K_beta_transient,
    estimate_c3,
    regime_of,
    simulate_occupation,
    two_sided_visits_to_zero,
    walk_from_string,
)

__version__ = "0.1.0"
