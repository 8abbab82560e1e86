"""Intrinsic volume metrics on convex bodies and random polytope experiments."""
from .beta import (
    SPHERE,
    BetaParams,
    betainc,
    cdf_F1,
    inverse_cdf_F1,
    normalizer,
    projection_law_check,
    sample_beta,
    sample_sphere,
    upper_tail_F1,
)
from .constants import (
    affentranger_A,
    ball_intrinsic_volume,
    cap_bounds,
    cap_bounds_check,
    cap_probability,
    chern_constant,
    d_const,
    flag_coefficient,
    gamma_ratio,
    simplex_second_moment,
    weighted_slice_moment,
)
from .errors import ConsistencyError, DegenerateScalingError, NumericalError, ParameterError
from .estimate import McEstimate
from .experiments import (
    ExperimentResult,
    ExperimentSpec,
    appendixB_expectation,
    best_approx_search,
    lemma_validation_suite,
    scaling_factor,
    theorem1_polytope,
    theorem1_run,
)
from .geometry import Ball, Polytope, apply_rigid_motion, embed, haar_frames, hull_membership, scale_body, unit_ball
from .metrics import (
    MetricConfig,
    delta_1_support,
    delta_j,
    deviation_Delta_j,
    deviation_rho_j,
    intrinsic_volume,
)

__version__ = "0.1.0"
