"""Steering-inequality bounds with tolerance for measurement-setting errors."""

__version__ = "0.1.0"

from .bases import (
    BasisSet,
    OverlapSummary,
    dmu_check,
    epsilon_of_overlap,
    generate_mub_prime,
    overlap_summary,
    perturb_bases,
)
from .errors import CapacityError, InvalidInputError, UnsupportedDimensionError
from .models import (
    MultiSingletParams,
    PhotonicScanRow,
    multisinglet_growth_condition,
    multisinglet_violation,
    optimal_settings_scan,
    photonic_asymptotic_C,
    photonic_C,
    photonic_distribution,
    photonic_overlap,
    photonic_q,
)
from .steering import (
    SteeringBounds,
    bound_theorem,
    bound_toeplitz,
    bound_weak,
    compute_bounds,
    gram_matrix,
    lhs_exact,
    steering_value,
    violation_ratio,
)
