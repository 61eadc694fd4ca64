"""Capacity regions of K-user interference channels with mixed strong and
very strong interference."""

from .channel_model import (
    ConformingInstance,
    Dmic,
    GaussianIC,
    InterferencePattern,
    ProductDistribution,
    normalize_gaussian,
    random_conforming_instance,
    validate,
)
from .conditions import (
    check_conditions,
    classify_gaussian,
    dmic_condition_gap,
    lemma1_extension_check,
    lemma2_spot_check,
    make_degraded_pair,
)
from .info_metrics import MiQuery, dmic_mi, gaussian_mi, mc_gaussian_mi, query
from .region import (
    HalfSpace,
    RatePolytope,
    capacity_polytope,
    contains,
    dmic_sampled_hull,
    max_weighted_sum,
    slice2d,
    vertices,
)
from .scheme import redundancy_check, scheme_region

__version__ = "0.1.0"
