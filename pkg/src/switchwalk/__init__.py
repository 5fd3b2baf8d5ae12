"""Switch ("coin-turning") random walk toolkit.

Exact dyadic combinatorics of the switch walk, its Poisson-rerandomized
dynamics, and reproducible Monte Carlo experiments, with a compiled kernel
core and a pure NumPy fallback.
"""

from ._backend import BACKEND_NAME, available_backends
from .dyadic import DyadicProb
from .walks import (
    WalkPath,
    as_bits,
    barrier_levels,
    barrier_positive,
    compass_walk,
    flip_suffix_image,
    switch_walk,
)
from .exact import (
    InfluenceTerm,
    PositionDist,
    ballot_prob,
    barrier_positive_prob,
    chernoff_holds,
    influence_exact,
    influence_oracle,
    influence_profile_exact,
    influence_profile_float,
    influence_terms,
    position_dist,
    position_prob,
    reflection_pair,
    stay_positive_endpoint_dp,
    stay_positive_prob,
    strip_stay_prob,
    strip_stay_prob_dp,
    tail_prob,
)
from .dynamics import (
    ClockSet,
    PeriodDecomposition,
    PositivityTimeline,
    TwoTimeCoupling,
    bits_at,
    decompose_periods,
    kappa_measure,
    mirror_residual,
    naive_timeline,
    pair_energy,
    positivity_timeline,
    sample_clocks,
    timeline_trace,
    two_time_sample,
    uv_decomposition,
    w_path,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "available_backends",
    "DyadicProb",
    "WalkPath",
    "as_bits",
    "barrier_levels",
    "barrier_positive",
    "compass_walk",
    "flip_suffix_image",
    "switch_walk",
    "InfluenceTerm",
    "PositionDist",
    "ballot_prob",
    "barrier_positive_prob",
    "chernoff_holds",
    "influence_exact",
    "influence_oracle",
    "influence_profile_exact",
    "influence_profile_float",
    "influence_terms",
    "position_dist",
    "position_prob",
    "reflection_pair",
    "stay_positive_endpoint_dp",
    "stay_positive_prob",
    "strip_stay_prob",
    "strip_stay_prob_dp",
    "tail_prob",
    "ClockSet",
    "PeriodDecomposition",
    "PositivityTimeline",
    "TwoTimeCoupling",
    "bits_at",
    "decompose_periods",
    "kappa_measure",
    "mirror_residual",
    "naive_timeline",
    "pair_energy",
    "positivity_timeline",
    "sample_clocks",
    "timeline_trace",
    "two_time_sample",
    "uv_decomposition",
    "w_path",
    "__version__",
]
