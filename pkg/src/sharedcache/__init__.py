"""Shared-cache coded caching: placement, delivery planning, index-coding
bounds and error-correcting delivery over a corrupting broadcast link."""

from .delivery import (
    Transmission,
    TransmissionPlan,
    eliminate_redundant,
    improved_delivery,
    plan_delivery,
    predicted_count_thm3,
    sc_delivery,
    select_leaders,
    worst_case_count,
    worst_case_rate_points,
)
from .ecc import LinearCode, build_code, code_length_bounds, concat_encode, lookup_code_length, syndrome_decode
from .indexcoding import (
    BoundsReport,
    IcsiInstance,
    alpha_bruteforce,
    build_icsi,
    compute_bounds,
    construct_B,
    is_generalized_independent,
    kappa_bruteforce,
    receiver_decode,
)
from .model import (
    Association,
    ConfigError,
    DemandVector,
    Placement,
    SubfileId,
    SystemConfig,
    colex_rank,
    colex_unrank,
    enumerate_subsets,
    sc_place,
    system_from_dict,
    system_to_dict,
)
from .sim import ChannelConfig, RateInterval, Sampled, SessionReport, convex_envelope, demand_sweep, optimal_ecc_worst_rate, run_session

__version__ = "0.1.0"
