"""Worst-case detection guarantees for distributed SIMO physical-layer
authentication: thresholds, power/position attack analysis, Monte-Carlo
oracles, and delay bounds."""

from .authenticator import (Authenticator, accepts, block_discriminants,
                            discriminant, make_authenticator, pfa_of_threshold,
                            threshold_for_pfa)
from .delay_bounds import (ArrivalModel, DelayBound, ServiceModel, ServiceOutage,
                           UnstableQueueError, delay_violation_bound,
                           service_outage, simulate_queue_delays, snr_outage,
                           stability_margin)
from .geometry import (ChannelStatistics, Correlation, Region, RrhConfig,
                       Scenario, SearchConfig, TransmitterConfig,
                       alice_statistics, angular_sine, channel_statistics,
                       eve_statistics, received_power, steering_vector,
                       wavelength)
from .monte_carlo import (BLOCK_SIZE, McEstimate, acceptance_event,
                          best_case_acceptance_event, estimate_probability,
                          sample_channel)
from .numerics import NumericsError, chi2_cdf, chi2_quantile, chi2_tail
from .position_attack import (CandidatePosition, EmptyRegionError,
                              GridTooLargeError, LobeSets, NoCandidatesError,
                              PositionSearchError, SearchResult,
                              angular_inner_product, count_small_scale_optima,
                              exhaustive_search, expanded_f_obj, f_obj,
                              f_small_scale, lobe_sets, truncated_search)
from .power_attack import (NO_ATTACK, IndefiniteForm, PowerStrategy,
                           SaddlepointError, build_indefinite_form, dncf_cdf,
                           dncf_sf, fixed_strategy_form,
                           mdp_fixed_strategy, mdp_optimal_pma,
                           mdp_single_array_closed_form, optimal_power_strategy,
                           saddlepoint_tail_probability,
                           statistical_power_strategy)
from .scenario_io import (ScenarioError, load_scenario, scenario_from_dict,
                          scenario_to_dict, validate_scenario)

__version__ = "0.1.0"
