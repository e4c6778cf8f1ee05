"""
Bernoulli sieve laboratory

Simulation, exact finite-n distributions and limit laws of the occupancy
statistics of the Bernoulli sieve, with goodness-of-fit verification.
"""

__version__ = "1.0.0"
__author__ = "sievelab developers"

from .errors import (SieveError, LawParseError, LatticeLawError, QuadratureError, CapabilityError,
                     PrecisionError, InternalConsistencyError, GofError, ScenarioError)
from .law_library import (WLaw, BetaLaw, LogParetoLaw, ExampleGammaLaw, InverseCdfLaw, DiracLaw,
                          MomentProfile, QuadratureConfig, moment_profile, sample_w, phi)
from .law_parser import LawParser, parse_law, render_law
from .sieve_sim import (OccupancySample, LimitPartitionSample, BatchResult, SimulationMode,
                        simulate_occupancy, simulate_poissonised, shortcut_sample_M, shortcut_sample_Z,
                        simulate_limit_partition, batch_estimate)
from .exact_engine import (Statistic, PmfTable, DPConfig, pmf_L, pmf_K, pmf_M, pmf_Z, potential_g,
                           mean_L_explicit, mean_L_via_Z, mean_L_poissonised, mean_L_asymptotic_iii)
from .limit_laws import (LimitKind, LimitLawHandle, Normalization, NormalizationCase, limit_handle,
                         normalization, stable_cdf, one_stable_cdf, mittag_leffler_sample, pmf_L_infinity,
                         survival_L_infinity_series)
from .stats_harness import (CheckKind, GofReport, HarnessConfig, ks_one_sample, ks_two_sample,
                            chi_square_gof, tv_distance, moment_z, dominance_check)
from .scenario import Scenario, TestSpec, parse_scenario, render_scenario, run_scenario

__all__ = [
    "SieveError",
    "LawParseError",
    "LatticeLawError",
    "QuadratureError",
    "CapabilityError",
    "PrecisionError",
    "InternalConsistencyError",
    "GofError",
    "ScenarioError",
    "WLaw",
    "BetaLaw",
    "LogParetoLaw",
    "ExampleGammaLaw",
    "InverseCdfLaw",
    "DiracLaw",
    "MomentProfile",
    "QuadratureConfig",
    "moment_profile",
    "sample_w",
    "phi",
    "LawParser",
    "parse_law",
    "render_law",
    "OccupancySample",
    "LimitPartitionSample",
    "BatchResult",
    "SimulationMode",
    "simulate_occupancy",
    "simulate_poissonised",
    "shortcut_sample_M",
    "shortcut_sample_Z",
    "simulate_limit_partition",
    "batch_estimate",
    "Statistic",
    "PmfTable",
    "DPConfig",
    "pmf_L",
    "pmf_K",
    "pmf_M",
    "pmf_Z",
    "potential_g",
    "mean_L_explicit",
    "mean_L_via_Z",
    "mean_L_poissonised",
    "mean_L_asymptotic_iii",
    "LimitKind",
    "LimitLawHandle",
    "Normalization",
    "NormalizationCase",
    "limit_handle",
    "normalization",
    "stable_cdf",
    "one_stable_cdf",
    "mittag_leffler_sample",
    "pmf_L_infinity",
    "survival_L_infinity_series",
    "CheckKind",
    "GofReport",
    "HarnessConfig",
    "ks_one_sample",
    "ks_two_sample",
    "chi_square_gof",
    "tv_distance",
    "moment_z",
    "dominance_check",
    "Scenario",
    "TestSpec",
    "parse_scenario",
    "render_scenario",
    "run_scenario",
]
