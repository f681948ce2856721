"""Simulation and estimation toolkit for a three-state deteriorating system
under perfect condition-based maintenance."""

from .config import ConfigError, ModelConfig, deterministic_config, parse_config, serialize_config
from .estimators import (
    DegenerateDataError,
    EstimateReport,
    NonConvergenceError,
    ObservedData,
    OutOfRangeError,
    asymptotic_estimate,
    censored_log_likelihood,
    full_information_estimate,
    invert_failure_probability,
    invert_mean_inspections,
    mle_estimate,
)
from .formulas import (
    CovarianceBundle,
    CycleMoments,
    Sensitivities,
    count_rate_covariance,
    cycle_moments,
    estimator_covariance,
    failure_probability,
    inspection_series,
    mean_cycle_length,
    mean_inspections,
    parameter_sensitivities,
)
from .laws import DamageLaw, InspectionLaw, SaneLaw, TaylorJet, laplace_jet, survival_sane
from .oracle import McEstimate, mc_age_distribution, mc_moment_set, verification_rows
from .simulator import (
    CountSnapshot,
    CycleRecord,
    Trajectory,
    age_and_index,
    counts_at,
    simulate_cycle,
    simulate_horizon,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CountSnapshot",
    "CovarianceBundle",
    "CycleMoments",
    "CycleRecord",
    "DamageLaw",
    "DegenerateDataError",
    "EstimateReport",
    "InspectionLaw",
    "McEstimate",
    "ModelConfig",
    "NonConvergenceError",
    "ObservedData",
    "OutOfRangeError",
    "SaneLaw",
    "Sensitivities",
    "TaylorJet",
    "Trajectory",
    "age_and_index",
    "asymptotic_estimate",
    "censored_log_likelihood",
    "count_rate_covariance",
    "counts_at",
    "cycle_moments",
    "deterministic_config",
    "estimator_covariance",
    "failure_probability",
    "full_information_estimate",
    "inspection_series",
    "invert_failure_probability",
    "invert_mean_inspections",
    "laplace_jet",
    "mc_age_distribution",
    "mc_moment_set",
    "mean_cycle_length",
    "mean_inspections",
    "mle_estimate",
    "parameter_sensitivities",
    "parse_config",
    "serialize_config",
    "simulate_cycle",
    "simulate_horizon",
    "survival_sane",
    "verification_rows",
]
