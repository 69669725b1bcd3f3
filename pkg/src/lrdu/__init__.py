"""Simulation, estimation and limit theory for U-processes of long-memory Gaussian data."""
from .errors import DomainError, LrduError, NumericError, RegimeError
from .lrd_sim import ContaminationSpec, CovarianceModel, SamplePath, contaminate, simulate_gaussian
from .hermite import AbsDiff, Kernel, PairAverage, PairSum, alpha_pq, hermite_rank
from .uprocess import hoeffding_terms, pairwise_kth, u_process, u_quantile
from .estimators import (
    correlation_integral,
    hodges_lehmann,
    sample_mean,
    sample_sd,
    shamos,
    wilcoxon_signed_rank,
)
from .asymptotics import (
    CumulantRequest,
    clt_covariance,
    k_of_D,
    limit_cumulant,
    limit_variances,
    sample_limit_law,
)
from .montecarlo import McConfig, empirical_density, ks_distance, rate_regression, run_experiment

__all__ = [
    "AbsDiff", "ContaminationSpec", "CovarianceModel", "CumulantRequest", "DomainError", "Kernel",
    "LrduError", "McConfig", "NumericError", "PairAverage", "PairSum", "RegimeError", "SamplePath",
    "alpha_pq", "clt_covariance", "contaminate", "correlation_integral", "empirical_density",
    "hermite_rank", "hodges_lehmann", "hoeffding_terms", "k_of_D", "ks_distance", "limit_cumulant",
    "limit_variances", "pairwise_kth", "rate_regression", "run_experiment", "sample_limit_law",
    "sample_mean", "sample_sd", "shamos", "simulate_gaussian", "u_process", "u_quantile",
    "wilcoxon_signed_rank",
]
