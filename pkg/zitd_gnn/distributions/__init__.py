"""Tweedie and zero-inflated Tweedie distributions."""

from zitd_gnn.distributions.tweedie import (
    CompoundParams,
    OracleDensity,
    SeriesConfig,
    TweedieParams,
    canonical_theta,
    clamp_rho,
    compound_params,
    cumulant_kappa,
    default_oracle_terms,
    gamma_shape,
    j_max,
    oracle_mixture_log_density,
    poisson_rate,
    series_exponent,
    tweedie_log_density,
)
from zitd_gnn.distributions.zitd import (
    CdfBisection,
    Interval,
    MonteCarlo,
    ZitdMoments,
    ZitdParams,
    sample_zitd,
    zitd_cdf,
    zitd_interval,
    zitd_log_density,
    zitd_moments,
    zitd_zero_mass,
)
from zitd_gnn.distributions.check import (
    CheckResult,
    DistCheckReport,
    moment_check,
    normalization_check,
    oracle_sweep,
    run_dist_check,
)

__all__ = [
    "CompoundParams",
    "OracleDensity",
    "SeriesConfig",
    "TweedieParams",
    "ZitdParams",
    "ZitdMoments",
    "Interval",
    "MonteCarlo",
    "CdfBisection",
    "canonical_theta",
    "clamp_rho",
    "compound_params",
    "cumulant_kappa",
    "default_oracle_terms",
    "gamma_shape",
    "j_max",
    "oracle_mixture_log_density",
    "poisson_rate",
    "series_exponent",
    "tweedie_log_density",
    "sample_zitd",
    "zitd_cdf",
    "zitd_interval",
    "zitd_log_density",
    "zitd_moments",
    "zitd_zero_mass",
    "CheckResult",
    "DistCheckReport",
    "oracle_sweep",
    "normalization_check",
    "moment_check",
    "run_dist_check",
]
