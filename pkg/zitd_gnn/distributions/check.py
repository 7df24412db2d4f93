"""
Acceptance checks for the distribution library (the ``dist-check`` command).

Three suites: agreement between the series density and the independent
mixture oracle, normalisation of the ZITD law, and Monte Carlo moments.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from zitd_gnn.distributions.tweedie import (
    SeriesConfig,
    TweedieParams,
    compound_params,
    default_oracle_terms,
    oracle_mixture_log_density,
    tweedie_log_density,
)
from zitd_gnn.distributions.zitd import (
    ZitdParams,
    sample_zitd,
    zitd_cdf,
    zitd_moments,
    zitd_zero_mass,
)

logger = logging.getLogger(__name__)

ORACLE_Y = (0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0)
ORACLE_MU_PHI = (0.5, 1.0, 2.0)
ORACLE_RHO = (1.2, 1.5, 1.8)
ORACLE_TOLERANCE = 1e-6

NORMALIZATION_SETTINGS = tuple(
    ZitdParams.of(pi, mu, phi, rho)
    for pi in (0.0, 0.5)
    for mu, phi, rho in (
        (1.0, 1.0, 1.5),
        (2.0, 1.0, 1.5),
        (0.5, 2.0, 1.2),
        (1.0, 0.5, 1.8),
        (2.0, 2.0, 1.8),
        (0.5, 0.5, 1.3),
    )
)
NORMALIZATION_TOLERANCE = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str


@dataclass
class DistCheckReport:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def oracle_sweep(cfg: SeriesConfig = SeriesConfig()) -> CheckResult:
    """Largest |series - oracle| log-density gap over the parameter grid."""
    worst, where = 0.0, None
    for y, mu, phi, rho in itertools.product(ORACLE_Y, ORACLE_MU_PHI, ORACLE_MU_PHI, ORACLE_RHO):
        td = TweedieParams(mu, phi, rho)
        cp = compound_params(td)
        series = tweedie_log_density(y, td, cfg)
        oracle = oracle_mixture_log_density(y, cp, default_oracle_terms(y, cp)).log_density
        gap = abs(series - oracle)
        if gap > worst or where is None:
            worst, where = gap, (y, mu, phi, rho)
    return CheckResult(
        "series-oracle",
        worst < ORACLE_TOLERANCE,
        worst,
        f"max gap {worst:.3e} at (y, mu, phi, rho)={where}",
    )


def normalization_check(cfg: SeriesConfig = SeriesConfig()) -> CheckResult:
    """Zero mass plus the integrated continuous part must equal one."""
    worst, where = 0.0, None
    for z in NORMALIZATION_SETTINGS:
        moments = zitd_moments(z)
        upper = z.td.mu + 40.0 * math.sqrt(moments.tweedie_variance) + 1.0
        error = abs(zitd_cdf(upper, z, cfg) - 1.0)
        if error > worst or where is None:
            worst, where = error, z
    return CheckResult(
        "normalization",
        worst <= NORMALIZATION_TOLERANCE,
        worst,
        f"max |total mass - 1| {worst:.3e} at {where}",
    )


def moment_check(n: int = 100_000, seed: int = 0) -> list[CheckResult]:
    """Zero fraction, mean and variance of draws against closed forms."""
    z = ZitdParams.of(0.3, 1.0, 1.0, 1.5)
    draws = sample_zitd(z, n, seed)
    p0 = zitd_zero_mass(z)
    sigma = math.sqrt(p0 * (1.0 - p0) / n)
    zero_gap = abs(float(np.mean(draws == 0.0)) - p0)
    mean = zitd_moments(z).mean
    mean_rel = abs(float(draws.mean()) - mean) / mean

    plain = ZitdParams.of(0.0, 2.0, 1.0, 1.5)
    plain_draws = sample_zitd(plain, n, seed + 1)
    variance = zitd_moments(plain).tweedie_variance
    var_rel = abs(float(plain_draws.var()) - variance) / variance

    return [
        CheckResult("zero-fraction", zero_gap <= 3.0 * sigma, zero_gap, f"|gap| {zero_gap:.4g}, 3 sigma {3 * sigma:.4g}"),
        CheckResult("mean", mean_rel <= 0.01, mean_rel, f"relative error {mean_rel:.4%}"),
        CheckResult("variance", var_rel <= 0.03, var_rel, f"relative error {var_rel:.4%}"),
    ]


def run_dist_check(n_samples: int = 100_000, seed: int = 0) -> DistCheckReport:
    """Run every suite and collect the results."""
    report = DistCheckReport()
    report.results.append(oracle_sweep())
    report.results.append(normalization_check())
    report.results.extend(moment_check(n_samples, seed))
    for result in report.results:
        logger.info("%s: %s (%s)", result.name, "pass" if result.passed else "FAIL", result.detail)
    return report
