"""
Zero-inflated Tweedie (ZITD) distribution.

With probability pi the outcome is an exact zero; otherwise it is drawn
from a Tweedie(mu, phi, rho) variable, which itself has an atom at zero.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect

from zitd_gnn.constants import INTERVAL_SAMPLES, LOWER_QUANTILE, UPPER_QUANTILE
from zitd_gnn.distributions.tweedie import (
    SeriesConfig,
    TweedieParams,
    compound_params,
    poisson_rate,
    tweedie_log_density,
)
from zitd_gnn.errors import ContractError, NumericError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZitdParams:
    """Zero-inflation probability plus the Tweedie component."""

    pi: float
    td: TweedieParams

    def __post_init__(self):
        if not (0.0 <= self.pi <= 1.0):
            raise ContractError(f"pi must lie in [0, 1], got {self.pi}")
        object.__setattr__(self, "pi", float(self.pi))

    @classmethod
    def of(cls, pi: float, mu: float, phi: float, rho: float) -> "ZitdParams":
        """Build from the four raw parameters."""
        return cls(pi, TweedieParams(mu, phi, rho))


class ZitdMoments(NamedTuple):
    mean: float
    tweedie_variance: float


class Interval(NamedTuple):
    lower: float
    upper: float


@dataclass(frozen=True)
class MonteCarlo:
    """Quantiles from order statistics of ``n`` seeded draws."""

    n: int = INTERVAL_SAMPLES
    seed: int | np.random.SeedSequence = 0


@dataclass(frozen=True)
class CdfBisection:
    """Quantiles by bisecting the numerically integrated CDF."""

    xtol: float = 1e-10
    cfg: SeriesConfig = SeriesConfig()


IntervalMethod = MonteCarlo | CdfBisection


def zitd_zero_mass(z: ZitdParams) -> float:
    """P(y = 0) = pi + (1 - pi) exp(-lambda)."""
    lam = poisson_rate(z.td.mu, z.td.phi, z.td.rho)
    return z.pi + (1.0 - z.pi) * math.exp(-lam)


def zitd_log_density(y: float, z: ZitdParams, cfg: SeriesConfig = SeriesConfig()) -> float:
    """
    Log-density of a ZITD variable.

    Args:
        y: Observation, y >= 0.
        z: ZITD parameters.
        cfg: Series stopping rule.

    Returns:
        log(pi + (1 - pi) e^-lambda) at zero (evaluated with log-sum-exp),
        log(1 - pi) + Tweedie log-density above zero. When pi = 1 and y > 0
        the result is -inf.
    """
    if not y >= 0.0:
        raise ContractError(f"y must be >= 0, got {y}")
    if y == 0.0:
        lam = poisson_rate(z.td.mu, z.td.phi, z.td.rho)
        with np.errstate(divide="ignore"):
            return float(np.logaddexp(np.log(z.pi), np.log1p(-z.pi) - lam))
    if z.pi == 1.0:
        logger.warning("zero-probability observation: y=%g under pi=1", y)
        return -math.inf
    return math.log1p(-z.pi) + tweedie_log_density(y, z.td, cfg)


def zitd_moments(z: ZitdParams) -> ZitdMoments:
    """Mean (1 - pi) mu and the Tweedie component variance phi mu^rho."""
    return ZitdMoments(
        mean=(1.0 - z.pi) * z.td.mu,
        tweedie_variance=z.td.phi * z.td.mu ** z.td.rho,
    )


def sample_zitd(z: ZitdParams, n: int, seed: int | np.random.SeedSequence) -> np.ndarray:
    """
    Draw ``n`` ZITD samples.

    Each draw is zero with probability pi; otherwise C ~ Poisson(lambda)
    jumps of Gamma(shape, scale) are summed. The sum of C jumps is drawn
    as one Gamma(C * shape, scale) variate, which has the same law.

    Args:
        z: ZITD parameters.
        n: Number of draws, n >= 1.
        seed: Integer seed or SeedSequence; the output is a pure function of it.
    """
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    inflated = rng.random(n) < z.pi
    out = np.zeros(n)
    if z.td.mu == 0.0:
        return out
    cp = compound_params(z.td)
    counts = rng.poisson(cp.lam, size=n)
    active = ~inflated & (counts > 0)
    out[active] = rng.gamma(counts[active] * cp.gamma_shape, cp.gamma_scale)
    return out


def zitd_cdf(v: float, z: ZitdParams, cfg: SeriesConfig = SeriesConfig()) -> float:
    """P(y <= v): zero mass plus the integral of the continuous part over (0, v]."""
    p0 = zitd_zero_mass(z)
    if v <= 0.0:
        return p0 if v == 0.0 else 0.0
    if z.pi == 1.0 or z.td.mu == 0.0:
        return 1.0

    def density(y: float) -> float:
        if y <= 0.0:
            return 0.0
        return math.exp(tweedie_log_density(y, z.td, cfg))

    breaks = [b for b in (0.1 * z.td.mu, z.td.mu, 4.0 * z.td.mu) if 0.0 < b < v]
    mass, _ = quad(density, 0.0, v, points=breaks or None, limit=200)
    return min(1.0, p0 + (1.0 - z.pi) * mass)


def _empirical_quantile(sorted_draws: np.ndarray, q: float) -> float:
    # smallest v with ECDF(v) >= q
    index = max(0, int(math.ceil(q * len(sorted_draws))) - 1)
    return float(sorted_draws[index])


def _bisect_quantile(z: ZitdParams, q: float, method: CdfBisection) -> float:
    if zitd_zero_mass(z) >= q:
        return 0.0
    mean = zitd_moments(z).mean
    sd = math.sqrt(zitd_moments(z).tweedie_variance)
    hi = mean + 10.0 * sd + 1.0
    for _ in range(60):
        if zitd_cdf(hi, z, method.cfg) >= q:
            break
        hi *= 2.0
    else:
        raise NumericError(f"could not bracket quantile {q} for {z}")
    return float(bisect(lambda v: zitd_cdf(v, z, method.cfg) - q, 0.0, hi, xtol=method.xtol))


def zitd_interval(
    z: ZitdParams,
    lower_q: float = LOWER_QUANTILE,
    upper_q: float = UPPER_QUANTILE,
    method: IntervalMethod = MonteCarlo(),
) -> Interval:
    """
    Central prediction interval (L, U) of a ZITD variable.

    Quantiles are inclusive: the q-quantile is the smallest v with
    CDF(v) >= q, so a zero mass of at least ``upper_q`` gives (0, 0).

    Args:
        z: ZITD parameters.
        lower_q: Lower quantile level.
        upper_q: Upper quantile level.
        method: MonteCarlo(n, seed) or CdfBisection().

    Raises:
        ContractError: Unless 0 < lower_q < upper_q < 1.
    """
    if not (0.0 < lower_q < upper_q < 1.0):
        raise ContractError(f"need 0 < lower_q < upper_q < 1, got ({lower_q}, {upper_q})")
    if zitd_zero_mass(z) >= upper_q:
        logger.debug("zero mass covers the upper quantile; interval is (0, 0)")
        return Interval(0.0, 0.0)

    if isinstance(method, MonteCarlo):
        draws = np.sort(sample_zitd(z, method.n, method.seed))
        lower = _empirical_quantile(draws, lower_q)
        upper = _empirical_quantile(draws, upper_q)
    else:
        lower = _bisect_quantile(z, lower_q, method)
        upper = _bisect_quantile(z, upper_q, method)
    return Interval(lower, max(lower, upper))
