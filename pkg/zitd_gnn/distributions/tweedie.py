"""
Tweedie distribution with index 1 < rho < 2 (compound Poisson-Gamma).

Densities are evaluated in log space. For y > 0 the normalising series
W(y, phi, rho) = sum_j W_j is summed around its dominant index
j_max = y^(2-rho) / ((2-rho) phi), expanding outward in both directions
until terms drop below a relative tolerance of the running maximum.

Two different exponents appear in the literature under the same letter.
Here ``series_exponent`` is (2-rho)/(1-rho) < 0 and ``gamma_shape`` is
(2-rho)/(rho-1) > 0; they are negatives of each other.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from zitd_gnn.constants import RHO_MAX, RHO_MIN, SERIES_MAX_TERMS, SERIES_TOLERANCE
from zitd_gnn.errors import ContractError, SeriesConvergenceError

logger = logging.getLogger(__name__)

_CHUNK = 16


@dataclass(frozen=True)
class SeriesConfig:
    """Stopping rule for the density series."""

    relative_term_tolerance: float = SERIES_TOLERANCE
    max_terms: int = SERIES_MAX_TERMS

    def __post_init__(self):
        if not self.relative_term_tolerance > 0:
            raise ContractError("relative_term_tolerance must be positive")
        if self.max_terms < 1:
            raise ContractError("max_terms must be at least 1")


def clamp_rho(rho: float) -> float:
    """Pull rho inside [1 + 1e-9, 2 - 1e-9]; both endpoints are singular."""
    return float(min(max(rho, RHO_MIN), RHO_MAX))


@dataclass(frozen=True)
class TweedieParams:
    """
    Mean, dispersion and index of a Tweedie variable.

    ``rho`` must lie in [1, 2]; it is stored clamped to the open interval.
    """

    mu: float
    phi: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu >= 0.0):
            raise ContractError(f"mu must be finite and >= 0, got {self.mu}")
        if not (math.isfinite(self.phi) and self.phi > 0.0):
            raise ContractError(f"phi must be finite and > 0, got {self.phi}")
        if not (1.0 <= self.rho <= 2.0):
            raise ContractError(f"rho must lie in (1, 2), got {self.rho}")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "phi", float(self.phi))
        object.__setattr__(self, "rho", clamp_rho(self.rho))


@dataclass(frozen=True)
class CompoundParams:
    """Poisson rate and Gamma shape/scale of the compound construction."""

    lam: float
    gamma_shape: float
    gamma_scale: float


# --- shared helpers (scalar or array) ---

def series_exponent(rho):
    """(2 - rho) / (1 - rho), negative on (1, 2)."""
    return (2.0 - rho) / (1.0 - rho)


def gamma_shape(rho):
    """(2 - rho) / (rho - 1), the Gamma shape of each compound jump."""
    return (2.0 - rho) / (rho - 1.0)


def j_max(y, phi, rho):
    """Index of the dominant series term, y^(2-rho) / ((2-rho) phi)."""
    return y ** (2.0 - rho) / ((2.0 - rho) * phi)


def canonical_theta(mu, rho):
    """Canonical parameter mu^(1-rho) / (1-rho)."""
    return mu ** (1.0 - rho) / (1.0 - rho)


def cumulant_kappa(mu, rho):
    """Cumulant function mu^(2-rho) / (2-rho)."""
    return mu ** (2.0 - rho) / (2.0 - rho)


def poisson_rate(mu, phi, rho):
    """lambda = mu^(2-rho) / (phi (2-rho)); P(Y = 0) = exp(-lambda)."""
    return cumulant_kappa(mu, rho) / phi


def compound_params(td: TweedieParams) -> CompoundParams:
    """
    Map (mu, phi, rho) onto the equivalent Poisson-Gamma parameters.

    Args:
        td: Tweedie parameters.

    Returns:
        lambda = mu^(2-rho)/(phi(2-rho)), shape = (2-rho)/(rho-1) and
        scale = phi(rho-1)mu^(rho-1); lambda * shape * scale == mu.
    """
    return CompoundParams(
        lam=float(poisson_rate(td.mu, td.phi, td.rho)),
        gamma_shape=float(gamma_shape(td.rho)),
        gamma_scale=float(td.phi * (td.rho - 1.0) * td.mu ** (td.rho - 1.0)),
    )


# --- series density ---

def _log_terms(j: np.ndarray, log_z: float, alpha: float) -> np.ndarray:
    return j * log_z - gammaln(j + 1.0) - gammaln(-alpha * j)


def log_series_normalizer(
    y: float,
    phi: float,
    rho: float,
    cfg: SeriesConfig = SeriesConfig(),
) -> float:
    """
    log a(y, phi, rho) = log sum_j W_j - log y for y > 0.

    The terms are log-concave in j, so the walk in each direction stops once
    the sequence is decreasing and the latest term is below
    ``relative_term_tolerance`` times the largest term seen.

    Raises:
        SeriesConvergenceError: If more than ``cfg.max_terms`` terms are needed.
    """
    rho = clamp_rho(rho)
    alpha = series_exponent(rho)
    log_z = (
        -alpha * math.log(y)
        + alpha * math.log(rho - 1.0)
        - (1.0 - alpha) * math.log(phi)
        - math.log(2.0 - rho)
    )
    log_tol = math.log(cfg.relative_term_tolerance)

    peak = max(1, int(round(j_max(y, phi, rho))))
    first = _log_terms(np.array([float(peak)]), log_z, alpha)
    blocks = [first]
    running_max = float(first[0])
    n_terms = 1

    def exhausted() -> SeriesConvergenceError:
        return SeriesConvergenceError(y, math.nan, phi, rho, n_terms)

    # upward
    j, last = peak, running_max
    while True:
        if n_terms >= cfg.max_terms:
            raise exhausted()
        width = min(_CHUNK, cfg.max_terms - n_terms)
        chunk = np.arange(j + 1, j + 1 + width, dtype=np.float64)
        terms = _log_terms(chunk, log_z, alpha)
        blocks.append(terms)
        n_terms += width
        running_max = max(running_max, float(terms.max()))
        previous = terms[-2] if width > 1 else last
        j, last = int(chunk[-1]), float(terms[-1])
        if last <= previous and last < running_max + log_tol:
            break

    # downward
    j, last = peak, float(first[0])
    while j > 1:
        if n_terms >= cfg.max_terms:
            raise exhausted()
        width = min(_CHUNK, j - 1, cfg.max_terms - n_terms)
        chunk = np.arange(j - 1, j - 1 - width, -1, dtype=np.float64)
        terms = _log_terms(chunk, log_z, alpha)
        blocks.append(terms)
        n_terms += width
        running_max = max(running_max, float(terms.max()))
        previous = terms[-2] if width > 1 else last
        j, last = int(chunk[-1]), float(terms[-1])
        if last <= previous and last < running_max + log_tol:
            break

    return float(logsumexp(np.concatenate(blocks))) - math.log(y)


def tweedie_log_density(
    y: float,
    td: TweedieParams,
    cfg: SeriesConfig = SeriesConfig(),
) -> float:
    """
    Log-density (log-mass at zero) of a Tweedie variable.

    Args:
        y: Observation, y >= 0.
        td: Tweedie parameters.
        cfg: Series stopping rule.

    Returns:
        -lambda at y = 0; otherwise
        log a(y, phi, rho) + (y theta - kappa) / phi.

    Raises:
        ContractError: If y is negative.
        SeriesConvergenceError: If the series does not converge; the error
            carries (y, mu, phi, rho).
    """
    if not y >= 0.0:
        raise ContractError(f"y must be >= 0, got {y}")
    if y == 0.0:
        return -float(poisson_rate(td.mu, td.phi, td.rho))
    if td.mu == 0.0:
        return -math.inf
    try:
        log_a = log_series_normalizer(y, td.phi, td.rho, cfg)
    except SeriesConvergenceError as exc:
        raise SeriesConvergenceError(y, td.mu, td.phi, td.rho, exc.terms) from None
    exponent = (y * canonical_theta(td.mu, td.rho) - cumulant_kappa(td.mu, td.rho)) / td.phi
    return log_a + float(exponent)


# --- independent mixture oracle ---

@dataclass(frozen=True)
class OracleDensity:
    """Truncated mixture log-density plus the Poisson tail it ignores."""

    log_density: float
    truncation_bound: float


def default_oracle_terms(y: float, cp: CompoundParams, tail: float = 1e-16) -> int:
    """Enough mixture components to cover the Poisson tail and the bulk at y."""
    poisson_cover = float(stats.poisson.isf(tail, cp.lam)) if cp.lam > 0 else 0.0
    centre = max(cp.lam, y / (cp.gamma_shape * cp.gamma_scale))
    return int(math.ceil(max(poisson_cover, 2.0 * centre + 10.0 * math.sqrt(centre)))) + 64


def oracle_mixture_log_density(y: float, cp: CompoundParams, j_terms: int) -> OracleDensity:
    """
    Log-density of a Poisson(lambda) sum of Gamma(shape, scale) jumps at y > 0.

    Evaluates log sum_{j=1..j_terms} PoissonPMF(j) GammaPDF(y; j shape, scale)
    with scipy.stats; it shares no code with the series path.

    Args:
        y: Positive observation.
        cp: Compound parameters.
        j_terms: Number of mixture components kept.

    Returns:
        The log-density and the Poisson tail mass P(C > j_terms).
    """
    if not y > 0.0:
        raise ContractError(f"oracle needs y > 0, got {y}")
    if j_terms < 1:
        raise ContractError("j_terms must be at least 1")
    j = np.arange(1, j_terms + 1, dtype=np.float64)
    log_terms = stats.poisson.logpmf(j, cp.lam) + stats.gamma.logpdf(
        y, a=j * cp.gamma_shape, scale=cp.gamma_scale
    )
    return OracleDensity(
        log_density=float(logsumexp(log_terms)),
        truncation_bound=float(stats.poisson.sf(j_terms, cp.lam)),
    )
