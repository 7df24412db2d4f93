"""
ZITD negative log-likelihood used for training.

Zero cells use the exact zero mass by default. Positive cells use the
closed-form lower bound of log f that replaces the density series by its
dominant term, so training never evaluates the series. The exact NLL is
available for evaluation.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from zitd_gnn.constants import DEFAULT_ETA, EPSILON, PI_GUARD
from zitd_gnn.core.tensor import Parameter, Tensor, as_tensor, logaddexp
from zitd_gnn.distributions.tweedie import (
    SeriesConfig,
    canonical_theta,
    clamp_rho,
    cumulant_kappa,
    j_max,
    poisson_rate,
    series_exponent,
)
from zitd_gnn.distributions.zitd import ZitdParams, zitd_log_density
from zitd_gnn.errors import ContractError, ShapeError
from zitd_gnn.model.decoder import ZitdField

logger = logging.getLogger(__name__)

Reduction = Literal["sum", "mean"]


@dataclass(frozen=True)
class LossConfig:
    """
    Attributes:
        eta: L2 weight on the sum of squared parameters.
        paper_literal_zero_branch: Use -(log pi + log(1 - pi) - lambda) for
            zero cells instead of the exact -log(pi + (1 - pi) e^-lambda).
        mu_floor: mu is floored at this value inside the loss.
    """

    eta: float = DEFAULT_ETA
    paper_literal_zero_branch: bool = False
    mu_floor: float = EPSILON

    def __post_init__(self):
        if not self.eta >= 0.0:
            raise ContractError(f"eta must be >= 0, got {self.eta}")
        if not self.mu_floor > 0.0:
            raise ContractError("mu_floor must be positive")


# --- scalar forms ---

def nll_positive_lower_bound(y: float, z: ZitdParams, cfg: LossConfig = LossConfig()) -> float:
    """
    Negated lower bound of log f(y) for y > 0.

    log f >= log(1 - pi) + (y theta - kappa) / phi
             - log(j_max sqrt(-a) y) + j_max (a - 1),
    with a = (2 - rho) / (1 - rho) and j_max = y^(2-rho) / ((2-rho) phi).

    Returns:
        The bound as a loss; ``inf`` when pi = 1.

    Raises:
        ContractError: If y is not positive.
    """
    if not y > 0.0:
        raise ContractError(f"the positive branch needs y > 0, got {y}")
    if z.pi >= 1.0:
        logger.warning("pi = 1 on a positive cell (y=%g); loss is infinite", y)
        return math.inf
    mu = max(z.td.mu, cfg.mu_floor)
    phi, rho = z.td.phi, z.td.rho
    a = series_exponent(rho)
    jm = j_max(y, phi, rho)
    exponent = (y * canonical_theta(mu, rho) - cumulant_kappa(mu, rho)) / phi
    log_f = (
        math.log1p(-z.pi)
        + exponent
        - (math.log(jm) + 0.5 * math.log(-a) + math.log(y))
        + jm * (a - 1.0)
    )
    return -log_f


def nll_zero(z: ZitdParams, cfg: LossConfig = LossConfig()) -> float:
    """
    NLL of an observed zero.

    Default: -log(pi + (1 - pi) e^-lambda). With ``paper_literal_zero_branch``:
    -(log pi + log(1 - pi) - lambda), infinite when pi is 0 or 1.
    """
    lam = float(poisson_rate(max(z.td.mu, cfg.mu_floor), z.td.phi, z.td.rho))
    if cfg.paper_literal_zero_branch:
        if z.pi <= 0.0 or z.pi >= 1.0:
            logger.warning("sum-of-logs zero branch at pi=%g takes the log of zero", z.pi)
            return math.inf
        return -(math.log(z.pi) + math.log1p(-z.pi) - lam)
    with np.errstate(divide="ignore"):
        return -float(np.logaddexp(np.log(z.pi), np.log1p(-z.pi) - lam))


# --- tensor forms ---

def _guard(pi: Tensor) -> Tensor:
    return pi.clip(PI_GUARD, 1.0 - PI_GUARD)


def positive_branch(y: np.ndarray, pi: Tensor, mu: Tensor, phi: Tensor, rho: Tensor, cfg: LossConfig) -> Tensor:
    """Elementwise ``nll_positive_lower_bound`` for cells with y > 0."""
    log_y = np.log(y)
    mu = mu.clip(lower=cfg.mu_floor)
    log_mu = mu.log()
    one_minus = 1.0 - rho
    two_minus = 2.0 - rho
    theta = (one_minus * log_mu).exp() / one_minus
    kappa = (two_minus * log_mu).exp() / two_minus
    exponent = (y * theta - kappa) / phi
    a = two_minus / one_minus
    log_jm = two_minus * log_y - two_minus.log() - phi.log()
    log_f = (
        (1.0 - _guard(pi)).log()
        + exponent
        - (log_jm + 0.5 * (-a).log() + log_y)
        + log_jm.exp() * (a - 1.0)
    )
    return -log_f


def zero_branch(pi: Tensor, mu: Tensor, phi: Tensor, rho: Tensor, cfg: LossConfig) -> Tensor:
    """Elementwise ``nll_zero``."""
    two_minus = 2.0 - rho
    lam = ((two_minus * mu.clip(lower=cfg.mu_floor).log()).exp()) / (phi * two_minus)
    pi = _guard(pi)
    if cfg.paper_literal_zero_branch:
        return -(pi.log() + (1.0 - pi).log() - lam)
    return -logaddexp(pi.log(), (1.0 - pi).log() - lam)


def regularization(parameters: Sequence[Parameter]) -> Tensor:
    """Sum of squared entries over all parameters."""
    total = as_tensor(0.0)
    for p in parameters:
        total = total + (p * p).sum()
    return total


def total_loss(
    targets: np.ndarray,
    field: ZitdField,
    parameters: Sequence[Parameter] = (),
    cfg: LossConfig = LossConfig(),
    reduction: Reduction = "sum",
) -> Tensor:
    """
    Zero-branch NLL + positive-branch NLL + eta * sum(theta^2).

    Every cell contributes to exactly one branch. ``reduction="mean"``
    divides the data terms by the number of cells; the regularisation term
    is added unchanged.

    Args:
        targets: Observed risk, (N, p).
        field: Decoded parameters, (N, p) each.
        parameters: Weights entering the L2 term.
        cfg: Loss settings.
        reduction: "sum" for optimisation, "mean" for reporting.

    Raises:
        ShapeError: If the targets and the field disagree.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != field.shape:
        raise ShapeError("total_loss", targets.shape, field.shape)
    if (targets < 0).any():
        raise ContractError("targets must be nonnegative")

    data = as_tensor(0.0)
    zero_idx = np.nonzero(targets == 0.0)
    if len(zero_idx[0]):
        data = data + zero_branch(
            field.pi[zero_idx], field.mu[zero_idx], field.phi[zero_idx], field.rho[zero_idx], cfg
        ).sum()
    pos_idx = np.nonzero(targets > 0.0)
    if len(pos_idx[0]):
        data = data + positive_branch(
            targets[pos_idx],
            field.pi[pos_idx], field.mu[pos_idx], field.phi[pos_idx], field.rho[pos_idx],
            cfg,
        ).sum()
    if reduction == "mean":
        data = data / float(targets.size)
    elif reduction != "sum":
        raise ContractError(f"unknown reduction {reduction!r}")
    if cfg.eta > 0.0 and parameters:
        data = data + cfg.eta * regularization(parameters)
    return data


def exact_nll_field(
    targets: np.ndarray,
    field: ZitdField,
    cfg: LossConfig = LossConfig(),
    series: SeriesConfig = SeriesConfig(),
) -> float:
    """
    Per-cell mean of -zitd_log_density over a field, with mu floored.

    Evaluates the density series cell by cell; for evaluation only.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != field.shape:
        raise ShapeError("exact_nll_field", targets.shape, field.shape)
    values = field.stacked()
    total = 0.0
    for (i, j), y in np.ndenumerate(targets):
        pi, mu, phi, rho = values[i, j]
        z = ZitdParams.of(pi, max(mu, cfg.mu_floor), phi, clamp_rho(rho))
        total -= zitd_log_density(float(y), z, series)
    return total / targets.size
