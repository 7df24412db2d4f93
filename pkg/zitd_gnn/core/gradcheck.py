"""
Finite-difference validation of the autodiff engine.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from zitd_gnn.constants import GRADCHECK_STEP, GRADCHECK_TOLERANCE
from zitd_gnn.core.tensor import Parameter, Tensor, backward, no_grad


@dataclass(frozen=True)
class GradCheckEntry:
    """One compared gradient entry."""

    parameter: str
    index: tuple[int, ...]
    autodiff: float
    numeric: float
    rel_error: float


@dataclass(frozen=True)
class GradCheckReport:
    """Outcome of a gradient check."""

    max_rel_error: float
    worst: GradCheckEntry | None
    n_checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def grad_check(
    closure: Callable[[], Tensor],
    parameters: Sequence[Parameter],
    step: float = GRADCHECK_STEP,
    tolerance: float = GRADCHECK_TOLERANCE,
    max_entries: int | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compare autodiff gradients with central differences.

    The relative error of an entry is
    |autodiff - numeric| / max(1, |numeric|).

    Args:
        closure: Rebuilds the graph and returns the scalar loss.
        parameters: Parameters to perturb.
        step: Finite-difference step.
        tolerance: Pass threshold on the maximum relative error.
        max_entries: If set, check at most this many randomly chosen entries
            per parameter.
        seed: Seed for the entry sampling.

    Returns:
        A report; it never raises on a failed comparison.
    """
    if not parameters:
        return GradCheckReport(0.0, None, 0, tolerance)

    backward(closure())
    analytic = {id(p): p.grad.copy() for p in parameters}
    rng = np.random.default_rng(seed)

    worst: GradCheckEntry | None = None
    n_checked = 0
    for param in parameters:
        flat_indices = np.arange(param.size)
        if max_entries is not None and param.size > max_entries:
            flat_indices = np.sort(rng.choice(param.size, size=max_entries, replace=False))
        for flat in flat_indices:
            index = tuple(int(i) for i in np.unravel_index(int(flat), param.shape))
            original = param.values[index]
            with no_grad():
                param.values[index] = original + step
                f_plus = closure().item()
                param.values[index] = original - step
                f_minus = closure().item()
            param.values[index] = original

            numeric = (f_plus - f_minus) / (2.0 * step)
            autodiff = float(analytic[id(param)][index])
            rel = abs(autodiff - numeric) / max(1.0, abs(numeric))
            n_checked += 1
            if worst is None or rel > worst.rel_error:
                worst = GradCheckEntry(param.name, index, autodiff, numeric, rel)

    return GradCheckReport(worst.rel_error, worst, n_checked, tolerance)
