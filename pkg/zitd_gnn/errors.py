"""
Exception hierarchy for zitd_gnn.

Library code raises these; only the CLI maps them onto exit codes.
"""

from typing import Sequence


class ZitdError(Exception):
    """Base class for all zitd_gnn errors."""


class ConfigError(ZitdError):
    """Unknown key, wrong type or missing required setting."""


class DataError(ZitdError):
    """Malformed input data: bad schema, out-of-range record, invalid edge."""


class ContractError(ZitdError, ValueError):
    """A documented precondition was violated by the caller."""


class ShapeError(ContractError):
    """Operand shapes do not agree."""

    def __init__(self, op: str, *shapes: Sequence[int]):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        rendered = " vs ".join(str(s) for s in self.shapes)
        super().__init__(f"{op}: incompatible shapes {rendered}")


class NumericError(ZitdError):
    """Base class for numeric failures."""


class NonFiniteError(NumericError):
    """An operation produced NaN or infinity."""

    def __init__(self, op: str, index: tuple[int, ...], value: float):
        self.op = op
        self.index = index
        self.value = value
        super().__init__(f"{op} produced non-finite value {value!r} at index {index}")


class NonFiniteGradientError(NumericError):
    """A gradient entering the optimiser is NaN or infinite."""

    def __init__(self, parameter: str, index: tuple[int, ...]):
        self.parameter = parameter
        self.index = index
        super().__init__(f"non-finite gradient for '{parameter}' at index {index}")


class SeriesConvergenceError(NumericError):
    """The Tweedie series did not converge within the term budget."""

    def __init__(self, y: float, mu: float, phi: float, rho: float, terms: int):
        self.y, self.mu, self.phi, self.rho = y, mu, phi, rho
        self.terms = terms
        super().__init__(
            f"Tweedie series did not converge after {terms} terms "
            f"(y={y}, mu={mu}, phi={phi}, rho={rho})"
        )


class DivergenceError(NumericError):
    """
    Training loss or gradients became non-finite.

    Carries the last good checkpoint (None before the first validated
    epoch) and the loss history recorded so far.
    """

    def __init__(self, message: str, checkpoint=None, history=None):
        self.checkpoint = checkpoint
        self.history = history or []
        super().__init__(message)
