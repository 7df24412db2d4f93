"""
Elementwise functions used by the tensor engine.

Each entry pairs a forward map with its derivative. Derivatives receive both
the input x and the already computed output y so that sigmoid/tanh/exp can
reuse the forward value.
"""

from typing import Callable, NamedTuple

import numpy as np
from scipy.special import expit

from zitd_gnn.constants import LEAKY_SLOPE


class Elementwise(NamedTuple):
    """A differentiable elementwise function."""

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray, np.ndarray], np.ndarray]


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function, computed without overflow for large |x|."""
    return expit(x)


def tanh(x: np.ndarray) -> np.ndarray:
    """Hyperbolic tangent."""
    return np.tanh(x)


def relu(x: np.ndarray) -> np.ndarray:
    """Rectified linear unit. Subgradient at 0 is 0."""
    return np.maximum(x, 0.0)


def leaky_relu(x: np.ndarray, slope: float = LEAKY_SLOPE) -> np.ndarray:
    """LeakyReLU with the given negative slope."""
    return np.where(x > 0.0, x, slope * x)


def exp(x: np.ndarray) -> np.ndarray:
    """Exponential."""
    return np.exp(x)


def log(x: np.ndarray) -> np.ndarray:
    """Natural logarithm. Inputs must be strictly positive."""
    return np.log(x)


def power(x: np.ndarray, k: float) -> np.ndarray:
    """x raised to a constant power k."""
    return np.power(x, k)


def get(name: str, *, slope: float = LEAKY_SLOPE, k: float = 1.0) -> Elementwise:
    """
    Look up an elementwise function by name.

    Args:
        name: One of sigmoid, tanh, relu, leaky_relu, exp, log, power.
        slope: Negative slope for leaky_relu.
        k: Exponent for power.

    Returns:
        The matching Elementwise record.

    Raises:
        KeyError: If the name is unknown.
    """
    if name == "sigmoid":
        return Elementwise(name, sigmoid, lambda x, y: y * (1.0 - y))
    if name == "tanh":
        return Elementwise(name, tanh, lambda x, y: 1.0 - y * y)
    if name == "relu":
        return Elementwise(name, relu, lambda x, y: (x > 0.0).astype(np.float64))
    if name == "leaky_relu":
        return Elementwise(
            name,
            lambda x: leaky_relu(x, slope),
            lambda x, y: np.where(x > 0.0, 1.0, slope),
        )
    if name == "exp":
        return Elementwise(name, exp, lambda x, y: y)
    if name == "log":
        return Elementwise(name, log, lambda x, y: 1.0 / x)
    if name == "power":
        return Elementwise(
            f"power({k})",
            lambda x: power(x, k),
            lambda x, y: k * np.power(x, k - 1.0),
        )
    raise KeyError(f"Unknown elementwise function: {name}")
