"""
Base class for collections of learnable weights.

A Module owns Parameters and child Modules as attributes. Parameter names
are dotted attribute paths, e.g. ``gat.layers.0.heads.1.attention``.
"""

from abc import ABC, abstractmethod
from typing import Any, Iterator

import numpy as np

from zitd_gnn.core.tensor import Parameter
from zitd_gnn.errors import ContractError, ShapeError


def xavier_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    """Glorot/Xavier uniform initialisation for a fan_in x fan_out matrix."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Module(ABC):
    """
    Base class for all weight containers.

    Subclasses assign Parameters, Modules or lists of Modules as attributes
    and implement ``forward``.
    """

    training: bool = True

    @abstractmethod
    def forward(self, *args: Any, **kwargs: Any) -> Any:
        """Run the module."""

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        """Yield (dotted name, parameter) pairs in attribute order."""
        for attr, value in vars(self).items():
            path = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(path + ".")
            elif isinstance(value, list) and value and isinstance(value[0], Module):
                for i, child in enumerate(value):
                    yield from child.named_parameters(f"{path}.{i}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def modules(self) -> Iterator["Module"]:
        yield self
        for value in vars(self).values():
            if isinstance(value, Module):
                yield from value.modules()
            elif isinstance(value, list) and value and isinstance(value[0], Module):
                for child in value:
                    yield from child.modules()

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.zero_grad()

    def train(self, mode: bool = True) -> "Module":
        for module in self.modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def state_dict(self) -> dict[str, np.ndarray]:
        """Copy every parameter's values, keyed by dotted name."""
        return {name: p.values.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """
        Overwrite parameter values in place.

        Raises:
            ContractError: If names are missing or unexpected.
            ShapeError: If a stored array has the wrong shape.
        """
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise ContractError(
                f"state mismatch: missing={missing}, unexpected={unexpected}"
            )
        for name, param in own.items():
            values = np.asarray(state[name], dtype=np.float64)
            if values.shape != param.shape:
                raise ShapeError(f"load_state_dict[{name}]", param.shape, values.shape)
            param.values[...] = values
