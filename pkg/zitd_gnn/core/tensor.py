"""
Dense tensors with reverse-mode automatic differentiation.

Every differentiable operation returns a new Tensor that remembers its
parents and a vector-Jacobian product. ``backward`` records a Tape (the
reachable operations in topological order) and walks it in reverse.
The graph is rebuilt on every forward pass.
"""

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from zitd_gnn import activations
from zitd_gnn.constants import LEAKY_SLOPE
from zitd_gnn.errors import ContractError, NonFiniteError, ShapeError

ArrayLike = np.ndarray | float | int | Sequence
VJP = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_grad_enabled = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording inside the block (evaluation passes)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


@dataclass
class _Node:
    op: str
    parents: tuple["Tensor", ...]
    vjp: VJP


class Tensor:
    """
    A 64-bit dense array that may take part in differentiation.

    Args:
        values: Array-like data; always copied into a float64 array.
        requires_grad: Whether gradients should flow into this tensor.
        name: Optional identifier used in diagnostics.
    """

    __array_priority__ = 100
    __array_ufunc__ = None

    def __init__(
        self,
        values: ArrayLike,
        requires_grad: bool = False,
        name: str | None = None,
    ):
        self.values = np.array(values, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.grad: np.ndarray | None = None
        self._node: _Node | None = None

    # --- convenience ---
    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def item(self) -> float:
        if self.values.size != 1:
            raise ContractError(f"item() needs a single value, got shape {self.shape}")
        return float(self.values.reshape(()))

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying values."""
        return self.values.copy()

    def detach(self) -> "Tensor":
        return Tensor(self.values)

    def __repr__(self) -> str:
        label = f", name={self.name}" if self.name else ""
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{grad}{label})"

    # --- operators ---
    def __add__(self, other: "Tensor | ArrayLike") -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: "Tensor | ArrayLike") -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: "Tensor | ArrayLike") -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: "Tensor | ArrayLike") -> "Tensor":
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return div(other, self)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __pow__(self, k: float) -> "Tensor":
        return apply_elementwise(self, "power", k=k)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __getitem__(self, index) -> "Tensor":
        return take(self, index)

    # --- method forms ---
    def sum(self, axis: int | None = None, keepdims: bool = False) -> "Tensor":
        return reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: int | None = None, keepdims: bool = False) -> "Tensor":
        return reduce_mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: int) -> "Tensor":
        return reshape(self, shape)

    def exp(self) -> "Tensor":
        return apply_elementwise(self, "exp")

    def log(self) -> "Tensor":
        return apply_elementwise(self, "log")

    def sigmoid(self) -> "Tensor":
        return apply_elementwise(self, "sigmoid")

    def tanh(self) -> "Tensor":
        return apply_elementwise(self, "tanh")

    def relu(self) -> "Tensor":
        return apply_elementwise(self, "relu")

    def leaky_relu(self, slope: float = LEAKY_SLOPE) -> "Tensor":
        return apply_elementwise(self, "leaky_relu", slope=slope)

    def clip(self, lower: float | None = None, upper: float | None = None) -> "Tensor":
        return clip(self, lower, upper)


class Parameter(Tensor):
    """
    A named, learnable tensor.

    The gradient always has the tensor's shape and is reset to zero at the
    start of every backward pass that reaches it.
    """

    def __init__(self, values: ArrayLike, name: str):
        super().__init__(values, requires_grad=True, name=name)
        self.grad = np.zeros_like(self.values)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.values)

    def __repr__(self) -> str:
        return f"Parameter(name={self.name}, shape={self.shape})"


def as_tensor(x: "Tensor | ArrayLike") -> Tensor:
    """Wrap constants; pass tensors through unchanged."""
    return x if isinstance(x, Tensor) else Tensor(x)


def _check_finite(op: str, values: np.ndarray) -> None:
    finite = np.isfinite(values)
    if not finite.all():
        flat = int(np.flatnonzero(~finite)[0])
        index = tuple(int(i) for i in np.unravel_index(flat, values.shape))
        raise NonFiniteError(op, index, float(values.reshape(-1)[flat]))


def _make(op: str, values: np.ndarray, parents: Sequence[Tensor], vjp: VJP) -> Tensor:
    _check_finite(op, values)
    out = Tensor.__new__(Tensor)
    out.values = values
    out.name = None
    out.grad = None
    out._node = None
    out.requires_grad = _grad_enabled and any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._node = _Node(op, tuple(parents), vjp)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, a.shape, b.shape) from None


# --- arithmetic ---

def add(a: "Tensor | ArrayLike", b: "Tensor | ArrayLike") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    return _make(
        "add",
        a.values + b.values,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: "Tensor | ArrayLike", b: "Tensor | ArrayLike") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)
    return _make(
        "sub",
        a.values - b.values,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: "Tensor | ArrayLike", b: "Tensor | ArrayLike") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)
    return _make(
        "mul",
        a.values * b.values,
        (a, b),
        lambda g: (
            _unbroadcast(g * b.values, a.shape),
            _unbroadcast(g * a.values, b.shape),
        ),
    )


def div(a: "Tensor | ArrayLike", b: "Tensor | ArrayLike") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a.values / b.values
    return _make(
        "div",
        out,
        (a, b),
        lambda g: (
            _unbroadcast(g / b.values, a.shape),
            _unbroadcast(-g * a.values / (b.values * b.values), b.shape),
        ),
    )


def neg(a: Tensor) -> Tensor:
    return _make("neg", -a.values, (a,), lambda g: (-g,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product of two 2-D tensors.

    Raises:
        ShapeError: If either operand is not 2-D or inner dimensions differ.
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    return _make(
        "matmul",
        a.values @ b.values,
        (a, b),
        lambda g: (g @ b.values.T, a.values.T @ g),
    )


def apply_elementwise(
    x: Tensor,
    fn: str,
    *,
    slope: float = LEAKY_SLOPE,
    k: float = 1.0,
) -> Tensor:
    """
    Apply a named elementwise function.

    Args:
        x: Input tensor.
        fn: sigmoid, tanh, relu, leaky_relu, exp, log or power.
        slope: Negative slope for leaky_relu.
        k: Exponent for power.

    Raises:
        ContractError: log applied to a non-positive entry.
        NonFiniteError: The function produced NaN or infinity.
    """
    x = as_tensor(x)
    elem = activations.get(fn, slope=slope, k=k)
    if fn == "log" and x.size and (x.values <= 0.0).any():
        flat = int(np.flatnonzero(x.values.reshape(-1) <= 0.0)[0])
        index = tuple(int(i) for i in np.unravel_index(flat, x.shape))
        raise ContractError(f"log requires positive input; got {x.values.reshape(-1)[flat]} at {index}")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        y = elem.forward(x.values)
    xv = x.values
    return _make(elem.name, y, (x,), lambda g: (g * elem.derivative(xv, y),))


def clip(x: Tensor, lower: float | None = None, upper: float | None = None) -> Tensor:
    """Clamp values; gradient passes only where the input lies inside the bounds."""
    lo = -np.inf if lower is None else lower
    hi = np.inf if upper is None else upper
    inside = (x.values >= lo) & (x.values <= hi)
    return _make("clip", np.clip(x.values, lo, hi), (x,), lambda g: (g * inside,))


def logaddexp(a: "Tensor | ArrayLike", b: "Tensor | ArrayLike") -> Tensor:
    """Stable log(exp(a) + exp(b))."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("logaddexp", a, b)
    out = np.logaddexp(a.values, b.values)

    def vjp(g: np.ndarray):
        wa = np.exp(a.values - out)
        wb = np.exp(b.values - out)
        return _unbroadcast(g * wa, a.shape), _unbroadcast(g * wb, b.shape)

    return _make("logaddexp", out, (a, b), vjp)


# --- reductions and reshaping ---

def reduce_sum(x: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    shape = x.shape

    def vjp(g: np.ndarray):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return _make("sum", np.sum(x.values, axis=axis, keepdims=keepdims), (x,), vjp)


def reduce_mean(x: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    count = x.size if axis is None else x.shape[axis]
    return reduce_sum(x, axis=axis, keepdims=keepdims) * (1.0 / count)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = shape[0]
    original = x.shape
    try:
        out = x.values.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", original, tuple(shape)) from None
    return _make("reshape", out, (x,), lambda g: (g.reshape(original),))


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise ShapeError("transpose", x.shape)
    return _make("transpose", x.values.T.copy(), (x,), lambda g: (g.T,))


def take(x: Tensor, index) -> Tensor:
    """Basic or integer-array indexing, with scatter-add in the backward pass."""
    shape = x.shape

    def vjp(g: np.ndarray):
        out = np.zeros(shape)
        np.add.at(out, index, g)
        return (out,)

    return _make("index", np.array(x.values[index], dtype=np.float64), (x,), vjp)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate along an existing axis."""
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.values for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError("concat", *(t.shape for t in tensors)) from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return _make("concat", out, tensors, lambda g: tuple(np.split(g, bounds, axis=axis)))


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Stack equally shaped tensors along a new axis."""
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.stack([t.values for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError("stack", *(t.shape for t in tensors)) from None
    n = len(tensors)
    return _make(
        "stack",
        out,
        tensors,
        lambda g: tuple(np.take(g, i, axis=axis) for i in range(n)),
    )


def masked_softmax(scores: Tensor, mask: np.ndarray, axis: int = -1) -> Tensor:
    """
    Softmax over the entries where ``mask`` is true; masked entries are 0.

    Raises:
        ContractError: If some row has no unmasked entry.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != scores.shape:
        raise ShapeError("masked_softmax", scores.shape, mask.shape)
    if not mask.any(axis=axis).all():
        raise ContractError("masked_softmax: a row has an empty support")
    shifted = np.where(mask, scores.values, -np.inf)
    shifted = shifted - shifted.max(axis=axis, keepdims=True)
    weights = np.where(mask, np.exp(shifted), 0.0)
    out = weights / weights.sum(axis=axis, keepdims=True)

    def vjp(g: np.ndarray):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner),)

    return _make("masked_softmax", out, (scores,), vjp)


# --- backward pass ---

class Tape:
    """
    Ordered record of the operations that reach a root tensor.

    ``entries`` are non-leaf tensors in topological order (parents first);
    ``leaves`` are the gradient-requiring inputs, typically Parameters.
    """

    def __init__(self, entries: list[Tensor], leaves: list[Tensor]):
        self.entries = entries
        self.leaves = leaves

    @classmethod
    def record(cls, root: Tensor) -> "Tape":
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                order.append(tensor)
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            if tensor._node is not None:
                for parent in tensor._node.parents:
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        entries = [t for t in order if t._node is not None]
        leaves = [t for t in order if t._node is None and t.requires_grad]
        return cls(entries, leaves)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self.entries)


def backward(loss: Tensor) -> Tape:
    """
    Populate ``grad`` on every Parameter reachable from ``loss``.

    Args:
        loss: A scalar tensor produced by taped operations.

    Returns:
        The tape that was traversed.

    Raises:
        ContractError: If ``loss`` has more than one element.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    tape = Tape.record(loss)
    for leaf in tape.leaves:
        leaf.grad = np.zeros_like(leaf.values)
    if not loss.requires_grad:
        return tape
    if loss._node is None:
        loss.grad = loss.grad + 1.0
        return tape

    pending: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}
    for tensor in reversed(tape.entries):
        grad = pending.pop(id(tensor), None)
        if grad is None:
            continue
        node = tensor._node
        for parent, parent_grad in zip(node.parents, node.vjp(grad)):
            if parent_grad is None or not parent.requires_grad:
                continue
            if parent._node is None:
                parent.grad = parent.grad + parent_grad
            elif id(parent) in pending:
                pending[id(parent)] = pending[id(parent)] + parent_grad
            else:
                pending[id(parent)] = parent_grad
    return tape
