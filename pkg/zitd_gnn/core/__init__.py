"""Tensor engine: autodiff tensors, parameters, modules and gradient checks."""

from zitd_gnn.core.tensor import (
    Parameter,
    Tape,
    Tensor,
    apply_elementwise,
    backward,
    concat,
    logaddexp,
    masked_softmax,
    matmul,
    no_grad,
    stack,
)
from zitd_gnn.core.gradcheck import GradCheckEntry, GradCheckReport, grad_check
from zitd_gnn.core.module import Module, xavier_uniform

__all__ = [
    "Tensor",
    "Parameter",
    "Tape",
    "apply_elementwise",
    "matmul",
    "backward",
    "concat",
    "stack",
    "logaddexp",
    "masked_softmax",
    "no_grad",
    "grad_check",
    "GradCheckEntry",
    "GradCheckReport",
    "Module",
    "xavier_uniform",
]
