"""Reverse-mode automatic differentiation used for the wavefunction gradients."""
from . import functional
from .params import GRU_VARIANTS, RNN_VARIANTS, VARIANTS, ParamVector, Segment, grad_of, param_count
from .tape import PRIMITIVES, Tape, Var, value

__all__ = [
    "functional", "Tape", "Var", "value", "PRIMITIVES",
    "ParamVector", "Segment", "grad_of", "param_count",
    "VARIANTS", "RNN_VARIANTS", "GRU_VARIANTS",
]
