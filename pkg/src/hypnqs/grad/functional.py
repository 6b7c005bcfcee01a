"""Array functions that work on plain numpy arrays and on tape variables alike.

Code written against this module runs untaped on ndarrays (inference,
local energies) and taped on :class:`~hypnqs.grad.tape.Var` inputs
(gradients), through the very same forward functions.
"""
from .tape import apply, value

__all__ = [
    "value", "linear", "sum", "square", "sqrt", "exp", "log", "tanh", "sigmoid",
    "sinh", "cosh", "artanh", "arsinh", "arcosh", "abs", "tanhc", "artanhc",
    "sinhc", "arsinhc", "norm", "clamp_ratio", "minimum", "log_softmax",
    "softsign", "concat", "dot",
]


def linear(x, w):
    """``x @ w.T`` for a batch of row vectors ``x``."""
    return apply("linear", x, w)


def sum(x, axis=None, keepdims=False):  # noqa: A001
    return apply("sum", x, axis=axis, keepdims=keepdims)


def dot(x, y):
    """Row-wise inner product over the last axis, kept as a trailing 1-axis."""
    return apply("sum", x * y, axis=-1, keepdims=True)


def square(x):
    return apply("square", x)


def sqrt(x):
    return apply("sqrt", x)


def exp(x):
    return apply("exp", x)


def log(x):
    return apply("log", x)


def tanh(x):
    return apply("tanh", x)


def sigmoid(x):
    return apply("sigmoid", x)


def sinh(x):
    return apply("sinh", x)


def cosh(x):
    return apply("cosh", x)


def artanh(x):
    return apply("artanh", x)


def arsinh(x):
    return apply("arsinh", x)


def arcosh(x):
    return apply("arcosh", x)


def abs(x):  # noqa: A001
    return apply("abs", x)


def tanhc(x):
    """tanh(x)/x, equal to 1 at 0."""
    return apply("tanhc", x)


def artanhc(x):
    """artanh(x)/x, equal to 1 at 0."""
    return apply("artanhc", x)


def sinhc(x):
    """sinh(x)/x, equal to 1 at 0."""
    return apply("sinhc", x)


def arsinhc(x):
    """arsinh(x)/x, equal to 1 at 0."""
    return apply("arsinhc", x)


def norm(x):
    """Euclidean norm over the last axis (kept); gradient 0 at the origin."""
    return apply("norm", x, axis=-1)


def clamp_ratio(n, bound):
    """min(1, bound/n): the factor that rescales a vector of norm n to at most bound."""
    return apply("clamp_ratio", n, bound=bound)


def minimum(x, bound):
    return apply("minimum", x, bound=bound)


def log_softmax(x):
    return apply("log_softmax", x)


def softsign(x):
    return apply("softsign", x)


def concat(xs, axis=-1):
    return apply("concat", *xs, axis=axis)
