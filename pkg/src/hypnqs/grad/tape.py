"""Reverse-mode differentiation over a flat record of array primitives.

Every primitive is a pair of plain numpy functions: a forward map and a
vector-Jacobian product.  :class:`Tape` appends one node per primitive
call; :meth:`Tape.backward` walks the nodes in reverse creation order,
which is a reverse topological order because a node can only reference
nodes created before it.
"""
import numpy as np

__all__ = ["Tape", "Var", "PRIMITIVES", "apply", "value"]

# Small-argument cutoff for the x -> f(x)/x style primitives.  Below it the
# closed forms lose digits to cancellation, so a Taylor series is used.
_SERIES_CUT = 1e-3


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _shape(x):
    return np.shape(x)


# ---------------------------------------------------------------- forwards

def _tanhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0, np.tanh(xs) / xs)


def _d_tanhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    t = np.tanh(xs)
    closed = (xs * (1.0 - t * t) - t) / (xs * xs)
    return np.where(small, -2.0 * x / 3.0 + 8.0 * x ** 3 / 15.0, closed)


def _artanhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 0.5, x)
    x2 = x * x
    return np.where(small, 1.0 + x2 / 3.0 + x2 * x2 / 5.0, np.arctanh(xs) / xs)


def _d_artanhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 0.5, x)
    closed = (xs / (1.0 - xs * xs) - np.arctanh(xs)) / (xs * xs)
    return np.where(small, 2.0 * x / 3.0 + 4.0 * x ** 3 / 5.0, closed)


def _sinhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 + x2 / 6.0 + x2 * x2 / 120.0, np.sinh(xs) / xs)


def _d_sinhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    closed = (xs * np.cosh(xs) - np.sinh(xs)) / (xs * xs)
    return np.where(small, x / 3.0 + x ** 3 / 30.0, closed)


def _arsinhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + 3.0 * x2 * x2 / 40.0, np.arcsinh(xs) / xs)


def _d_arsinhc(x):
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    closed = (xs / np.sqrt(1.0 + xs * xs) - np.arcsinh(xs)) / (xs * xs)
    return np.where(small, -x / 3.0 + 3.0 * x ** 3 / 10.0, closed)


def _norm(x, axis=-1):
    return np.sqrt(np.sum(x * x, axis=axis, keepdims=True))


def _clamp_ratio(n, bound):
    # min(1, bound / n); exactly 1 at n == 0
    n = np.asarray(n, dtype=np.float64)
    over = n > bound
    return np.where(over, bound / np.where(over, n, 1.0), 1.0)


def _log_softmax(x):
    m = np.max(x, axis=-1, keepdims=True)
    z = x - m
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def _linear(x, w):
    return x @ w.T


def _getitem(x, index):
    return x[index]


def _concat(*xs, axis=-1):
    return np.concatenate(xs, axis=axis)


# ---------------------------------------------------------------- vjps
# Signature: vjp(g, out, args, need, **ctx) -> tuple of parent gradients
# (None where need[k] is False).

def _vjp_add(g, out, args, need):
    a, b = args
    return (_unbroadcast(g, _shape(a)) if need[0] else None,
            _unbroadcast(g, _shape(b)) if need[1] else None)


def _vjp_sub(g, out, args, need):
    a, b = args
    return (_unbroadcast(g, _shape(a)) if need[0] else None,
            _unbroadcast(-g, _shape(b)) if need[1] else None)


def _vjp_mul(g, out, args, need):
    a, b = args
    return (_unbroadcast(g * b, _shape(a)) if need[0] else None,
            _unbroadcast(g * a, _shape(b)) if need[1] else None)


def _vjp_div(g, out, args, need):
    a, b = args
    return (_unbroadcast(g / b, _shape(a)) if need[0] else None,
            _unbroadcast(-g * out / b, _shape(b)) if need[1] else None)


def _vjp_linear(g, out, args, need):
    x, w = args
    gx = g @ w if need[0] else None
    gw = g.T @ x if need[1] else None
    return gx, gw


def _vjp_sum(g, out, args, need, axis=None, keepdims=False):
    (a,) = args
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return (np.broadcast_to(g, _shape(a)).copy(),)


def _vjp_getitem(g, out, args, need, index):
    (a,) = args
    full = np.zeros(_shape(a))
    full[index] = g
    return (full,)


def _vjp_concat(g, out, args, need, axis=-1):
    sizes = [np.shape(a)[axis] for a in args]
    splits = np.cumsum(sizes)[:-1]
    parts = np.split(g, splits, axis=axis)
    return tuple(p if n else None for p, n in zip(parts, need))


def _unary(deriv):
    def vjp(g, out, args, need):
        return (g * deriv(args[0], out),)
    return vjp


def _vjp_norm(g, out, args, need, axis=-1):
    (a,) = args
    safe = np.where(out > 0.0, out, 1.0)
    return (np.where(out > 0.0, g * a / safe, 0.0),)


def _vjp_clamp_ratio(g, out, args, need, bound):
    # d/dn min(1, bound/n) = -bound/n^2 beyond the boundary, 0 inside
    n = np.asarray(args[0], dtype=np.float64)
    over = n > bound
    safe = np.where(over, n, 1.0)
    return (np.where(over, -g * bound / (safe * safe), 0.0),)


def _vjp_minimum(g, out, args, need, bound):
    # identity inside, subgradient 0 on the clamped branch
    return (np.where(args[0] <= bound, g, 0.0),)


def _vjp_log_softmax(g, out, args, need):
    p = np.exp(out)
    return (g - p * np.sum(g, axis=-1, keepdims=True),)


def _vjp_softsign(g, out, args, need):
    d = 1.0 + np.abs(args[0])
    return (g / (d * d),)


class Primitive:
    __slots__ = ("name", "fwd", "vjp")

    def __init__(self, name, fwd, vjp):
        self.name = name
        self.fwd = fwd
        self.vjp = vjp


PRIMITIVES = {}


def _register(name, fwd, vjp):
    PRIMITIVES[name] = Primitive(name, fwd, vjp)


_register("add", np.add, _vjp_add)
_register("sub", np.subtract, _vjp_sub)
_register("mul", np.multiply, _vjp_mul)
_register("div", np.divide, _vjp_div)
_register("neg", np.negative, lambda g, out, args, need: (-g,))
_register("linear", _linear, _vjp_linear)
_register("sum", lambda a, axis=None, keepdims=False: np.sum(a, axis=axis, keepdims=keepdims), _vjp_sum)
_register("getitem", _getitem, _vjp_getitem)
_register("concat", _concat, _vjp_concat)
_register("square", np.square, _unary(lambda a, out: 2.0 * a))
_register("sqrt", np.sqrt, _unary(lambda a, out: 0.5 / out))
_register("exp", np.exp, _unary(lambda a, out: out))
_register("log", np.log, _unary(lambda a, out: 1.0 / a))
_register("tanh", np.tanh, _unary(lambda a, out: 1.0 - out * out))
_register("sigmoid", _sigmoid, _unary(lambda a, out: out * (1.0 - out)))
_register("sinh", np.sinh, _unary(lambda a, out: np.cosh(a)))
_register("cosh", np.cosh, _unary(lambda a, out: np.sinh(a)))
_register("artanh", np.arctanh, _unary(lambda a, out: 1.0 / (1.0 - a * a)))
_register("arsinh", np.arcsinh, _unary(lambda a, out: 1.0 / np.sqrt(1.0 + a * a)))
_register("arcosh", np.arccosh, _unary(lambda a, out: 1.0 / np.sqrt(a * a - 1.0)))
_register("abs", np.abs, _unary(lambda a, out: np.sign(a)))
_register("tanhc", _tanhc, _unary(lambda a, out: _d_tanhc(a)))
_register("artanhc", _artanhc, _unary(lambda a, out: _d_artanhc(a)))
_register("sinhc", _sinhc, _unary(lambda a, out: _d_sinhc(a)))
_register("arsinhc", _arsinhc, _unary(lambda a, out: _d_arsinhc(a)))
_register("norm", _norm, _vjp_norm)
_register("clamp_ratio", _clamp_ratio, _vjp_clamp_ratio)
_register("minimum", lambda a, bound: np.minimum(a, bound), _vjp_minimum)
_register("log_softmax", _log_softmax, _vjp_log_softmax)
_register("softsign", lambda a: a / (1.0 + np.abs(a)), _vjp_softsign)


class Var:
    """Handle to one node of a :class:`Tape`."""

    __slots__ = ("tape", "idx", "value")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, tape, idx, value):
        self.tape = tape
        self.idx = idx
        self.value = value

    @property
    def shape(self):
        return np.shape(self.value)

    @property
    def ndim(self):
        return np.ndim(self.value)

    def __add__(self, other):
        return apply("add", self, other)

    def __radd__(self, other):
        return apply("add", other, self)

    def __sub__(self, other):
        return apply("sub", self, other)

    def __rsub__(self, other):
        return apply("sub", other, self)

    def __mul__(self, other):
        return apply("mul", self, other)

    def __rmul__(self, other):
        return apply("mul", other, self)

    def __truediv__(self, other):
        return apply("div", self, other)

    def __rtruediv__(self, other):
        return apply("div", other, self)

    def __neg__(self):
        return apply("neg", self)

    def __getitem__(self, index):
        return apply("getitem", self, index=index)

    def __repr__(self):
        return f"Var(idx={self.idx}, shape={self.shape})"


class Tape:
    """Append-only record of primitive calls.

    ``ops[k]`` is the primitive name of node ``k`` (``None`` for leaves),
    ``args[k]`` holds either parent node indices (ints, flagged in
    ``is_node[k]``) or constant operands, and ``values[k]`` the computed
    output.
    """

    def __init__(self):
        self.ops = []
        self.args = []
        self.is_node = []
        self.ctx = []
        self.values = []
        self.requires = []
        self.last_visit_order = None

    def __len__(self):
        return len(self.values)

    def leaf(self, value, requires_grad=True):
        value = np.asarray(value, dtype=np.float64)
        self.ops.append(None)
        self.args.append(())
        self.is_node.append(())
        self.ctx.append({})
        self.values.append(value)
        self.requires.append(requires_grad)
        return Var(self, len(self.values) - 1, value)

    def _record(self, name, operands, ctx):
        arg_vals = []
        refs = []
        flags = []
        req = False
        for a in operands:
            if isinstance(a, Var):
                if a.tape is not self:
                    raise ValueError("operand belongs to a different tape")
                arg_vals.append(a.value)
                refs.append(a.idx)
                flags.append(True)
                req = req or self.requires[a.idx]
            else:
                arg_vals.append(a)
                refs.append(a)
                flags.append(False)
        out = PRIMITIVES[name].fwd(*arg_vals, **ctx)
        self.ops.append(name)
        self.args.append(tuple(refs))
        self.is_node.append(tuple(flags))
        self.ctx.append(ctx)
        self.values.append(out)
        self.requires.append(req)
        return Var(self, len(self.values) - 1, out)

    def _arg_values(self, k, values):
        return tuple(values[r] if f else r for r, f in zip(self.args[k], self.is_node[k]))

    def backward(self, out, seed=None):
        """Return the list of adjoints d(out·seed)/d(node) (``None`` if unreached)."""
        if not isinstance(out, Var) or out.tape is not self:
            raise ValueError("output is not a node of this tape")
        if not self.requires[out.idx]:
            raise ValueError("output does not depend on any differentiable leaf")
        adj = [None] * len(self.values)
        adj[out.idx] = np.ones_like(out.value) if seed is None else np.asarray(seed, dtype=np.float64)
        order = []
        for k in range(out.idx, -1, -1):
            g = adj[k]
            name = self.ops[k]
            if g is None or name is None:
                continue
            order.append(k)
            flags = self.is_node[k]
            need = tuple(f and self.requires[r] for r, f in zip(self.args[k], flags))
            if not any(need):
                continue
            grads = PRIMITIVES[name].vjp(g, self.values[k], self._arg_values(k, self.values),
                                         need, **self.ctx[k])
            for r, n, gr in zip(self.args[k], need, grads):
                if not n:
                    continue
                if adj[r] is None:
                    adj[r] = gr
                else:
                    adj[r] = adj[r] + gr
        self.last_visit_order = order
        return adj

    def replay(self, leaf_values=None):
        """Recompute every node from the leaves; returns the new value list.

        ``leaf_values`` maps leaf index -> replacement value.
        """
        values = []
        for k, name in enumerate(self.ops):
            if name is None:
                v = self.values[k]
                if leaf_values is not None and k in leaf_values:
                    v = np.asarray(leaf_values[k], dtype=np.float64)
                values.append(v)
            else:
                values.append(PRIMITIVES[name].fwd(*self._arg_values(k, values), **self.ctx[k]))
        return values


def apply(name, *operands, **ctx):
    """Run primitive ``name``; records on a tape iff any operand is a :class:`Var`."""
    for a in operands:
        if isinstance(a, Var):
            return a.tape._record(name, operands, ctx)
    return PRIMITIVES[name].fwd(*operands, **ctx)


def value(x):
    return x.value if isinstance(x, Var) else x
