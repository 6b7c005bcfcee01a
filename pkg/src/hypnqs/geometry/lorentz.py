"""Lorentz hyperboloid (curvature -1) in ambient coordinates (x0, x1..xn).

Functions act on the last axis and accept numpy arrays or tape variables.
Spatial-only helpers (suffix ``_sp``) work with the n spatial coordinates of
origin tangent vectors, whose time component is identically zero.
"""
import numpy as np

from ..grad import functional as F


def origin(n, batch_shape=()):
    o = np.zeros(tuple(batch_shape) + (n + 1,))
    o[..., 0] = 1.0
    return o


def time(x):
    return x[..., :1]


def space(x):
    return x[..., 1:]


def inner(x, y):
    return F.dot(space(x), space(y)) - time(x) * time(y)


def lift(spatial):
    """Hyperboloid point with the given spatial part."""
    return F.concat([F.sqrt(1.0 + F.dot(spatial, spatial)), spatial])


def reproject(x):
    return lift(space(x))


def neg(x):
    return F.concat([time(x), -space(x)])


def exp0_sp(v):
    n = F.norm(v)
    return F.concat([F.cosh(n), F.sinhc(n) * v])


def log0_sp(y):
    # arcosh(y0) == arsinh(|y_s|) on the sheet; the latter is well conditioned at 0
    s = space(y)
    return F.arsinhc(F.norm(s)) * s


def add(x, y):
    """x (+) y = exp_x(P_{0->x}(log_0 y)).

    Only the spatial part of the result is formed; the time component is
    recomputed from it, which pins the output to the sheet.
    """
    u = log0_sp(y)
    xs = space(x)
    # P_{0->x}(0, u) = (0, u) + <x,u>/(1 + x0) (e0 + x); spatial part only
    zs = u + (F.dot(xs, u) / (1.0 + time(x))) * xs
    # the transport is an isometry, so |z|_L = |u|
    n = F.norm(u)
    return lift(F.cosh(n) * xs + F.sinhc(n) * zs)


def scalar_mul(r, x):
    """r (.) x = exp_0(r log_0 x); ``r`` may be a scalar or a per-coordinate vector."""
    return exp0_sp(r * log0_sp(x))


def matvec(m, x):
    """M (x) x = exp_0(M log_0 x), with M acting on the n spatial coordinates."""
    return exp0_sp(F.linear(log0_sp(x), m))


def clamp(x, l_max):
    s = space(x)
    return lift(s * F.clamp_ratio(F.norm(s), l_max))
