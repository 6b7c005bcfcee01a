"""Checked operations on the Poincare ball and the Lorentz hyperboloid.

Points and tangent vectors are plain float64 arrays (batched over leading
axes).  Lorentz arrays carry the time coordinate first.  Every function
validates manifold membership of its inputs and raises :class:`DomainError`
on violation; the unchecked, differentiable kernels live in
:mod:`.poincare` and :mod:`.lorentz`.
"""
import math

import numpy as np

from ..grad import functional as F
from . import lorentz, poincare
from .poincare import BALL_EPS

__all__ = [
    "DomainError", "BALL_EPS", "HYPERBOLOID_TOL",
    "p_mobius_add", "p_matvec", "p_pointwise", "p_exp0", "p_log0", "p_exp_x", "p_log_x",
    "p_parallel_transport", "p_parallel_transport_by_definition", "p_clamp",
    "p_conformal_factor", "in_ball",
    "l_origin", "l_inner", "l_dist", "l_norm", "l_exp0", "l_log0", "l_exp_x", "l_log_x",
    "l_parallel_transport", "l_add", "l_scalar_mul", "l_matvec", "l_neg", "l_clamp",
    "l_reproject", "on_hyperboloid",
]

HYPERBOLOID_TOL = 1e-8


class DomainError(ValueError):
    """An input lies outside the manifold (or tangent space) it must belong to."""


def _arr(x):
    return np.asarray(x, dtype=np.float64)


# ------------------------------------------------------------------ Poincare

def in_ball(x, c=1.0):
    return bool(np.all(np.linalg.norm(_arr(x), axis=-1) < 1.0 / math.sqrt(c)))


def _check_ball(x, c, what="point"):
    x = _arr(x)
    if not np.all(np.isfinite(x)) or not in_ball(x, c):
        raise DomainError(f"{what} is not inside the Poincare ball of radius {1 / math.sqrt(c):g}")
    return x


def p_conformal_factor(x, c=1.0):
    x = _check_ball(x, c)
    return poincare.conformal_factor(x, c)[..., 0]


def p_mobius_add(x, y, c=1.0):
    return poincare.mobius_add(_check_ball(x, c), _check_ball(y, c), c)


def p_matvec(m, x, c=1.0):
    m = _arr(m)
    x = _check_ball(x, c)
    if m.ndim != 2 or m.shape[1] != x.shape[-1]:
        raise ValueError(f"matrix of shape {m.shape} cannot act on vectors of size {x.shape[-1]}")
    return poincare.matvec(m, x, c)


def p_pointwise(r, x, c=1.0):
    x = _check_ball(x, c)
    r = _arr(r)
    if r.ndim and r.shape[-1] != x.shape[-1]:
        raise ValueError("gate vector and point differ in size")
    return poincare.pointwise(r, x, c)


def p_exp0(v, c=1.0):
    return poincare.exp0(_arr(v), c)


def p_log0(y, c=1.0):
    return poincare.log0(_check_ball(y, c), c)


def p_exp_x(x, v, c=1.0):
    return poincare.exp_x(_check_ball(x, c), _arr(v), c)


def p_log_x(x, y, c=1.0):
    """Logarithmic map at ``x``; returns the zero vector when ``y == x``."""
    return poincare.log_x(_check_ball(x, c), _check_ball(y, c), c)


def p_parallel_transport(v, x, c=1.0):
    """Transport ``v`` from the tangent space at the origin to the one at ``x``."""
    return poincare.transport0(_arr(v), _check_ball(x, c), c)


def p_parallel_transport_by_definition(v, x, c=1.0):
    """Same transport computed as log_x(x (+) exp_0(v))."""
    x = _check_ball(x, c)
    return poincare.log_x(x, poincare.mobius_add(x, poincare.exp0(_arr(v), c), c), c)


def p_clamp(x, r_max):
    if not 0.0 < r_max <= 1.0:
        raise ValueError("r_max must lie in (0, 1]")
    return poincare.clamp(_arr(x), r_max)


# ------------------------------------------------------------------ Lorentz

def l_origin(n):
    return lorentz.origin(n)


def on_hyperboloid(x, tol=HYPERBOLOID_TOL):
    x = _arr(x)
    scale = np.maximum(1.0, x[..., 0] ** 2)
    err = np.abs(lorentz.inner(x, x)[..., 0] + 1.0)
    return bool(np.all(np.isfinite(x)) and np.all(x[..., 0] > 0) and np.all(err <= tol * scale))


def _check_sheet(x, what="point"):
    x = _arr(x)
    if not on_hyperboloid(x):
        raise DomainError(f"{what} is not on the hyperboloid <x,x>_L = -1, x0 > 0")
    return x


def _check_tangent(v, x):
    scale = np.maximum(1.0, np.abs(x[..., 0]) * np.linalg.norm(v, axis=-1))
    if np.any(np.abs(lorentz.inner(v, x)[..., 0]) > HYPERBOLOID_TOL * scale):
        raise DomainError("vector is not tangent at the given base point")


def l_inner(x, y):
    return lorentz.inner(_arr(x), _arr(y))[..., 0]


def _arcosh_arg(x, y):
    a = -l_inner(x, y)
    scale = np.maximum(1.0, np.abs(x[..., 0] * y[..., 0]))
    if np.any(a < 1.0 - 1e-9 * scale):
        raise DomainError("arcosh argument below 1")
    return np.maximum(a, 1.0)


def _chord_dist(x, y):
    # arccosh(-<x,y>) rewritten as 2 asinh(|x - y|_L / 2): exact at x == y
    _arcosh_arg(x, y)
    d = x - y
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(l_inner(d, d), 0.0)))


def l_dist(x, y):
    x = _check_sheet(x)
    y = _check_sheet(y)
    return _chord_dist(x, y)


def l_norm(v):
    """Lorentzian norm sqrt(<v,v>_L) of a space-like vector."""
    ip = l_inner(v, v)
    if np.any(ip < -1e-12 * np.maximum(1.0, np.sum(_arr(v) ** 2, axis=-1))):
        raise DomainError("vector is time-like; Lorentzian norm undefined")
    return np.sqrt(np.maximum(ip, 0.0))


def l_exp0(v):
    """Exponential map at the origin for a full tangent vector (0, v1..vn)."""
    v = _arr(v)
    if np.any(np.abs(v[..., 0]) > HYPERBOLOID_TOL * np.maximum(1.0, np.linalg.norm(v, axis=-1))):
        raise DomainError("tangent vectors at the origin have zero time component")
    return lorentz.exp0_sp(v[..., 1:])


def l_log0(y):
    y = _check_sheet(y)
    t = lorentz.log0_sp(y)
    return np.concatenate([np.zeros(t.shape[:-1] + (1,)), t], axis=-1)


def l_exp_x(x, v):
    x = _check_sheet(x)
    v = _arr(v)
    _check_tangent(v, x)
    n = l_norm(v)[..., None]
    return np.cosh(n) * x + F.sinhc(n) * v


def l_log_x(x, y):
    """Logarithmic map at ``x``; ``y == x`` gives the zero vector."""
    x = _check_sheet(x)
    y = _check_sheet(y)
    d = _chord_dist(x, y)[..., None]
    w = y + lorentz.inner(x, y) * x
    wn = np.sqrt(np.maximum(lorentz.inner(w, w), 0.0))
    safe = np.where(wn > 0.0, wn, 1.0)
    return np.where(wn > 0.0, d * w / safe, 0.0)


def l_parallel_transport(z, x, y):
    x = _check_sheet(x)
    y = _check_sheet(y)
    z = _arr(z)
    _check_tangent(z, x)
    return z + lorentz.inner(y, z) / (1.0 - lorentz.inner(x, y)) * (x + y)


def l_reproject(x):
    """Recompute x0 from the spatial part when the sheet residual exceeds tolerance."""
    x = _arr(x)
    drift = np.abs(lorentz.inner(x, x)[..., 0] + 1.0) > HYPERBOLOID_TOL
    return np.where(drift[..., None], lorentz.reproject(x), x)


def l_add(x, y):
    return lorentz.add(_check_sheet(x), _check_sheet(y))


def l_scalar_mul(r, x):
    return lorentz.scalar_mul(_arr(r), _check_sheet(x))


def l_matvec(m, x):
    m = _arr(m)
    x = _check_sheet(x)
    if m.ndim != 2 or m.shape[1] != x.shape[-1] - 1:
        raise ValueError(f"matrix of shape {m.shape} cannot act on {x.shape[-1] - 1} spatial coordinates")
    return lorentz.matvec(m, x)


def l_neg(x):
    return lorentz.neg(_check_sheet(x))


def l_clamp(x, l_max):
    if not l_max > 0:
        raise ValueError("l_max must be positive")
    return lorentz.clamp(_arr(x), l_max)
