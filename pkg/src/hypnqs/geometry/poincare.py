"""Poincare ball of curvature -c: gyrovector operations and origin/base maps.

All functions act on the last axis and accept numpy arrays or tape
variables.  No domain validation happens here; see :mod:`hypnqs.geometry`
for the checked public wrappers.
"""
import math

from ..grad import functional as F

# Largest admissible norm is (1 - BALL_EPS)/sqrt(c); tanh saturates to
# exactly 1.0 in float64 for arguments above ~19, which would put points
# on the boundary where artanh diverges.
BALL_EPS = 1e-5


def max_norm(c=1.0):
    return (1.0 - BALL_EPS) / math.sqrt(c)


def project(x, c=1.0):
    return x * F.clamp_ratio(F.norm(x), max_norm(c))


def clamp(x, r_max):
    """Rescale points with norm above ``r_max`` back onto the sphere of radius ``r_max``."""
    return x * F.clamp_ratio(F.norm(x), r_max)


def conformal_factor(x, c=1.0):
    return 2.0 / (1.0 - c * F.dot(x, x))


def mobius_add(x, y, c=1.0):
    xy = F.dot(x, y)
    x2 = F.dot(x, x)
    y2 = F.dot(y, y)
    num = (1.0 + 2.0 * c * xy + c * y2) * x + (1.0 - c * x2) * y
    den = 1.0 + 2.0 * c * xy + c * c * x2 * y2
    return num / den


def _origin_scale(x, c):
    # artanh(sqrt(c)|x|) / (sqrt(c)|x|), the log-map radial factor at 0
    return F.artanhc(math.sqrt(c) * F.norm(x))


def exp0(v, c=1.0):
    sc = math.sqrt(c)
    return project(F.tanhc(sc * F.norm(v)) * v, c)


def log0(y, c=1.0):
    return _origin_scale(y, c) * y


def matvec(m, x, c=1.0):
    """Mobius matrix-vector product ``m (x) x`` for a batch of row vectors ``x``.

    Closed form tanh(|Mx|/|x| artanh(sqrt c |x|)) Mx / (sqrt c |Mx|), rewritten
    with the f(t)/t helpers so that x = 0 and Mx = 0 need no special casing.
    """
    sc = math.sqrt(c)
    a = _origin_scale(x, c)
    u = F.linear(x, m)
    return project(F.tanhc(sc * a * F.norm(u)) * a * u, c)


def pointwise(r, x, c=1.0):
    """Mobius product with diag(r); a scalar ``r`` gives the scalar rule."""
    sc = math.sqrt(c)
    a = _origin_scale(x, c)
    u = r * x
    return project(F.tanhc(sc * a * F.norm(u)) * a * u, c)


def exp_x(x, v, c=1.0):
    sc = math.sqrt(c)
    lam = conformal_factor(x, c)
    w = F.tanhc(0.5 * sc * lam * F.norm(v)) * (0.5 * lam) * v
    return project(mobius_add(x, w, c), c)


def log_x(x, y, c=1.0):
    u = mobius_add(-x, y, c)
    lam = conformal_factor(x, c)
    return (2.0 / lam) * _origin_scale(u, c) * u


def transport0(v, x, c=1.0):
    """Parallel transport of ``v`` from the tangent space at 0 to the one at ``x``."""
    return (2.0 / conformal_factor(x, c)) * v
