import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hypnqs import geometry as G
from hypnqs.geometry import lorentz as L
from hypnqs.geometry import poincare as P

DIM = 4
finite = st.floats(-1.0, 1.0, allow_nan=False)


def ball_points(max_norm=0.95):
    def scale(v):
        n = np.linalg.norm(v)
        return v if n <= max_norm else v * (max_norm / n)
    return arrays(np.float64, DIM, elements=finite).map(scale)


def tangents(max_norm=3.0):
    return arrays(np.float64, DIM, elements=st.floats(-3, 3)).map(
        lambda v: v if np.linalg.norm(v) <= max_norm else v * (max_norm / np.linalg.norm(v)))


def sheet_points():
    return tangents(2.5).map(L.exp0_sp)


# ------------------------------------------------------------------ scripted references

def mobius_ref(x, y, c=1.0):
    xy = sum(a * b for a, b in zip(x, y))
    x2 = sum(a * a for a in x)
    y2 = sum(b * b for b in y)
    den = 1 + 2 * c * xy + c * c * x2 * y2
    return [((1 + 2 * c * xy + c * y2) * a + (1 - c * x2) * b) / den for a, b in zip(x, y)]


def exp0_ref(v):
    n = math.sqrt(sum(a * a for a in v))
    return [0.0] * len(v) if n == 0 else [math.tanh(n) * a / n for a in v]


def log0_ref(y):
    n = math.sqrt(sum(a * a for a in y))
    return [0.0] * len(y) if n == 0 else [math.atanh(n) * a / n for a in y]


# ------------------------------------------------------------------ Poincare examples

def test_mobius_add_examples():
    assert np.allclose(G.p_mobius_add([0.5, 0.0], [0.5, 0.0]), [0.8, 0.0], atol=1e-15)
    assert np.allclose(G.p_mobius_add([0.5, 0.0], [0.5, 0.0]), mobius_ref([0.5, 0], [0.5, 0]), atol=1e-15)
    y = np.array([0.1, -0.3, 0.2])
    assert np.array_equal(G.p_mobius_add(np.zeros(3), y), y)
    assert np.allclose(G.p_mobius_add(y, -y), 0.0, atol=1e-16)


def test_mobius_add_rejects_outside_points():
    with pytest.raises(G.DomainError):
        G.p_mobius_add([1.0, 0.0], [0.0, 0.0])
    with pytest.raises(G.DomainError):
        G.p_log0([0.8, 0.8])


def test_matvec_examples(rng):
    x = np.array([0.2, -0.1, 0.05])
    assert np.allclose(G.p_matvec(np.eye(3), x), x, atol=1e-15)
    assert np.array_equal(G.p_matvec(rng.normal(size=(3, 3)), np.zeros(3)), np.zeros(3))
    m = rng.normal(size=(3, 3))
    x = rng.normal(size=3)
    x *= 0.3 / np.linalg.norm(x)
    ref = exp0_ref(list(m @ np.array(log0_ref(list(x)))))
    assert np.allclose(G.p_matvec(m, x), ref, atol=1e-10)
    with pytest.raises(ValueError):
        G.p_matvec(np.eye(2), x)


def test_pointwise_examples():
    x = np.array([0.3, -0.2])
    assert np.allclose(G.p_pointwise(np.ones(2), x), x, atol=1e-15)
    assert np.array_equal(G.p_pointwise(np.zeros(2), x), np.zeros(2))
    # scalar rule: tanh(r artanh|x|) x / |x|
    n = np.linalg.norm(x)
    ref = math.tanh(2 * math.atanh(n)) * x / n
    assert np.allclose(G.p_pointwise(np.full(2, 2.0), x), ref, atol=1e-12)
    assert np.allclose(G.p_pointwise(2.0, x), ref, atol=1e-12)


def test_exp0_log0_examples():
    assert np.array_equal(G.p_exp0(np.zeros(3)), np.zeros(3))
    assert np.array_equal(G.p_log0(np.zeros(3)), np.zeros(3))
    assert np.allclose(G.p_exp0([1.0, 0.0]), [math.tanh(1.0), 0.0], atol=1e-15)
    assert G.p_exp0([1.0, 0.0])[0] == pytest.approx(0.76159, abs=1e-5)


def test_exp0_log0_roundtrip_batch(rng):
    v = rng.normal(size=(100, 5))
    v *= rng.uniform(0, 3, size=(100, 1)) / np.linalg.norm(v, axis=1, keepdims=True)
    assert np.max(np.abs(G.p_log0(G.p_exp0(v)) - v)) < 1e-9


def test_general_base_maps_reduce_at_origin(rng):
    v = rng.normal(size=(10, 3))
    y = G.p_exp0(v * 0.3)
    assert np.allclose(G.p_exp_x(np.zeros(3), v * 0.3), y, atol=1e-15)
    assert np.allclose(G.p_log_x(np.zeros(3), y), G.p_log0(y), atol=1e-15)


def test_general_base_roundtrip(rng):
    x = rng.normal(size=(100, 3))
    x *= 0.4 / np.linalg.norm(x, axis=1, keepdims=True)
    v = rng.normal(size=(100, 3))
    assert np.max(np.abs(G.p_log_x(x, G.p_exp_x(x, v)) - v)) < 1e-9
    y = rng.normal(size=(100, 3))
    y *= rng.uniform(0, 0.9, size=(100, 1)) / np.linalg.norm(y, axis=1, keepdims=True)
    assert np.max(np.abs(G.p_exp_x(x, G.p_log_x(x, y)) - y)) < 1e-9


def test_log_x_of_itself_is_zero():
    x = np.array([0.3, 0.1])
    assert np.array_equal(G.p_log_x(x, x), np.zeros(2))


def test_transport_examples():
    v = np.array([0.3, -0.4])
    assert np.array_equal(G.p_parallel_transport(v, np.zeros(2)), v)
    x, b = np.array([0.3, 0.0]), np.array([0.2, 0.1])
    via = G.p_exp_x(x, G.p_parallel_transport(G.p_log0(b), x))
    assert np.allclose(via, G.p_mobius_add(x, b), atol=1e-12)
    assert np.allclose(G.p_parallel_transport(v, x), G.p_parallel_transport_by_definition(v, x), atol=1e-12)


def test_clamp_examples():
    x = np.array([0.3, 0.0])
    assert np.array_equal(G.p_clamp(x, 0.618), x)
    assert np.allclose(G.p_clamp([0.9999, 0.0], 0.618), [0.618, 0.0], atol=1e-15)
    assert np.array_equal(G.p_clamp([0.9999, 0.0], 1.0), [0.9999, 0.0])
    with pytest.raises(ValueError):
        G.p_clamp(x, 1.5)


def test_conformal_factor():
    assert G.p_conformal_factor([0.0, 0.0]) == 2.0
    assert G.p_conformal_factor([0.5, 0.0]) == pytest.approx(2 / 0.75)


def test_curvature_is_general():
    # on a ball of curvature -c the same identities hold with radius 1/sqrt(c)
    c = 4.0
    x, y = np.array([0.2, 0.1]), np.array([-0.1, 0.3])
    assert np.allclose(P.mobius_add(x, y, c), mobius_ref(x, y, c), atol=1e-15)
    assert np.allclose(P.log0(P.exp0(x, c), c), x, atol=1e-12)
    assert np.allclose(P.mobius_add(-x, P.mobius_add(x, y, c), c), y, atol=1e-12)


# ------------------------------------------------------------------ Poincare properties

@given(ball_points(), ball_points())
def test_mobius_matches_scripted_formula(x, y):
    assert np.allclose(P.mobius_add(x, y), mobius_ref(list(x), list(y)), atol=1e-12)


@given(ball_points(), ball_points())
def test_left_cancellation(x, y):
    assert np.max(np.abs(P.mobius_add(-x, P.mobius_add(x, y)) - y)) < 1e-9


@given(ball_points(), ball_points())
def test_transport_identity(x, b):
    lhs = P.mobius_add(x, b)
    rhs = P.exp_x(x, P.transport0(P.log0(b), x))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@given(tangents())
def test_exp_log_inverse_at_origin(v):
    assert np.max(np.abs(P.log0(P.exp0(v)) - v)) < 1e-9


@given(ball_points(0.9), tangents(2.0))
def test_exp_log_inverse_at_base(x, v):
    # keep the Riemannian length lambda_x |v| / 2 bounded so exp_x stays off the rim
    v = v * (1 - x @ x)
    assert np.max(np.abs(P.log_x(x, P.exp_x(x, v)) - v)) < 1e-9


@given(arrays(np.float64, (DIM, DIM), elements=st.floats(-2, 2)), ball_points(0.9))
def test_matvec_equals_exp_log_composition(m, x):
    ref = P.exp0(m @ P.log0(x))
    assert np.max(np.abs(P.matvec(m, x) - ref)) < 1e-9
    assert np.linalg.norm(P.matvec(m, x)) < 1.0


@given(ball_points(), st.floats(0.05, 1.0))
def test_clamp_bound_and_idempotence(x, r):
    y = P.clamp(x, r)
    assert np.linalg.norm(y) <= r * (1 + 1e-12)
    assert np.array_equal(P.clamp(y, r), y) or np.allclose(P.clamp(y, r), y, rtol=1e-15, atol=0)
    if np.linalg.norm(x) > 0:
        assert np.allclose(y / np.linalg.norm(y), x / np.linalg.norm(x))


@given(arrays(np.float64, DIM, elements=st.floats(-50, 50)))
def test_exp0_stays_in_ball_for_large_tangents(v):
    assert np.linalg.norm(P.exp0(v)) < 1.0


# ------------------------------------------------------------------ Lorentz examples

def test_lorentz_basic_examples():
    o = G.l_origin(3)
    assert G.l_inner(o, o) == -1.0
    x = np.array([math.cosh(1.0), math.sinh(1.0)])
    assert G.l_dist(x, x) == 0.0
    assert G.l_dist(x, G.l_origin(1)) == pytest.approx(1.0, abs=1e-12)
    assert G.l_dist(x, G.l_origin(1)) == G.l_dist(G.l_origin(1), x)


def test_lorentz_exp0_examples():
    assert np.array_equal(G.l_exp0(np.zeros(4)), G.l_origin(3))
    assert np.allclose(G.l_exp0([0.0, 1.0, 0.0]), [math.cosh(1), math.sinh(1), 0.0], atol=1e-15)
    with pytest.raises(G.DomainError):
        G.l_exp0([0.5, 1.0, 0.0])


def test_lorentz_exp_log_roundtrip_batch(rng):
    v = rng.normal(size=(100, 4))
    v *= rng.uniform(0, 3, size=(100, 1)) / np.linalg.norm(v, axis=1, keepdims=True)
    full = np.concatenate([np.zeros((100, 1)), v], axis=1)
    assert np.max(np.abs(G.l_log0(G.l_exp0(full)) - full)) < 1e-9


def test_lorentz_general_base_roundtrip(rng):
    x = L.exp0_sp(rng.normal(size=(50, 3)))
    raw = np.concatenate([np.zeros((50, 1)), rng.normal(size=(50, 3))], axis=1)
    # tangent at x: transport from the origin
    v = G.l_parallel_transport(raw, G.l_origin(3) * np.ones((50, 1)), x)
    y = G.l_exp_x(x, v)
    assert G.on_hyperboloid(y)
    assert np.max(np.abs(G.l_log_x(x, y) - v)) < 1e-8
    assert np.array_equal(G.l_log_x(x, x), np.zeros_like(x))


def test_lorentz_transport_examples(rng):
    x = L.exp0_sp(rng.normal(size=3))
    z = G.l_log_x(x, L.exp0_sp(rng.normal(size=3)))
    assert np.allclose(G.l_parallel_transport(z, x, x), z, atol=1e-15)


def test_lorentz_algebra_examples(rng):
    o = G.l_origin(3)
    y = L.exp0_sp(rng.normal(size=3))
    assert np.allclose(G.l_add(o, y), y, atol=1e-12)
    assert np.allclose(G.l_scalar_mul(1.0, y), y, atol=1e-12)
    assert np.allclose(G.l_scalar_mul(0.0, y), o, atol=0)
    assert np.allclose(G.l_matvec(np.eye(3), y), y, atol=1e-10)
    assert np.array_equal(G.l_neg(o), o)
    x = np.array([math.cosh(1.0), math.sinh(1.0)])
    assert np.array_equal(G.l_neg(x), [math.cosh(1.0), -math.sinh(1.0)])


def test_lorentz_add_matches_literal_definition(rng):
    # exp_x(P_{0->x}(log_0 y)) with the general-base formulas
    x = L.exp0_sp(rng.normal(size=(20, 3)))
    y = L.exp0_sp(rng.normal(size=(20, 3)))
    o = G.l_origin(3) * np.ones((20, 1))
    lit = G.l_exp_x(x, G.l_parallel_transport(G.l_log0(y), o, x))
    assert np.max(np.abs(G.l_add(x, y) - lit) / np.maximum(1, np.abs(lit))) < 1e-9


def test_lorentz_clamp_examples():
    x = L.lift(np.array([0.5, 0.0]))
    assert np.array_equal(G.l_clamp(x, 2.0), x)
    y = G.l_clamp(L.lift(np.array([100.0, 0.0])), 4.0)
    assert np.allclose(y, [math.sqrt(17.0), 4.0, 0.0], atol=1e-14)
    assert G.l_inner(y, y) == pytest.approx(-1.0, abs=1e-13)


def test_lorentz_domain_errors():
    with pytest.raises(G.DomainError):
        G.l_dist([1.0, 1.0], [1.0, 0.0])
    with pytest.raises(G.DomainError):
        G.l_norm([2.0, 1.0])
    with pytest.raises(G.DomainError):
        G.l_exp_x(G.l_origin(2), [1.0, 0.0, 0.0])


def test_reproject_only_fixes_drift():
    x = L.lift(np.array([0.3, 0.4]))
    assert np.array_equal(G.l_reproject(x), x)
    bad = x.copy()
    bad[0] += 1e-6
    assert G.on_hyperboloid(G.l_reproject(bad), tol=1e-14)


# ------------------------------------------------------------------ Lorentz properties

@given(tangents())
def test_lorentz_exp_log_property(v):
    y = L.exp0_sp(v)
    assert np.max(np.abs(L.log0_sp(y) - v)) < 1e-9
    assert abs(L.inner(y, y)[0] + 1) < 1e-9 * max(1.0, y[0] ** 2)


@given(sheet_points(), sheet_points(), tangents(2.0), tangents(2.0))
def test_lorentz_transport_isometry(x, y, a, b):
    o = L.origin(DIM)
    z1 = G.l_parallel_transport(np.concatenate([[0.0], a]), o, x)
    z2 = G.l_parallel_transport(np.concatenate([[0.0], b]), o, x)
    p1, p2 = G.l_parallel_transport(z1, x, y), G.l_parallel_transport(z2, x, y)
    scale = max(1.0, abs(y[0]) * np.linalg.norm(p1) * np.linalg.norm(p2))
    assert abs(G.l_inner(p1, p2) - G.l_inner(z1, z2)) < 1e-9 * scale
    assert abs(G.l_inner(p1, y)) < 1e-8 * max(1.0, abs(y[0]) * np.linalg.norm(p1))


@given(sheet_points(), sheet_points(), st.floats(-2, 2),
       arrays(np.float64, (DIM, DIM), elements=st.floats(-1.5, 1.5)))
def test_lorentz_ops_stay_on_sheet(x, y, r, m):
    for z in (L.add(x, y), L.scalar_mul(r, x), L.matvec(m, x), L.neg(x), L.clamp(x, 1.0)):
        assert G.on_hyperboloid(z)


@given(sheet_points())
def test_lorentz_neg_is_inverse(x):
    assert np.max(np.abs(L.add(x, L.neg(x)) - L.origin(DIM))) < 1e-8


@given(sheet_points(), st.floats(0.1, 5.0))
def test_lorentz_clamp_bound_and_idempotence(x, lm):
    y = L.clamp(x, lm)
    assert np.linalg.norm(y[1:]) <= lm * (1 + 1e-12)
    assert np.allclose(L.clamp(y, lm), y, rtol=1e-15, atol=0)


@given(sheet_points(), sheet_points())
def test_lorentz_distance_symmetric(x, y):
    assert G.l_dist(x, y) == pytest.approx(G.l_dist(y, x), rel=1e-12, abs=1e-12)
