import math

import numpy as np
import pytest
from conftest import central_difference, rel_err
from hypothesis import given
from hypothesis import strategies as st

from hypnqs import cells
from hypnqs import geometry as G
from hypnqs.cells import CellConfig
from hypnqs.geometry import lorentz as L
from hypnqs.geometry import poincare as P
from hypnqs.grad import VARIANTS, grad_of
from hypnqs.grad import functional as F
from hypnqs.wavefunction import ModelConfig, WavefunctionModel, rollout

ONEHOT = np.eye(2)


def make(variant, hidden=4, rng=None, bias_scale=0.3, **kw):
    cfg = CellConfig(variant, hidden, **kw)
    rng = rng or np.random.default_rng(1)
    p = cells.init_params(cfg, rng)
    for s in p.segments.values():
        if s.role == "bias":
            b = rng.normal(0, bias_scale, s.shape)
            if s.geometry == "poincare":
                b = P.exp0(b)
            p[s.name] = b
    return cfg, p


def random_state(cfg, rng, batch=5, scale=0.5):
    t = rng.normal(0, scale, (batch, cfg.hidden))
    if cfg.geometry == "poincare":
        return P.exp0(t)
    if cfg.geometry == "lorentz":
        return L.exp0_sp(t)
    return np.tanh(t)


def inputs(batch=5):
    return ONEHOT[np.arange(batch) % 2]


# ------------------------------------------------------------------ config and layout

def test_config_validation():
    with pytest.raises(ValueError):
        CellConfig("bogus", 4)
    with pytest.raises(ValueError):
        CellConfig("poincare_rnn", 4, r_max=1.2)
    with pytest.raises(ValueError):
        CellConfig("lorentz_rnn", 4, l_max=0.0)
    with pytest.raises(ValueError):
        CellConfig("lorentz_rnn", 4, clamp_mode="triple")
    with pytest.raises(ValueError):
        CellConfig("euclidean_rnn", 0)


@pytest.mark.parametrize("variant", VARIANTS)
def test_layout_and_init(variant):
    cfg = CellConfig(variant, 6)
    p = cells.init_params(cfg, np.random.default_rng(0))
    names = [s[0] for s in cells.layout(cfg)]
    gates = ("r", "z", "h") if cfg.is_gru else ("h",)
    for g in gates:
        assert {f"W_{g}", f"U_{g}", f"b_{g}"} <= set(names)
        assert np.array_equal(p[f"b_{g}"], np.zeros(6))
        lim = math.sqrt(6.0 / 12)
        assert np.all(np.abs(p[f"W_{g}"]) <= lim)
    h0 = cells.initial_state(cfg, 3)
    assert h0.shape == (3, cfg.state_dim)
    if cfg.geometry == "lorentz":
        assert np.array_equal(h0[:, 0], np.ones(3))


# ------------------------------------------------------------------ worked examples

@pytest.mark.parametrize("variant", VARIANTS)
def test_zero_params_fixed_point(variant):
    cfg = CellConfig(variant, 3)
    params = cells.init_params(cfg, np.random.default_rng(0))
    p = params.with_data(np.zeros(params.size)).views()
    h0 = cells.initial_state(cfg, 2)
    out = cells.step(cfg, p, h0, inputs(2))
    assert np.allclose(out, h0, atol=1e-15)
    probs = cells.head_softmax(cfg, p, out)
    assert np.allclose(probs, 0.5)
    assert np.allclose(cells.head_softsign(cfg, p, out), 0.0)


def test_euclidean_gru_zero_params_halves_state():
    cfg = CellConfig("euclidean_gru", 3)
    p = {k: np.zeros_like(v) for k, v in cells.init_params(cfg, np.random.default_rng(0)).views().items()}
    h = np.array([[0.4, -0.2, 0.6]])
    # z = r = 1/2 and the candidate is tanh(0) = 0
    assert np.allclose(cells.step(cfg, p, h, inputs(1)), 0.5 * h, atol=1e-16)


@pytest.mark.parametrize("variant", ["euclidean_rnn", "poincare_rnn", "euclidean_gru", "poincare_gru"])
def test_saturation_stays_bounded(variant):
    cfg, p = make(variant, 4)
    big = {k: v * 1e3 for k, v in p.views().items()}
    if cfg.geometry == "poincare":
        for g in cells.gate_names(cfg):
            big[f"b_{g}"] = P.project(p[f"b_{g}"] * 1e3)
    h = random_state(cfg, np.random.default_rng(2))
    out = cells.step(cfg, big, h, inputs())
    assert np.all(np.isfinite(out))
    assert np.all(np.linalg.norm(out, axis=1) < 1.0) if cfg.geometry == "poincare" \
        else np.all(np.abs(out) <= 1.0)


def test_lorentz_saturation_stays_on_sheet():
    cfg, p = make("lorentz_gru", 4, l_max=3.0, clamp_mode="double")
    big = {k: v * 50 for k, v in p.views().items()}
    out = cells.step(cfg, big, random_state(cfg, np.random.default_rng(2)), inputs())
    assert G.on_hyperboloid(out)
    assert np.all(np.linalg.norm(out[:, 1:], axis=1) <= 3.0 * (1 + 1e-12))


# ------------------------------------------------------------------ Euclidean GRU forms

def test_euclidean_gru_literal_update(rng):
    cfg, p = make("euclidean_gru", 5, rng)
    h = random_state(cfg, rng)
    x = inputs()
    r, z, cand = cells.euclidean_gates(p, h, x)
    out = cells.step_euclidean_gru(p, h, x)
    assert np.max(np.abs(out - ((1 - z) * h + z * cand))) < 1e-12
    # the same update written as an interpolation increment
    assert np.max(np.abs(out - (h + z * (cand - h)))) < 1e-12
    sig = lambda a: 1 / (1 + np.exp(-a))
    r_ref = sig(h @ p["W_r"].T + x @ p["U_r"].T + p["b_r"])
    z_ref = sig(h @ p["W_z"].T + x @ p["U_z"].T + p["b_z"])
    c_ref = np.tanh((r_ref * h) @ p["W_h"].T + x @ p["U_h"].T + p["b_h"])
    assert np.allclose(r, r_ref, atol=1e-15) and np.allclose(z, z_ref, atol=1e-15)
    assert np.allclose(cand, c_ref, atol=1e-15)


def test_euclidean_gru_gate_limits(rng):
    cfg, p = make("euclidean_gru", 4, rng)
    h = random_state(cfg, rng)
    x = inputs()
    _, _, cand = cells.euclidean_gates(p, h, x)
    q = dict(p.views())
    q["W_z"] = np.zeros_like(q["W_z"])
    q["U_z"] = np.zeros_like(q["U_z"])
    q["b_z"] = np.full(4, 60.0)
    assert np.allclose(cells.step(cfg, q, h, x), cand, atol=1e-14)
    q["b_z"] = np.full(4, -60.0)
    assert np.allclose(cells.step(cfg, q, h, x), h, atol=1e-14)


def test_euclidean_rnn_literal(rng):
    cfg, p = make("euclidean_rnn", 4, rng)
    h = random_state(cfg, rng)
    x = inputs()
    ref = np.tanh(h @ p["W_h"].T + x @ p["U_h"].T + p["b_h"])
    assert np.allclose(cells.step(cfg, p, h, x), ref, atol=1e-15)


# ------------------------------------------------------------------ hyperbolic gate limits

@pytest.mark.parametrize("geom", ["poincare", "lorentz"])
def test_hyperbolic_gru_gate_limits(geom, rng, monkeypatch):
    cfg, p = make(f"{geom}_gru", 4, rng)
    h = random_state(cfg, rng)
    x = inputs()
    gates = getattr(cells, f"{geom}_gates")
    r, _, cand = gates(p, h, x)
    for zval, target in ((1.0, cand), (0.0, h)):
        monkeypatch.setattr(cells, f"{geom}_gates",
                            lambda *a, zval=zval, **k: (r, np.full_like(r, zval), cand))
        out = cells.step(cfg, p, h, x)
        assert np.max(np.abs(out - target)) < 1e-9 * max(1.0, np.abs(target).max())


# ------------------------------------------------------------------ recomposition oracles

def test_poincare_rnn_recomposed(rng):
    cfg, p = make("poincare_rnn", 4, rng)
    h = random_state(cfg, rng)
    x = inputs()
    out = cells.step(cfg, p, h, x)
    for k in range(h.shape[0]):
        xin = G.p_exp0(x[k])
        ref = G.p_mobius_add(G.p_mobius_add(G.p_matvec(p["W_h"], h[k]), G.p_matvec(p["U_h"], xin)), p["b_h"])
        assert np.allclose(out[k], ref, atol=1e-12)


def test_poincare_gru_recomposed(rng):
    cfg, p = make("poincare_gru", 4, rng)
    h = random_state(cfg, rng)
    x = inputs()
    out = cells.step(cfg, p, h, x)
    sig = lambda a: 1 / (1 + np.exp(-a))
    for k in range(h.shape[0]):
        xin = G.p_exp0(x[k])

        def aff(g, hh):
            return G.p_mobius_add(G.p_mobius_add(G.p_matvec(p[f"W_{g}"], hh), G.p_matvec(p[f"U_{g}"], xin)),
                                  p[f"b_{g}"])
        r = sig(G.p_log0(aff("r", h[k])))
        z = sig(G.p_log0(aff("z", h[k])))
        cand = aff("h", G.p_pointwise(r, h[k]))
        ref = G.p_mobius_add(h[k], G.p_pointwise(z, G.p_mobius_add(-h[k], cand)))
        assert np.allclose(out[k], ref, atol=1e-10)


def _l_add_literal(a, b):
    o = G.l_origin(a.size - 1)
    return G.l_exp_x(a, G.l_parallel_transport(G.l_log0(b), o, a))


def _l_lift_tangent(v):
    return G.l_exp0(np.concatenate([[0.0], v]))


def test_lorentz_rnn_recomposed(rng):
    cfg, p = make("lorentz_rnn", 4, rng)
    h = random_state(cfg, rng)
    x = inputs()
    out = cells.step(cfg, p, h, x)
    for k in range(h.shape[0]):
        xin = _l_lift_tangent(x[k])
        s = _l_add_literal(G.l_matvec(p["W_h"], h[k]), G.l_matvec(p["U_h"], xin))
        ref = _l_add_literal(s, _l_lift_tangent(p["b_h"]))
        assert np.max(np.abs(out[k] - ref)) < 1e-9 * max(1.0, ref[0])


def test_lorentz_gru_recomposed(rng):
    cfg, p = make("lorentz_gru", 4, rng)
    h = random_state(cfg, rng)
    x = inputs()
    out = cells.step(cfg, p, h, x)
    sig = lambda a: 1 / (1 + np.exp(-a))
    for k in range(h.shape[0]):
        xin = _l_lift_tangent(x[k])

        def aff(g, hh):
            s = _l_add_literal(G.l_matvec(p[f"W_{g}"], hh), G.l_matvec(p[f"U_{g}"], xin))
            return _l_add_literal(s, _l_lift_tangent(p[f"b_{g}"]))
        r = sig(G.l_log0(aff("r", h[k]))[1:])
        z = sig(G.l_log0(aff("z", h[k]))[1:])
        cand = aff("h", G.l_scalar_mul(r, h[k]))
        ref = _l_add_literal(h[k], G.l_scalar_mul(z, _l_add_literal(G.l_neg(h[k]), cand)))
        assert np.max(np.abs(out[k] - ref)) < 1e-8 * max(1.0, ref[0])


# ------------------------------------------------------------------ clamp contracts

@pytest.mark.parametrize("variant", ["poincare_rnn", "poincare_gru"])
@pytest.mark.parametrize("r_max", [0.3, 0.618, 0.99])
def test_poincare_clamp_contract(variant, r_max):
    cfg, p = make(variant, 6, bias_scale=1.5, r_max=r_max)
    big = {k: (v * 4 if k.startswith(("W", "U")) else v) for k, v in p.views().items()}
    probe = {}
    h = random_state(cfg, np.random.default_rng(3), batch=20, scale=2.0)
    out = cells.step(cfg, big, h, inputs(20), probe)
    assert np.all(np.linalg.norm(out, axis=1) <= r_max * (1 + 1e-12))
    assert probe["max_state_norm"] <= r_max * (1 + 1e-12)
    assert probe["clamp_hits"] > 0 and probe["max_norm"] > r_max


def test_poincare_clamp_inactive_at_one():
    cfg, p = make("poincare_rnn", 4)
    probe = {}
    h = random_state(cfg, np.random.default_rng(3))
    unclamped = cells.step(cfg, p, h, inputs(), probe)
    assert probe["clamp_hits"] == 0
    assert probe["max_norm"] == probe["max_state_norm"]
    cfg2 = CellConfig("poincare_rnn", 4, r_max=0.999999)
    assert np.allclose(cells.step(cfg2, p, h, inputs()), unclamped, atol=1e-15)


def test_poincare_clamp_candidate_option(rng):
    cfg, p = make("poincare_gru", 4, rng, bias_scale=2.0)
    h = random_state(cfg, rng, scale=2.0)
    _, _, cand = cells.poincare_gates(p, h, inputs(), r_max=0.2, clamp_candidate=True)
    assert np.all(np.linalg.norm(cand, axis=1) <= 0.2 * (1 + 1e-12))


@pytest.mark.parametrize("variant", ["lorentz_rnn", "lorentz_gru"])
def test_lorentz_clamp_modes(variant):
    kw = dict(bias_scale=2.0, l_max=1.0)
    cfg1, p = make(variant, 6, **kw, clamp_mode="single")
    cfg2 = CellConfig(variant, 6, l_max=1.0, clamp_mode="double")
    big = {k: (v * 3 if k.startswith(("W", "U")) else v) for k, v in p.views().items()}
    h = random_state(cfg1, np.random.default_rng(4), batch=20, scale=2.0)
    pr1, pr2 = {}, {}
    out1 = cells.step(cfg1, big, h, inputs(20), pr1)
    out2 = cells.step(cfg2, big, h, inputs(20), pr2)
    # single clamps the incoming state only, double also clamps the result
    assert pr1["clamp_hits"] > 0 and pr2["clamp_hits"] >= pr1["clamp_hits"]
    assert np.all(np.linalg.norm(out2[:, 1:], axis=1) <= 1.0 * (1 + 1e-12))
    assert np.linalg.norm(out1[:, 1:], axis=1).max() > 1.0
    for out, pr in ((out1, pr1), (out2, pr2)):
        assert G.on_hyperboloid(out)
        assert pr["manifold_error"] < 1e-10 * max(1.0, out[:, 0].max() ** 2)


def test_lorentz_unclamped_is_identity_clamp(rng):
    cfg, p = make("lorentz_rnn", 4, rng)
    h = random_state(cfg, rng)
    wide = CellConfig("lorentz_rnn", 4, l_max=1e6, clamp_mode="double")
    assert np.array_equal(cells.step(cfg, p, h, inputs()), cells.step(wide, p, h, inputs()))


# ------------------------------------------------------------------ heads

@pytest.mark.parametrize("variant", VARIANTS)
def test_heads(variant, rng):
    cfg, p = make(variant, 5, rng)
    h = random_state(cfg, rng, batch=30, scale=1.5)
    probs = cells.head_softmax(cfg, p, h)
    assert probs.shape == (30, 2)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-15)
    assert np.all(probs > 0)
    ph = cells.head_softsign(cfg, p, h)
    assert np.all(np.abs(ph) < 1.0)
    t = cells.tangent(cfg, h)
    logits = t @ p["W_amp"].T + p["b_amp"]
    ref = np.exp(logits - logits.max(axis=1, keepdims=True))
    assert np.allclose(probs, ref / ref.sum(axis=1, keepdims=True), atol=1e-14)
    pl = t @ p["W_phase"].T + p["b_phase"]
    assert np.allclose(ph, pl / (1 + np.abs(pl)), atol=1e-15)


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_log_softmax_property(a, b):
    p = {"W_amp": np.zeros((2, 1)), "b_amp": np.array([a, b])}
    ls = F.value(cells.head_log_softmax(p, np.zeros((1, 1))))
    assert np.all(ls <= 0)
    assert abs(np.logaddexp(ls[0, 0], ls[0, 1])) < 1e-14


# ------------------------------------------------------------------ gradients through the cells

def _cell_kw(variant):
    if variant.startswith("poincare"):
        return dict(r_max=0.9)
    if variant.startswith("lorentz"):
        return dict(l_max=2.5, clamp_mode="double")
    return {}


@pytest.mark.parametrize("hidden", [4, 8])
@pytest.mark.parametrize("variant", VARIANTS)
def test_rollout_gradient_matches_finite_differences(variant, hidden):
    rng = np.random.default_rng(hidden)
    cfg = ModelConfig(variant, hidden, 4, **_cell_kw(variant))
    m = WavefunctionModel.initialize(cfg, rng)
    for s in m.params.segments.values():
        if s.role == "bias":
            m.params[s.name] = rng.normal(0, 0.3, s.shape)
    sig = rng.integers(0, 2, (6, 4)).astype(np.uint8)
    wa, wp = rng.normal(size=6), rng.normal(size=6)

    def scalar(p):
        _, la, ph = rollout(cfg, p, sigma=sig)
        return F.sum(la * wa) + F.sum(ph * wp)

    tape, leaves = m.params.on_tape()
    g = grad_of(scalar(leaves), tape, leaves, m.params)
    fd = central_difference(lambda d: float(scalar(m.params.with_data(d).views())), m.params.data)
    assert np.max(rel_err(g, fd, floor=1e-6)) < 1e-4
