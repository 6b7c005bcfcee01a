"""Single-step recurrent cells (Euclidean, Poincare, Lorentz x RNN, GRU) and dense heads.

A step maps ``(params, h_prev, x_onehot) -> h_next`` for a batch of rows.
Parameters are passed as a name -> array mapping (numpy arrays or tape
variables), so the same code serves inference and differentiation.

Hidden states: Euclidean and Poincare states have shape (B, hidden);
Lorentz states carry the time coordinate first, shape (B, hidden + 1).
"""
import math
from dataclasses import dataclass

import numpy as np

from .geometry import lorentz as L
from .geometry import poincare as P
from .grad import GRU_VARIANTS, VARIANTS, ParamVector
from .grad import functional as F

INPUT_DIM = 2
CLAMP_MODES = ("single", "double")


@dataclass(frozen=True)
class CellConfig:
    variant: str
    hidden: int
    c: float = 1.0
    r_max: float = 1.0
    l_max: float = math.inf
    clamp_mode: str = "single"
    clamp_candidate: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if not 0.0 < self.r_max <= 1.0:
            raise ValueError("r_max must lie in (0, 1]")
        if not self.l_max > 0:
            raise ValueError("l_max must be positive")
        if self.clamp_mode not in CLAMP_MODES:
            raise ValueError(f"clamp_mode must be one of {CLAMP_MODES}")

    @property
    def geometry(self):
        return self.variant.split("_")[0]

    @property
    def is_gru(self):
        return self.variant in GRU_VARIANTS

    @property
    def state_dim(self):
        return self.hidden + 1 if self.geometry == "lorentz" else self.hidden


def gate_names(config):
    return ("r", "z", "h") if config.is_gru else ("h",)


def layout(config):
    h = config.hidden
    bias_geom = config.geometry
    segs = []
    for g in gate_names(config):
        segs.append((f"W_{g}", (h, h), "weight", "euclidean"))
        segs.append((f"U_{g}", (h, INPUT_DIM), "weight", "euclidean"))
        segs.append((f"b_{g}", (h,), "bias", bias_geom))
    segs += [
        ("W_amp", (2, h), "weight", "euclidean"),
        ("b_amp", (2,), "bias", "euclidean"),
        ("W_phase", (2, h), "weight", "euclidean"),
        ("b_phase", (2,), "bias", "euclidean"),
    ]
    return segs


def init_params(config, rng):
    """Glorot-uniform weights, zero biases (the origin / origin tangent for hyperbolic biases)."""
    params = ParamVector(layout(config))
    for seg in params.segments.values():
        if seg.role == "weight":
            fan_out, fan_in = seg.shape
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            params[seg.name] = rng.uniform(-limit, limit, size=seg.shape)
    return params


def initial_state(config, batch):
    if config.geometry == "lorentz":
        return L.origin(config.hidden, (batch,))
    return np.zeros((batch, config.hidden))


# ------------------------------------------------------------------ probes

def _note(probe, key, val, op=max):
    if probe is not None:
        probe[key] = op(probe.get(key, val), val)


def _count(probe, key, n):
    if probe is not None:
        probe[key] = probe.get(key, 0) + int(n)


def _norms(x):
    return np.linalg.norm(F.value(x), axis=-1)


# ------------------------------------------------------------------ Euclidean

def step_euclidean_rnn(p, h, x):
    return F.tanh(F.linear(h, p["W_h"]) + F.linear(x, p["U_h"]) + p["b_h"])


def euclidean_gates(p, h, x):
    r = F.sigmoid(F.linear(h, p["W_r"]) + F.linear(x, p["U_r"]) + p["b_r"])
    z = F.sigmoid(F.linear(h, p["W_z"]) + F.linear(x, p["U_z"]) + p["b_z"])
    cand = F.tanh(F.linear(r * h, p["W_h"]) + F.linear(x, p["U_h"]) + p["b_h"])
    return r, z, cand


def step_euclidean_gru(p, h, x):
    r, z, cand = euclidean_gates(p, h, x)
    return (1.0 - z) * h + z * cand


# ------------------------------------------------------------------ Poincare

def _p_affine(p, g, h, x, c):
    # (W (x) h) (+) (U (x) x) (+) b, left to right
    s = P.mobius_add(P.matvec(p[f"W_{g}"], h, c), P.matvec(p[f"U_{g}"], x, c), c)
    return P.project(P.mobius_add(s, p[f"b_{g}"], c), c)


def _p_clamp(h, r_max, c, probe):
    if probe is not None:
        n = _norms(h)
        _note(probe, "max_norm", float(n.max()))
        _count(probe, "clamp_hits", np.sum(n > r_max))
    if r_max < P.max_norm(c):
        h = P.clamp(h, r_max)
    if probe is not None:
        _note(probe, "max_state_norm", float(_norms(h).max()))
    return h


def lift_input_poincare(x, c=1.0):
    return P.exp0(x, c)


def step_poincare_rnn(p, h, x, r_max=1.0, c=1.0, probe=None):
    out = _p_affine(p, "h", h, lift_input_poincare(x, c), c)
    return _p_clamp(out, r_max, c, probe)


def poincare_gates(p, h, x, c=1.0, r_max=1.0, clamp_candidate=False):
    xin = lift_input_poincare(x, c)
    r = F.sigmoid(P.log0(_p_affine(p, "r", h, xin, c), c))
    z = F.sigmoid(P.log0(_p_affine(p, "z", h, xin, c), c))
    s = P.mobius_add(P.matvec(p["W_h"], P.pointwise(r, h, c), c), P.matvec(p["U_h"], xin, c), c)
    cand = P.project(P.mobius_add(s, p["b_h"], c), c)
    if clamp_candidate and r_max < P.max_norm(c):
        cand = P.clamp(cand, r_max)
    return r, z, cand


def step_poincare_gru(p, h, x, r_max=1.0, c=1.0, probe=None, clamp_candidate=False):
    r, z, cand = poincare_gates(p, h, x, c, r_max, clamp_candidate)
    delta = P.mobius_add(-h, cand, c)
    out = P.project(P.mobius_add(h, P.pointwise(z, delta, c), c), c)
    return _p_clamp(out, r_max, c, probe)


# ------------------------------------------------------------------ Lorentz

def _l_affine(p, g, h, x):
    s = L.add(L.matvec(p[f"W_{g}"], h), L.matvec(p[f"U_{g}"], x))
    return L.add(s, L.exp0_sp(p[f"b_{g}"]))


def _l_clamp(h, l_max, probe):
    if probe is not None:
        n = _norms(L.space(h))
        _note(probe, "max_norm", float(n.max()))
        _count(probe, "clamp_hits", np.sum(n > l_max))
    if math.isfinite(l_max):
        h = L.clamp(h, l_max)
    return h


def _l_record(h, probe):
    if probe is not None:
        hv = F.value(h)
        err = np.abs(L.inner(hv, hv)[..., 0] + 1.0)
        _note(probe, "manifold_error", float(err.max()))
        _note(probe, "max_state_norm", float(_norms(hv[..., 1:]).max()))
    return h


def lift_input_lorentz(x):
    return L.exp0_sp(x)


def step_lorentz_rnn(p, h, x, l_max=math.inf, clamp_mode="single", probe=None):
    h = _l_clamp(h, l_max, probe)
    out = _l_affine(p, "h", h, lift_input_lorentz(x))
    if clamp_mode == "double":
        out = _l_clamp(out, l_max, probe)
    return _l_record(out, probe)


def lorentz_gates(p, h, x, l_max=math.inf, clamp_candidate=False):
    xin = lift_input_lorentz(x)
    r = F.sigmoid(L.log0_sp(_l_affine(p, "r", h, xin)))
    z = F.sigmoid(L.log0_sp(_l_affine(p, "z", h, xin)))
    s = L.add(L.matvec(p["W_h"], L.scalar_mul(r, h)), L.matvec(p["U_h"], xin))
    cand = L.add(s, L.exp0_sp(p["b_h"]))
    if clamp_candidate and math.isfinite(l_max):
        cand = L.clamp(cand, l_max)
    return r, z, cand


def step_lorentz_gru(p, h, x, l_max=math.inf, clamp_mode="single", probe=None, clamp_candidate=False):
    h = _l_clamp(h, l_max, probe)
    r, z, cand = lorentz_gates(p, h, x, l_max, clamp_candidate)
    out = L.add(h, L.scalar_mul(z, L.add(L.neg(h), cand)))
    if clamp_mode == "double":
        out = _l_clamp(out, l_max, probe)
    return _l_record(out, probe)


# ------------------------------------------------------------------ dispatch

def step(config, p, h, x, probe=None):
    v = config.variant
    if v == "euclidean_rnn":
        out = step_euclidean_rnn(p, h, x)
    elif v == "euclidean_gru":
        out = step_euclidean_gru(p, h, x)
    elif v == "poincare_rnn":
        return step_poincare_rnn(p, h, x, config.r_max, config.c, probe)
    elif v == "poincare_gru":
        return step_poincare_gru(p, h, x, config.r_max, config.c, probe, config.clamp_candidate)
    elif v == "lorentz_rnn":
        return step_lorentz_rnn(p, h, x, config.l_max, config.clamp_mode, probe)
    elif v == "lorentz_gru":
        return step_lorentz_gru(p, h, x, config.l_max, config.clamp_mode, probe, config.clamp_candidate)
    else:  # pragma: no cover - CellConfig validates
        raise ValueError(v)
    if probe is not None:
        _note(probe, "max_norm", float(np.abs(F.value(out)).max()))
    return out


def tangent(config, h):
    """Euclidean representation of a hidden state, as read by the dense heads."""
    g = config.geometry
    if g == "poincare":
        return P.log0(h, config.c)
    if g == "lorentz":
        return L.log0_sp(h)
    return h


def head_logits(p, t, head):
    return F.linear(t, p[f"W_{head}"]) + p[f"b_{head}"]


def head_log_softmax(p, t):
    return F.log_softmax(head_logits(p, t, "amp"))


def head_softmax(config, p, h):
    """Conditional probabilities (P(0), P(1)) from a hidden state."""
    return np.exp(F.value(head_log_softmax(p, tangent(config, h))))


def head_softsign(config, p, h):
    """Per-outcome phase contributions in (-1, 1) from a hidden state."""
    return F.value(F.softsign(head_logits(p, tangent(config, h), "phase")))
