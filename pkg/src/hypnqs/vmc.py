"""Variational Monte Carlo training: gradients, optimizers, schedules, checkpoint policy."""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NumericalAbort
from .geometry import poincare as P
from .grad import functional as F
from .grad import grad_of
from .hamiltonian import energy_stats, local_energy
from .wavefunction import rollout

# Stream identifiers mixed into the run seed; see rng_for().
_INIT, _EPOCH, _INFER = 0, 1, 2


def rng_for(seed, stream, index=0):
    return np.random.default_rng([int(seed), stream, int(index)])


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    batch: int = 80
    lr_euclidean: float = 5e-3
    lr_hyperbolic: float = 5e-3
    plateau_factor: float = 2.0
    plateau_patience: int = 40
    early_stop_patience: int = 200
    grad_clip_norm: float = 1.0
    variance_tolerance: float | None = None  # None means 2 * n
    improvement_threshold: float = 1e-6
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    eval_samples: int = 10000
    max_skipped: int = 20

    def __post_init__(self):
        for name in ("epochs", "batch", "plateau_patience", "early_stop_patience", "eval_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("lr_euclidean", "lr_hyperbolic", "grad_clip_norm", "adam_eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.plateau_factor > 1.0:
            raise ValueError("plateau_factor must exceed 1")
        if self.variance_tolerance is not None and not self.variance_tolerance > 0:
            raise ValueError("variance_tolerance must be positive")

    def tolerance_for(self, n):
        return 2.0 * n if self.variance_tolerance is None else float(self.variance_tolerance)


# ------------------------------------------------------------------ gradient

def gradient_estimate(spec, model, sigma, eloc):
    """2 Re mean[conj(E_loc - mean E_loc) d log psi] for a batch drawn from |psi|^2.

    Obtained as the gradient of the surrogate sum_s a_s log|psi_s| + b_s phi_s
    with a = 2 Re(dE)/B and b = 2 Im(dE)/B.
    """
    sigma = np.asarray(sigma, dtype=np.uint8)
    b = sigma.shape[0]
    de = eloc - np.mean(eloc)
    wa = 2.0 * de.real / b
    wp = 2.0 * de.imag / b
    tape, leaves = model.params.on_tape()
    _, la, ph = rollout(model.config, leaves, sigma=sigma)
    loss = F.sum(la * wa) + F.sum(ph * wp)
    return grad_of(loss, tape, leaves, model.params)


def clip_by_norm(g, max_norm):
    norm = float(np.linalg.norm(g))
    if norm > max_norm:
        g = g * (max_norm / norm)
    return g, norm


# ------------------------------------------------------------------ optimizer

class Optimizer:
    """Adam on Euclidean coordinates and Lorentz biases; Riemannian SGD on Poincare biases."""

    def __init__(self, params, config):
        self.config = config
        self.rsgd = params.mask(lambda s: s.role == "bias" and s.geometry == "poincare")
        self.hyperbolic = params.mask(lambda s: s.geometry != "euclidean")
        self.rsgd_segments = [s for s in params.segments.values()
                              if s.role == "bias" and s.geometry == "poincare"]
        self.m = np.zeros(params.size)
        self.v = np.zeros(params.size)
        self.t = 0
        self.lr_euclidean = config.lr_euclidean
        self.lr_hyperbolic = config.lr_hyperbolic

    def decay(self, factor):
        self.lr_euclidean /= factor
        self.lr_hyperbolic /= factor

    def step(self, params, grad):
        c = self.config
        data = params.data.copy()
        adam = ~self.rsgd
        g = grad[adam]
        self.t += 1
        self.m[adam] = c.beta1 * self.m[adam] + (1.0 - c.beta1) * g
        self.v[adam] = c.beta2 * self.v[adam] + (1.0 - c.beta2) * g * g
        mhat = self.m[adam] / (1.0 - c.beta1 ** self.t)
        vhat = self.v[adam] / (1.0 - c.beta2 ** self.t)
        lr = np.where(self.hyperbolic[adam], self.lr_hyperbolic, self.lr_euclidean)
        data[adam] -= lr * mhat / (np.sqrt(vhat) + c.adam_eps)
        for s in self.rsgd_segments:
            b = data[s.offset:s.stop]
            gb = grad[s.offset:s.stop]
            lam = 2.0 / (1.0 - b @ b)
            data[s.offset:s.stop] = P.exp_x(b, -self.lr_hyperbolic * gb / lam ** 2)
        return params.with_data(data)

    def state(self):
        return {"t": self.t, "lr_euclidean": self.lr_euclidean, "lr_hyperbolic": self.lr_hyperbolic}


# ------------------------------------------------------------------ schedules

@dataclass
class Plateau:
    patience: int
    threshold: float
    best: float = math.inf
    since: int = 0

    def update(self, value):
        """Returns True when the learning rates should decay."""
        if value < self.best - self.threshold:
            self.best = value
            self.since = 0
            return False
        self.since += 1
        if self.since >= self.patience:
            self.since = 0
            return True
        return False


@dataclass
class TrainState:
    epoch: int = 0
    best_energy: float = math.inf        # of the last saved checkpoint
    best_epoch: int = -1
    best_params: object = None
    improve_energy: float = math.inf     # best mean for early stopping
    improve_epoch: int = -1
    decays: int = 0
    skipped: int = 0
    history: list = field(default_factory=list)


@dataclass
class TrainResult:
    best_params: object
    best_energy: float
    best_epoch: int
    last_params: object
    epochs_run: int
    stop_reason: str
    history: list
    decays: int


def manifold_report(model):
    """Largest Poincare bias norm (must stay < 1); 0 for other geometries."""
    worst = 0.0
    for s in model.params.segments.values():
        if s.role == "bias" and s.geometry == "poincare":
            worst = max(worst, float(np.linalg.norm(model.params[s.name])))
    return worst


def _finite(x):
    return bool(np.all(np.isfinite(x)))


def train(spec, model, config, on_epoch=None, on_checkpoint=None):
    """Run the optimization loop; returns a :class:`TrainResult`.

    ``on_epoch(record)`` receives each metrics record; ``on_checkpoint(params,
    record)`` is called whenever a new best checkpoint is taken.
    """
    if model.config.n != spec.n:
        raise ValueError("model and Hamiltonian disagree on the number of sites")
    opt = Optimizer(model.params, config)
    plateau = Plateau(config.plateau_patience, config.improvement_threshold)
    state = TrainState()
    tol = config.tolerance_for(spec.n)
    stop_reason = "epochs"
    for epoch in range(config.epochs):
        state.epoch = epoch
        probe = {}
        model.probe = probe
        sig, psi = model.sample(config.batch, rng_for(config.seed, _EPOCH, epoch))
        model.probe = None
        eloc = local_energy(spec, model, sig, psi)
        rec = {"epoch": epoch, "lr_euclidean": opt.lr_euclidean, "lr_hyperbolic": opt.lr_hyperbolic}
        if not _finite(eloc) or not _finite(psi.log_amp):
            state.skipped += 1
            rec.update(energy=None, variance=None, std_error=None, grad_norm=None, skipped=True)
            rec.update(_probe_fields(probe, model))
            rec["checkpoint"] = False
            state.history.append(rec)
            if on_epoch:
                on_epoch(rec)
            if state.skipped >= config.max_skipped:
                raise NumericalAbort(f"{state.skipped} consecutive non-finite epochs at epoch {epoch}")
            continue
        mean, var, err = energy_stats(eloc)
        rec.update(energy=mean, variance=var, std_error=err)

        saved = mean < state.best_energy and var <= tol
        if saved:
            state.best_energy = mean
            state.best_epoch = epoch
            state.best_params = model.params.copy()

        g = gradient_estimate(spec, model, sig, eloc)
        skipped = not _finite(g)
        if skipped:
            state.skipped += 1
            rec["grad_norm"] = None
        else:
            g, gnorm = clip_by_norm(g, config.grad_clip_norm)
            new = opt.step(model.params, g)
            if not _finite(new.data):
                raise NumericalAbort(f"parameters became non-finite at epoch {epoch}")
            model = model.with_params(new)
            state.skipped = 0
            rec["grad_norm"] = gnorm
        rec["skipped"] = skipped
        rec.update(_probe_fields(probe, model))
        rec["checkpoint"] = saved

        if plateau.update(mean):
            opt.decay(config.plateau_factor)
            state.decays += 1
        if mean < state.improve_energy - config.improvement_threshold:
            state.improve_energy = mean
            state.improve_epoch = epoch

        state.history.append(rec)
        if on_epoch:
            on_epoch(rec)
        if saved and on_checkpoint:
            on_checkpoint(state.best_params, rec)
        if epoch - state.improve_epoch >= config.early_stop_patience:
            stop_reason = "early_stop"
            break
        if state.skipped >= config.max_skipped:
            raise NumericalAbort(f"{state.skipped} consecutive skipped steps at epoch {epoch}")

    best = state.best_params if state.best_params is not None else model.params.copy()
    return TrainResult(best, state.best_energy, state.best_epoch, model.params,
                       state.epoch + 1, stop_reason, state.history, state.decays)


def _probe_fields(probe, model):
    return {
        "clamp_hits": int(probe.get("clamp_hits", 0)),
        "max_hidden_norm": probe.get("max_state_norm", probe.get("max_norm")),
        "max_preclamp_norm": probe.get("max_norm"),
        "manifold_error": probe.get("manifold_error"),
        "max_bias_norm": manifold_report(model),
    }


def infer(spec, model, samples=10000, seed=0, chunk=2000):
    """Fresh-sample energy estimate: (mean, std_error)."""
    rng = rng_for(seed, _INFER)
    parts = []
    left = samples
    while left > 0:
        k = min(chunk, left)
        sig, psi = model.sample(k, rng)
        parts.append(local_energy(spec, model, sig, psi))
        left -= k
    mean, _, err = energy_stats(np.concatenate(parts))
    return mean, err


def config_dict(config):
    return asdict(config)
