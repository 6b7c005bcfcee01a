"""Autoregressive complex wavefunction psi(sigma) = exp(i phi(sigma)) sqrt(P(sigma)).

At site i the cell consumes the one-hot of sigma_{i-1} (a zero vector at
i = 0), the softmax head gives P(sigma_i | sigma_<i) and the softsign head
gives a phase contribution selected by sigma_i.  The Marshall sign is
carried as an extra phase of pi per up spin on the chosen sublattice.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import cells
from .errors import SizeGuardError
from .grad import functional as F
from .grad import param_count

ENUMERATE_LIMIT = 20
SUBLATTICES = ("even", "odd")
_ONEHOT = np.eye(2)


@dataclass(frozen=True)
class ModelConfig:
    variant: str
    hidden: int
    n: int
    c: float = 1.0
    r_max: float = 1.0
    l_max: float = math.inf
    clamp_mode: str = "single"
    clamp_candidate: bool = False
    phase_pi_scaling: bool = False
    marshall_sublattice: str = "even"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.marshall_sublattice not in SUBLATTICES:
            raise ValueError(f"marshall_sublattice must be one of {SUBLATTICES}")
        self.cell  # validates the cell fields

    @property
    def cell(self):
        return cells.CellConfig(self.variant, self.hidden, self.c, self.r_max, self.l_max,
                                self.clamp_mode, self.clamp_candidate)

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass
class PsiValue:
    log_amp: np.ndarray   # 1/2 log P(sigma)
    phase: np.ndarray

    @property
    def log_prob(self):
        return 2.0 * self.log_amp

    @property
    def log_psi(self):
        return self.log_amp + 1j * self.phase


def marshall_count(sigma, sublattice="even"):
    """Number of up spins on the even (0, 2, ...) or odd sites."""
    sig = np.atleast_2d(sigma)
    start = 0 if sublattice == "even" else 1
    return sig[:, start::2].sum(axis=1)


def rollout(config, p, sigma=None, uniforms=None, probe=None):
    """Run the recurrence over all sites.

    Exactly one of ``sigma`` (evaluate) and ``uniforms`` (sample: site i is
    up when uniforms[:, i] < P(up)) must be given.  ``p`` maps segment names
    to arrays or tape variables.  Returns (sigma, log_amp, phase).
    """
    if (sigma is None) == (uniforms is None):
        raise ValueError("give either sigma or uniforms")
    cell = config.cell
    n = config.n
    if sigma is not None:
        sig = np.asarray(sigma, dtype=np.uint8)
        if sig.ndim != 2 or sig.shape[1] != n:
            raise ValueError(f"configurations must have shape (batch, {n})")
        batch = sig.shape[0]
    else:
        batch = uniforms.shape[0]
        sig = np.empty((batch, n), dtype=np.uint8)
    h = cells.initial_state(cell, batch)
    x = np.zeros((batch, 2))
    log_p = 0.0
    phase = 0.0
    for i in range(n):
        h = cells.step(cell, p, h, x, probe)
        t = cells.tangent(cell, h)
        lp = cells.head_log_softmax(p, t)
        ss = F.softsign(cells.head_logits(p, t, "phase"))
        if uniforms is not None:
            sig[:, i] = uniforms[:, i] < np.exp(F.value(lp)[:, 1])
        x = _ONEHOT[sig[:, i]]
        log_p = log_p + F.sum(lp * x, axis=-1)
        phase = phase + F.sum(ss * x, axis=-1)
    if config.phase_pi_scaling:
        phase = phase * math.pi
    phase = phase + math.pi * marshall_count(sig, config.marshall_sublattice)
    return sig, 0.5 * log_p, phase


@dataclass
class WavefunctionModel:
    config: ModelConfig
    params: object  # ParamVector
    probe: dict = field(default=None, repr=False)

    def __post_init__(self):
        expect = param_count(self.config.variant, self.config.hidden)
        if self.params.size != expect:
            raise ValueError(f"parameter vector has {self.params.size} entries, expected {expect}")

    @classmethod
    def initialize(cls, config, rng):
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        return cls(config, cells.init_params(config.cell, rng))

    @property
    def n(self):
        return self.config.n

    def with_params(self, params):
        return WavefunctionModel(self.config, params)

    def evaluate(self, sigma):
        sig = np.atleast_2d(np.asarray(sigma, dtype=np.uint8))
        _, la, ph = rollout(self.config, self.params.views(), sigma=sig, probe=self.probe)
        return PsiValue(np.asarray(la), np.asarray(ph))

    def sample(self, count, rng):
        """Draw ``count`` exact, independent configurations; returns (sigma, PsiValue)."""
        if count < 1:
            raise ValueError("count must be >= 1")
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        u = rng.random((count, self.n))
        sig, la, ph = rollout(self.config, self.params.views(), uniforms=u, probe=self.probe)
        return sig, PsiValue(np.asarray(la), np.asarray(ph))

    def enumerate_states(self, chunk=1 << 14):
        """All 2**n configurations (site 0 least significant) and their probabilities."""
        return enumerate_model(self, chunk)


def enumerate_model(model, chunk=1 << 14):
    from .hamiltonian import basis_configs

    if model.n > ENUMERATE_LIMIT:
        raise SizeGuardError(f"enumeration limited to n <= {ENUMERATE_LIMIT}")
    basis = basis_configs(model.n)
    probs = np.empty(basis.shape[0])
    for s in range(0, basis.shape[0], chunk):
        probs[s:s + chunk] = np.exp(model.evaluate(basis[s:s + chunk]).log_prob)
    return basis, probs


def amplitudes(model, chunk=1 << 14):
    """Complex amplitude vector over the full basis."""
    from .hamiltonian import basis_configs

    if model.n > ENUMERATE_LIMIT:
        raise SizeGuardError(f"enumeration limited to n <= {ENUMERATE_LIMIT}")
    basis = basis_configs(model.n)
    psi = np.empty(basis.shape[0], dtype=np.complex128)
    for s in range(0, basis.shape[0], chunk):
        v = model.evaluate(basis[s:s + chunk])
        psi[s:s + chunk] = np.exp(v.log_amp + 1j * v.phase)
    return psi
