"""Open-boundary spin-1/2 Heisenberg chain with J1, J2, J3 couplings.

H = sum_{d=1..3} J_d sum_i S_i . S_{i+d}, with S = sigma_Pauli / 2.  A spin
value of 1 means up.  For a bond (i, j):

    diagonal     J/4 * s_i s_j        (s = 2 sigma - 1)
    off-diagonal J/2 when sigma_i != sigma_j, connecting to the state with
                 both spins flipped
"""
from dataclasses import dataclass

import numpy as np

from ..errors import SizeGuardError
from . import _kernels

__all__ = [
    "HeisenbergSpec", "Connection", "connections", "diagonal", "local_energy",
    "energy_estimate", "energy_stats", "basis_configs", "basis_index", "matvec",
    "dense_matrix", "DENSE_LIMIT",
]

DENSE_LIMIT = 14


@dataclass(frozen=True)
class HeisenbergSpec:
    n: int
    j1: float = 1.0
    j2: float = 0.0
    j3: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")

    @property
    def couplings(self):
        return (float(self.j1), float(self.j2), float(self.j3))

    def pairs(self, d):
        """Open-boundary pairs (i, i + d)."""
        return [(i, i + d) for i in range(self.n - d)]

    def bonds(self):
        """Parallel arrays (i, j, J) over all bonds with nonzero coupling."""
        bi, bj, bJ = [], [], []
        for d, J in enumerate(self.couplings, start=1):
            if J == 0.0:
                continue
            for i, j in self.pairs(d):
                bi.append(i)
                bj.append(j)
                bJ.append(J)
        return (np.array(bi, dtype=np.int64), np.array(bj, dtype=np.int64),
                np.array(bJ, dtype=np.float64))


@dataclass(frozen=True)
class Connection:
    target: np.ndarray
    element: float


def as_configs(spec, sigma):
    sig = np.asarray(sigma)
    if sig.ndim == 1:
        sig = sig[None, :]
    if sig.ndim != 2 or sig.shape[1] != spec.n:
        raise ValueError(f"configurations must have {spec.n} sites, got shape {np.shape(sigma)}")
    if not np.all((sig == 0) | (sig == 1)):
        raise ValueError("spin values must be 0 or 1")
    return np.ascontiguousarray(sig, dtype=np.uint8)


def diagonal(spec, sigma):
    bi, bj, bJ = spec.bonds()
    return _kernels.diag_energies(as_configs(spec, sigma), bi, bj, bJ)


def connections(spec, sigma):
    """Nonzero matrix elements <sigma|H|sigma'> of one configuration, diagonal first."""
    sig = as_configs(spec, sigma)
    if sig.shape[0] != 1:
        raise ValueError("connections() takes a single configuration")
    bi, bj, bJ = spec.bonds()
    out = []
    d = float(_kernels.diag_energies(sig, bi, bj, bJ)[0])
    if d != 0.0:
        out.append(Connection(sig[0].copy(), d))
    _, bonds, targets = _kernels.flips(sig, bi, bj)
    for m, t in zip(bonds, targets):
        out.append(Connection(t, 0.5 * float(bJ[m])))
    return out


def _evaluate(model, sig, chunk):
    la = np.empty(sig.shape[0])
    ph = np.empty(sig.shape[0])
    for s in range(0, sig.shape[0], chunk):
        psi = model.evaluate(sig[s:s + chunk])
        la[s:s + chunk] = psi.log_amp
        ph[s:s + chunk] = psi.phase
    return la, ph


def local_energy(spec, model, sigma, psi=None, chunk=4096):
    """E_loc(sigma) = sum_sigma' H[sigma, sigma'] psi(sigma') / psi(sigma) for a batch.

    ``psi`` may carry the already-known values of the model on ``sigma``
    (for example from sampling) to avoid evaluating them again.
    """
    sig = as_configs(spec, sigma)
    bi, bj, bJ = spec.bonds()
    eloc = _kernels.diag_energies(sig, bi, bj, bJ).astype(np.complex128)
    if psi is None:
        la0, ph0 = _evaluate(model, sig, chunk)
    else:
        la0, ph0 = np.asarray(psi.log_amp), np.asarray(psi.phase)
    rows, bonds, targets = _kernels.flips(sig, bi, bj)
    if rows.size:
        la1, ph1 = _evaluate(model, targets, chunk)
        ratio = np.exp((la1 - la0[rows]) + 1j * (ph1 - ph0[rows]))
        np.add.at(eloc, rows, 0.5 * bJ[bonds] * ratio)
    return eloc


def energy_stats(eloc):
    """(mean, variance, std_error) of the real part of a local-energy batch."""
    e = np.real(np.asarray(eloc))
    n = e.size
    if n == 0:
        raise ValueError("empty sample")
    mean = float(np.mean(e))
    var = float(np.var(e, ddof=1)) if n > 1 else 0.0
    return mean, var, (var / n) ** 0.5


def energy_estimate(spec, model, samples, psi=None):
    """Monte Carlo energy from configurations drawn from |psi|^2: (mean, std_error)."""
    mean, _, err = energy_stats(local_energy(spec, model, samples, psi))
    return mean, err


# ------------------------------------------------------------------ basis

def basis_configs(n):
    """All 2**n configurations; row k holds the bits of k, site 0 least significant."""
    k = np.arange(1 << n, dtype=np.int64)
    return ((k[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def basis_index(sigma):
    sig = np.atleast_2d(np.asarray(sigma, dtype=np.int64))
    return sig @ (np.int64(1) << np.arange(sig.shape[1], dtype=np.int64))


def matvec(spec, v):
    """H v in the full 2**n basis."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.shape != (1 << spec.n,):
        raise ValueError("vector length must be 2**n")
    bi, bj, bJ = spec.bonds()
    return _kernels.basis_matvec(v, spec.n, bi, bj, bJ)


def dense_matrix(spec):
    """Dense Hamiltonian assembled row by row from :func:`connections`."""
    if spec.n > DENSE_LIMIT:
        raise SizeGuardError(f"dense matrix limited to n <= {DENSE_LIMIT}")
    basis = basis_configs(spec.n)
    h = np.zeros((basis.shape[0], basis.shape[0]))
    for r, s in enumerate(basis):
        for conn in connections(spec, s):
            h[r, basis_index(conn.target)[0]] += conn.element
    return h
