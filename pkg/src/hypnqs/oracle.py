"""Exact diagonalization for short chains, plus a lookup-table wavefunction.

The Hamiltonian conserves total S_z and is SU(2) invariant, so its ground
multiplet always has a member with n_up = n // 2.  Both solvers work in
that sector and embed the result into the full 2**n basis.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConvergenceError, SizeGuardError
from .hamiltonian import HeisenbergSpec, _kernels, basis_configs, basis_index, matvec
from .wavefunction import PsiValue, amplitudes

DENSE_MAX_N = 12
LANCZOS_MAX_N = 20
RESIDUAL_TOL = 1e-8


@dataclass
class EDResult:
    energy: float
    ground_vector: np.ndarray  # length 2**n, real, unit norm
    n: int
    couplings: tuple
    method: str
    residual: float

    @property
    def spec(self):
        return HeisenbergSpec(self.n, *self.couplings)


def sector_states(n, n_up):
    """Sorted basis indices with exactly ``n_up`` bits set."""
    k = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros_like(k)
    for i in range(n):
        pop += (k >> i) & 1
    return k[pop == n_up]


def sector_matrix(spec, states):
    bi, bj, bJ = spec.bonds()
    rows, cols, vals = _kernels.sector_coo(states, bi, bj, bJ)
    d = states.size
    return scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(d, d)).tocsr()


def _fix_gauge(v):
    # deterministic sign: largest-magnitude entry (first on ties) positive
    k = int(np.argmax(np.abs(v)))
    return v if v[k] > 0 else -v


def ed_ground(spec, method="auto", seed=12345, maxiter=5000):
    """Lowest eigenpair of ``spec``.

    ``method`` is "dense" (n <= 12), "lanczos" (n <= 20) or "auto" (dense
    when allowed).  The Lanczos path starts from a fixed-seed random vector.
    """
    n = spec.n
    if method == "auto":
        method = "dense" if n <= DENSE_MAX_N else "lanczos"
    if method not in ("dense", "lanczos"):
        raise ValueError(f"unknown method {method!r}")
    limit = DENSE_MAX_N if method == "dense" else LANCZOS_MAX_N
    if n > limit:
        raise SizeGuardError(f"{method} diagonalization limited to n <= {limit}, got n = {n}")

    states = sector_states(n, n // 2)
    h = sector_matrix(spec, states)
    if method == "dense" or states.size < 16:
        w, vecs = scipy.linalg.eigh(h.toarray(), subset_by_index=[0, 0])
        e, v = float(w[0]), vecs[:, 0]
    else:
        v0 = np.random.default_rng(seed).standard_normal(states.size)
        try:
            w, vecs = scipy.sparse.linalg.eigsh(h, k=1, which="SA", v0=v0, tol=1e-13,
                                                maxiter=maxiter)
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos did not converge within {maxiter} restarts") from exc
        e, v = float(w[0]), vecs[:, 0]

    full = np.zeros(1 << n)
    full[states] = v
    full = _fix_gauge(full / np.linalg.norm(full))
    # Rayleigh quotient in the full basis is as accurate as the solver's value
    hv = matvec(spec, full)
    e = float(full @ hv)
    residual = float(np.linalg.norm(hv - e * full))
    if residual > RESIDUAL_TOL:
        raise ConvergenceError(f"ground-state residual {residual:.3e} above {RESIDUAL_TOL:g}")
    return EDResult(e, full, n, spec.couplings, method, residual)


class TableModel:
    """Wavefunction backed by an explicit amplitude vector over the full basis."""

    def __init__(self, vector):
        vector = np.asarray(vector, dtype=np.float64)
        n = int(round(np.log2(vector.size)))
        if vector.size != 1 << n:
            raise ValueError("vector length must be a power of two")
        if n > LANCZOS_MAX_N:
            raise SizeGuardError(f"table models limited to n <= {LANCZOS_MAX_N}")
        self.n = n
        self.vector = vector / np.linalg.norm(vector)
        self.probs = self.vector ** 2
        with np.errstate(divide="ignore"):
            self.log_amp = np.log(np.abs(self.vector))
        self.phase = np.where(self.vector < 0, np.pi, 0.0)

    @classmethod
    def from_ed(cls, ed):
        return cls(ed.ground_vector)

    def evaluate(self, sigma):
        k = basis_index(sigma)
        return PsiValue(self.log_amp[k], self.phase[k])

    def sample(self, count, rng):
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        k = rng.choice(self.probs.size, size=count, p=self.probs / self.probs.sum())
        sig = ((k[:, None] >> np.arange(self.n)) & 1).astype(np.uint8)
        return sig, self.evaluate(sig)

    def enumerate_states(self):
        return basis_configs(self.n), self.probs.copy()


def exact_energy(spec, model):
    """<psi|H|psi> / <psi|psi> computed over the full basis."""
    if isinstance(model, TableModel):
        psi = model.vector.astype(np.complex128)
    else:
        psi = amplitudes(model)
    hpsi = matvec(spec, psi.real) + 1j * matvec(spec, psi.imag)
    return float(np.real(np.vdot(psi, hpsi)) / np.real(np.vdot(psi, psi)))


def table_model(ed):
    return TableModel.from_ed(ed)
