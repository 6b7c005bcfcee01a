"""Hot loops over spin configurations and the computational basis.

Each kernel has a loop version compiled by numba and a vectorized numpy
version.  Callers go through the dispatch names at the bottom, which pick
one of the two once, at import time (see :mod:`hypnqs._accel`).

Conventions: ``sig`` is a (B, N) uint8 array of 0/1 spins; a basis index
is sum_i sig_i 2**i; bonds are given as parallel arrays (bi, bj, bJ).
"""
import numpy as np

from .._accel import USE_NUMBA, njit


# ------------------------------------------------------------------ numba

@njit
def diag_energies_loop(sig, bi, bj, bJ):
    nrow = sig.shape[0]
    out = np.zeros(nrow)
    for b in range(nrow):
        acc = 0.0
        for m in range(bi.shape[0]):
            if sig[b, bi[m]] == sig[b, bj[m]]:
                acc += 0.25 * bJ[m]
            else:
                acc -= 0.25 * bJ[m]
        out[b] = acc
    return out


@njit
def flips_loop(sig, bi, bj):
    nrow, n = sig.shape
    count = 0
    for b in range(nrow):
        for m in range(bi.shape[0]):
            if sig[b, bi[m]] != sig[b, bj[m]]:
                count += 1
    rows = np.empty(count, dtype=np.int64)
    bonds = np.empty(count, dtype=np.int64)
    out = np.empty((count, n), dtype=np.uint8)
    k = 0
    for b in range(nrow):
        for m in range(bi.shape[0]):
            if sig[b, bi[m]] != sig[b, bj[m]]:
                rows[k] = b
                bonds[k] = m
                out[k, :] = sig[b, :]
                out[k, bi[m]] = 1 - sig[b, bi[m]]
                out[k, bj[m]] = 1 - sig[b, bj[m]]
                k += 1
    return rows, bonds, out


@njit
def basis_matvec_loop(v, n, bi, bj, bJ):
    dim = v.shape[0]
    out = np.zeros(dim)
    for k in range(dim):
        acc = 0.0
        for m in range(bi.shape[0]):
            a = (k >> bi[m]) & 1
            c = (k >> bj[m]) & 1
            if a == c:
                acc += 0.25 * bJ[m] * v[k]
            else:
                acc -= 0.25 * bJ[m] * v[k]
                acc += 0.5 * bJ[m] * v[k ^ ((1 << bi[m]) | (1 << bj[m]))]
        out[k] = acc
    return out


@njit
def sector_coo_loop(states, bi, bj, bJ):
    dim = states.shape[0]
    nb = bi.shape[0]
    rows = np.empty(dim * (nb + 1), dtype=np.int64)
    cols = np.empty(dim * (nb + 1), dtype=np.int64)
    vals = np.empty(dim * (nb + 1))
    k = 0
    for r in range(dim):
        s = states[r]
        diag = 0.0
        for m in range(nb):
            a = (s >> bi[m]) & 1
            c = (s >> bj[m]) & 1
            if a == c:
                diag += 0.25 * bJ[m]
            else:
                diag -= 0.25 * bJ[m]
                t = s ^ ((1 << bi[m]) | (1 << bj[m]))
                rows[k] = r
                cols[k] = np.searchsorted(states, t)
                vals[k] = 0.5 * bJ[m]
                k += 1
        rows[k] = r
        cols[k] = r
        vals[k] = diag
        k += 1
    return rows[:k], cols[:k], vals[:k]


# ------------------------------------------------------------------ numpy

def diag_energies_numpy(sig, bi, bj, bJ):
    sign = np.where(sig[:, bi] == sig[:, bj], 0.25, -0.25)
    return sign @ bJ


def flips_numpy(sig, bi, bj):
    rows, bonds = np.nonzero(sig[:, bi] != sig[:, bj])
    out = sig[rows]
    k = np.arange(rows.size)
    out[k, bi[bonds]] ^= 1
    out[k, bj[bonds]] ^= 1
    return rows.astype(np.int64), bonds.astype(np.int64), out


def basis_matvec_numpy(v, n, bi, bj, bJ):
    k = np.arange(v.shape[0], dtype=np.int64)
    out = np.zeros_like(v)
    for i, j, J in zip(bi, bj, bJ):
        anti = ((k >> i) & 1) != ((k >> j) & 1)
        out += np.where(anti, -0.25 * J, 0.25 * J) * v
        out += np.where(anti, 0.5 * J * v[k ^ ((1 << i) | (1 << j))], 0.0)
    return out


def sector_coo_numpy(states, bi, bj, bJ):
    dim = states.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    diag = np.zeros(dim)
    rows, cols, vals = [], [], []
    for i, j, J in zip(bi, bj, bJ):
        anti = ((states >> i) & 1) != ((states >> j) & 1)
        diag += np.where(anti, -0.25 * J, 0.25 * J)
        r = idx[anti]
        rows.append(r)
        cols.append(np.searchsorted(states, states[anti] ^ ((1 << i) | (1 << j))))
        vals.append(np.full(r.size, 0.5 * J))
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


if USE_NUMBA:
    diag_energies = diag_energies_loop
    flips = flips_loop
    basis_matvec = basis_matvec_loop
    sector_coo = sector_coo_loop
else:
    diag_energies = diag_energies_numpy
    flips = flips_numpy
    basis_matvec = basis_matvec_numpy
    sector_coo = sector_coo_numpy
