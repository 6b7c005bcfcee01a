"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--n 16] [--batch 4096] [--repeat 5]

Both versions are importable in one process, so the flag
HYPNQS_DISABLE_NUMBA is not needed here.  Each numba kernel is called once
before timing so compilation is excluded.  Also times one full local-energy
pass with a small model, which is dominated by the (numpy) network.
"""
import argparse
import timeit

import numpy as np

from hypnqs._accel import HAVE_NUMBA
from hypnqs.hamiltonian import HeisenbergSpec, _kernels, local_energy
from hypnqs.oracle import sector_states
from hypnqs.wavefunction import ModelConfig, WavefunctionModel


def best_of(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16, help="chain length")
    ap.add_argument("--batch", type=int, default=4096, help="configurations per call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    spec = HeisenbergSpec(args.n, 1.0, 0.2, 0.2)
    bi, bj, bJ = spec.bonds()
    rng = np.random.default_rng(0)
    sig = rng.integers(0, 2, (args.batch, args.n)).astype(np.uint8)
    v = rng.normal(size=1 << args.n)
    states = sector_states(args.n, args.n // 2)

    cases = [
        ("diag_energies", lambda k: k(sig, bi, bj, bJ)),
        ("flips", lambda k: k(sig, bi, bj)),
        ("basis_matvec", lambda k: k(v, args.n, bi, bj, bJ)),
        ("sector_coo", lambda k: k(states, bi, bj, bJ)),
    ]
    print(f"n = {args.n}, batch = {args.batch}, numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<16}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, call in cases:
        t_np = best_of(lambda: call(getattr(_kernels, f"{name}_numpy")), args.repeat)
        if HAVE_NUMBA:
            t_nb = best_of(lambda: call(getattr(_kernels, f"{name}_loop")), args.repeat)
            print(f"{name:<16}{t_nb * 1e3:>12.2f}{t_np * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<16}{'-':>12}{t_np * 1e3:>12.2f}{'-':>10}")

    n = min(args.n, 20)
    small = HeisenbergSpec(n, 1.0, 0.2)
    model = WavefunctionModel.initialize(ModelConfig("euclidean_gru", 16, n), 0)
    s, psi = model.sample(80, 1)
    t = best_of(lambda: local_energy(small, model, s, psi), args.repeat)
    print(f"\nlocal_energy, batch 80, GRU h=16 (network in numpy): {t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
