"""Time the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once before timing so numba compilation is excluded.
The table reports the best wall time of ``--repeat`` runs for both versions
and the speedup of the compiled one.
"""
import argparse
import time

import numpy as np

from ukrylov import kernels
from ukrylov.clifford import random_clifford_brickwork, single_site_pauli
from ukrylov.free_fermion import _chebyshev_nodes


def _moments(T, seed=0):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, 400)
    w = rng.uniform(0, 1, 400)
    w /= w.sum()
    t = np.arange(T + 1)
    return np.exp(1j * np.outer(t, th)) @ w


def _cases():
    S = _moments(300)
    L, _, _ = kernels.toeplitz_cholesky_np(S, 1e-12)
    alpha = kernels.lower_inverse_np(L)
    nodes = _chebyshev_nodes(0.3, 2000)
    circ = random_clifford_brickwork(64, 0)
    (be, te), (bo, to) = circ.arrays()
    p = single_site_pauli(64, 32, "Z")
    cl = (p.x.astype(np.int64), p.z.astype(np.int64), int(p.phase), bo, to, be, te, 2000)
    return [
        ("toeplitz_cholesky (T=300)", "toeplitz_cholesky", (S, 1e-12)),
        ("lower_inverse (n=300)", "lower_inverse", (L,)),
        ("hessenberg_coefficients (n=300)", "hessenberg_coefficients", (alpha, S)),
        ("chebyshev_mean (N=2000, T=400)", "chebyshev_mean", (nodes, 400)),
        ("clifford_evolve (L=64, t=2000)", "clifford_evolve", cl),
    ]


def _best(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':34s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for label, name, a in _cases():
        nb = getattr(kernels, name + "_nb")
        npf = getattr(kernels, name + "_np")
        nb(*a)  # compile
        t_nb = _best(nb, a, args.repeat)
        t_np = _best(npf, a, args.repeat)
        print(f"{label:34s} {1e3 * t_nb:11.3f} {1e3 * t_np:11.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
