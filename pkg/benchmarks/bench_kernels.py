"""Compare the compiled kernels with the pure-Python twin.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--seed 0]

Times three workloads on each backend: batched disc distances, batched ray
distances and one multistart disc search.  Each workload runs on a rotated
quadric and on a generalized ellipsoid in C^3.  Prints the best time over the
repeats and the compiled speedup, and checks that both backends return the
same values.
"""
import argparse
import contextlib
import time

import numpy as np

from extremal_bases import distances as distances_mod
from extremal_bases import domains as domains_mod
from extremal_bases._backend import get_kernels
from extremal_bases.distances import MODE_DISC, MODE_RAY, sphere_starts
from extremal_bases.domains import DiagonalQuadric, GeneralizedEllipsoid
from extremal_bases.linalg import random_unitary


@contextlib.contextmanager
def backend(name):
    k = get_kernels(name)
    saved = domains_mod.kernels, distances_mod.kernels
    domains_mod.kernels = distances_mod.kernels = k
    try:
        yield k
    finally:
        domains_mod.kernels, distances_mod.kernels = saved


def workloads(seed):
    rng = np.random.default_rng(seed)
    U = random_unitary(3, rng)
    quad = DiagonalQuadric([1.0, 2.0, 0.5], [0.3, 4.0, 1.5], 1.0, rotation=U)
    ell = GeneralizedEllipsoid([1.0, 0.4, 2.5], [1, 2, 3], rotation=U)
    X = rng.standard_normal((200, 6))
    X /= np.linalg.norm(X, axis=1)[:, None]
    # a small search keeps the pure-Python run under a minute
    starts = sphere_starts(6, 8, seed)
    out = []
    for D in (quad, ell):
        q = 0.4 * D.ray_distance(D.translation, U[0]) * U[0] + D.translation

        def disc(k, D=D, q=q):
            return D.problem(q, np.eye(3)).evaluate(MODE_DISC, X)

        def ray(k, D=D, q=q):
            return D.problem(q, np.eye(3)).evaluate(MODE_RAY, X)

        def search(k, D=D, q=q):
            p = D.problem(q, np.eye(3))
            return np.array([k.search(p, MODE_DISC, -1, starts, n_scout=4, n_polish=1,
                                     max_evals=600)["value"]])

        out += [(f"{D.kind} disc x200", disc), (f"{D.kind} ray x200", ray),
                (f"{D.kind} disc search", search)]
    return out


def best_time(fn, k, repeat):
    best, value = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn(k)
        best = min(best, time.perf_counter() - t0)
    return best, value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    try:
        get_kernels("compiled")
    except ImportError:
        print("compiled extension not built; run: python setup.py build_ext --inplace")
        return 1
    print(f"{'workload':42s} {'compiled s':>11s} {'python s':>10s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, fn in workloads(args.seed):
        with backend("compiled") as k:
            tc, vc = best_time(fn, k, args.repeat)
        with backend("python") as k:
            tp, vp = best_time(fn, k, 1 if "search" in name else args.repeat)
        diff = float(np.max(np.abs(vc - vp) / np.abs(vp)))
        print(f"{name:42s} {tc:11.4f} {tp:10.4f} {tp / tc:8.1f} {diff:13.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
