"""Compiled vs pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-repeat wall time of each kernel under both backends and
the speedup. Results are checked for agreement before timing.
"""

import argparse
import timeit

import numpy as np

from dqc1trace import _kernels_py
from dqc1trace.baseline import circulant, wrap_dense

try:
    from dqc1trace import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    coeffs = rng.standard_normal(33)
    t = np.cos(np.linspace(0, np.pi, 200_000))
    yield "clenshaw deg 32, 2e5 pts", lambda k: k.clenshaw(coeffs, t)

    base = rng.standard_normal((1024, 256))
    yield "fwht_rows 1024 x 256", lambda k: k.fwht_rows(base.copy())

    oracle = wrap_dense(circulant(256, 4))
    args = (oracle.indptr, oracle.indices, oracle.data, 0, 7)
    yield "walk_enumerate s=4, k=7", lambda k: k.walk_enumerate(*args)


def check(fast, slow, name):
    if name.startswith("fwht"):
        return
    a, b = fast, slow
    if isinstance(a, tuple):
        assert np.allclose(a[0], b[0]) and a[1:] == b[1:], name
    else:
        assert np.allclose(a, b), name


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the Python fallback is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'cython [ms]':>12s} {'python [ms]':>12s} {'speedup':>8s}")
    for name, run in cases(rng):
        check(run(_kernels), run(_kernels_py), name)
        fast = min(timeit.repeat(lambda: run(_kernels), number=1, repeat=args.repeat))
        slow = min(timeit.repeat(lambda: run(_kernels_py), number=1, repeat=args.repeat))
        print(f"{name:32s} {fast * 1e3:12.2f} {slow * 1e3:12.2f} {slow / fast:8.1f}x")


if __name__ == "__main__":
    main()
