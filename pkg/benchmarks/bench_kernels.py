"""Compare the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--n 16 18 20 22] [--repeat 5]

For each size, times the Walsh-Hadamard transform, a single Haar pair update,
the pairwise sum and a full depth-4 brickwork evolution, and checks that both
backends return bit-identical results.
"""
import argparse
import timeit

import numpy as np

from anticonc import kernels, statmech
from anticonc.architectures import brickwork_1d
from anticonc.core import ModelParams


def _evolve_with(impl, arch):
    saved = kernels.apply_pair_inplace
    kernels.apply_pair_inplace = impl.apply_pair_inplace
    try:
        return statmech.evolve(statmech.initial_moment(arch.params), arch).coeffs
    finally:
        kernels.apply_pair_inplace = saved


def cases(n, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.random((1 << n, 1))
    arch = brickwork_1d(ModelParams(n, 2), 4)
    gamma = statmech.gate_gamma(2)

    def wht(impl):
        a = v.copy()
        impl.wht_inplace(a)
        return a

    def pair(impl):
        a = v.copy()
        impl.apply_pair_inplace(a, 1, n - 2, gamma)
        return a

    def tsum(impl):
        return impl.tree_sum(v[:, 0])

    def evolve(impl):
        return _evolve_with(impl, arch)

    return {"wht": wht, "apply_pair": pair, "tree_sum": tsum, "evolve d=4": evolve}


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[16, 18, 20, 22])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    python = kernels.get_backend("python")
    try:
        compiled = kernels.get_backend("cython")
    except ImportError:
        parser.exit(1, "compiled kernels are not built; run `pip install -e .` first\n")

    print(f"{'n':>3} {'kernel':<12} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}  same")
    for n in args.n:
        for name, fn in cases(n).items():
            ref, out = fn(python), fn(compiled)
            same = np.array_equal(ref, out)
            tp = best_time(lambda: fn(python), args.repeat)
            tc = best_time(lambda: fn(compiled), args.repeat)
            print(f"{n:>3} {name:<12} {tp * 1e3:>12.2f} {tc * 1e3:>12.2f} {tp / tc:>8.2f}  {same}")


if __name__ == "__main__":
    main()
