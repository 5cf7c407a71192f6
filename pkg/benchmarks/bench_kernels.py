"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from permclass import _pykernels
from permclass.analytic import ClassSpec, build_offspring_model
from permclass.sampler import ClassSampler

try:
    from permclass import _ckernels
except ImportError:
    _ckernels = None


def cases(n, seed=0):
    rng = np.random.default_rng(seed)
    spec = ClassSpec.load("separable")
    model = build_offspring_model(spec)
    deg = ClassSampler(spec, model=model).tree_shape(n, rng, method="cycle_lemma")
    deg = np.ascontiguousarray(deg, dtype=np.int64)
    kinds = np.where(deg == 0, 0, 1).astype(np.int64)
    ptr = np.zeros(len(deg), dtype=np.int64)
    data = np.zeros(1, dtype=np.int64)
    perm = rng.permutation(n).astype(np.int64) + 1
    u = rng.random(64 * n)
    out = np.empty(64 * n + 1, dtype=np.int64)
    small = max(8, n // 100)
    return {
        "tree_arrays": lambda k: k.tree_arrays(deg),
        "decode_values": lambda k: k.decode_values(deg, kinds, ptr, data),
        "count_inversions": lambda k: k.count_inversions(perm),
        f"gw_sample(n={small})": lambda k: k.gw_sample(model.cdf, u, small, 64 * small, 10 ** 6, out),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':24s}" + "".join(f"{b:>14s}" for b, _ in backends) + "   speedup")
    for name, fn in cases(args.n).items():
        times = []
        for _, mod in backends:
            t = timeit.Timer(lambda: fn(mod)).repeat(args.repeat, 1)
            times.append(min(t))
        row = f"{name:24s}" + "".join(f"{t * 1e3:12.3f}ms" for t in times)
        if len(times) == 2:
            row += f"   {times[0] / times[1]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
