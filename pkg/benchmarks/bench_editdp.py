"""Benchmark the compiled edit-distance core against the pure-Python one.

Run after building the extension (pip install -e . or
python setup.py build_ext --inplace):

    python benchmarks/bench_editdp.py --lengths 50 100 200 400 --repeats 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from foldrep import _editdp_py

try:
    from foldrep import _editdp
except ImportError:
    _editdp = None


def random_symbol_pair(rng, length, k=20):
    a = rng.integers(0, k, size=length).astype(np.int32)
    b = rng.integers(0, k, size=length).astype(np.int32)
    costs = rng.random((k, k))
    np.fill_diagonal(costs, 0.0)
    return a, b, np.ascontiguousarray(costs)


def random_vector_pair(rng, length, dim=3):
    return (np.ascontiguousarray(rng.random((length, dim))),
            np.ascontiguousarray(rng.random((length, dim))))


def best_of(callable_, repeats):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        callable_()
        timings.append(time.perf_counter() - start)
    return min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lengths", type=int, nargs="+",
                        default=[50, 100, 200, 400])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _editdp is None:
        print("compiled core not available; benchmarking the pure core only")
    rng = np.random.default_rng(args.seed)
    header = "%8s  %12s  %12s  %12s  %8s" % (
        "length", "kind", "pure (s)", "compiled (s)", "speedup")
    print(header)
    print("-" * len(header))
    for length in args.lengths:
        a, b, costs = random_symbol_pair(rng, length)
        u, v = random_vector_pair(rng, length)
        cases = [
            ("symbols",
             lambda: _editdp_py.lev_symbols(a, b, costs, 1.0),
             (lambda: _editdp.lev_symbols(a, b, costs, 1.0)) if _editdp else None),
            ("vectors",
             lambda: _editdp_py.lev_vectors(u, v, 1.0, 1.0),
             (lambda: _editdp.lev_vectors(u, v, 1.0, 1.0)) if _editdp else None),
        ]
        for kind, pure_fn, fast_fn in cases:
            pure_t = best_of(pure_fn, args.repeats)
            if fast_fn is None:
                print("%8d  %12s  %12.6f  %12s  %8s"
                      % (length, kind, pure_t, "n/a", "n/a"))
                continue
            if abs(pure_fn() - fast_fn()) != 0.0:
                raise SystemExit("cores disagree at length %d (%s)"
                                 % (length, kind))
            fast_t = best_of(fast_fn, args.repeats)
            print("%8d  %12s  %12.6f  %12.6f  %7.1fx"
                  % (length, kind, pure_t, fast_t, pure_t / fast_t))


if __name__ == "__main__":
    main()
