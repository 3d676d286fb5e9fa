"""Benchmark the compiled oracle kernel against the pure-Python fallback.

Run: python benchmarks/bench_oracle.py
"""

import time

import numpy as np

from improvae._kernels import oracle_py

try:
    from improvae._kernels import oracle_cy
except ImportError:
    oracle_cy = None


def bench(kernel, features, mode, theta, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        kernel.build_oracle_arrays(features, mode, theta)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(7)
    print(f"{'n':>6} {'dim':>4} {'mode':>10} {'python':>10} {'cython':>10} {'speedup':>8}")
    for n in (200, 500, 1000, 2000):
        for mode, name in ((0, "euclidean"), (1, "cosine")):
            # clustered frames so the oracle finds plenty of repetitions
            centers = rng.normal(size=(8, 6))
            features = centers[rng.integers(0, 8, n)] + 0.05 * rng.normal(size=(n, 6))
            if mode == 1:
                features /= np.linalg.norm(features, axis=1, keepdims=True)
            theta = 0.3
            t_py = bench(oracle_py, features, mode, theta)
            if oracle_cy is None:
                print(f"{n:>6} {6:>4} {name:>10} {t_py:>9.4f}s {'n/a':>10} {'n/a':>8}")
                continue
            t_cy = bench(oracle_cy, features, mode, theta)
            trn_py, sfx_py, lrs_py = oracle_py.build_oracle_arrays(features, mode, theta)
            trn_cy, sfx_cy, lrs_cy = oracle_cy.build_oracle_arrays(features, mode, theta)
            assert trn_py == trn_cy and (sfx_py == sfx_cy).all() and (lrs_py == lrs_cy).all()
            print(f"{n:>6} {6:>4} {name:>10} {t_py:>9.4f}s {t_cy:>9.4f}s "
                  f"{t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
