"""Compare the compiled kernels with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each case runs both backends on identical inputs, checks that the results
agree and reports the best wall time of ``--repeat`` runs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from posopt import _kernels_py

try:
    from posopt import _kernels as _kernels_c
except ImportError:  # pragma: no cover - depends on the build
    _kernels_c = None


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(rng: np.random.Generator):
    k, n_pos = 6, 40
    D = np.ascontiguousarray(rng.integers(0, 5, size=(n_pos, k)).astype(float))
    mass = rng.dirichlet(np.ones(k))
    counts = np.zeros(n_pos, dtype=np.int64)
    counts[:k] = [3, 3, 2, 2, 2, 2]
    cands = np.arange(n_pos, dtype=np.int64)
    order = np.arange(k, dtype=np.int64)

    Dsep = np.ascontiguousarray(1.0 - np.eye(4))
    p4 = np.array([0.2, 0.25, 0.25, 0.3])

    Ds = np.ascontiguousarray(rng.integers(0, 4, size=(4, 5)).astype(float))
    dx = np.ascontiguousarray(Ds[0].copy())
    m5 = rng.dirichlet(np.ones(5))
    sigma = rng.dirichlet(np.ones(4))

    return {
        "position_utilities": lambda m: m.position_utilities(D, mass, counts, 0.0),
        "deviation_utilities": lambda m: m.deviation_utilities(D, mass, counts, 0, cands, 0.0),
        "find_witness": lambda m: m.find_witness(D, mass, counts, order, cands, 0.0, 1e-12),
        "enumerate_equilibria (k=4, n=24)": lambda m: m.enumerate_equilibria(Dsep, p4, 24, 0.0, 1e-12),
        "symmetric_utility (|supp|=4, n=12)": lambda m: m.symmetric_utility(Ds, dx, m5, sigma, 12, 0.0),
    }


def _same(a, b) -> bool:
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if a is None or b is None:
        return a is b
    return bool(np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), atol=1e-12))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'kernel':<38}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}  agree")
    for name, case in _cases(np.random.default_rng(args.seed)).items():
        tp, rp = _best(lambda: case(_kernels_py), args.repeat)
        tc, rc = _best(lambda: case(_kernels_c), args.repeat)
        print(f"{name:<38}{tp:>12.5f}{tc:>12.5f}{tp / tc:>9.1f}x  {_same(rp, rc)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
