"""Backend selection for the winner-share kernels.

The compiled extension is used when importable; setting ``POSOPT_PURE_PYTHON=1``
forces the pure-Python fallback.  ``BACKEND`` names the active one.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("POSOPT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
        BACKEND = "python"


def _table(D):
    return np.ascontiguousarray(D, dtype=np.float64)


def _vec(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _ints(x):
    return np.ascontiguousarray(x, dtype=np.int64)


def position_utilities(D, mass, counts, tol):
    return _impl.position_utilities(_table(D), _vec(mass), _ints(counts), float(tol))


def deviation_utilities(D, mass, counts, a, cands, tol):
    return _impl.deviation_utilities(_table(D), _vec(mass), _ints(counts), int(a), _ints(cands), float(tol))


def find_witness(D, mass, counts, order, cands, tol, gain_tol):
    return _impl.find_witness(
        _table(D), _vec(mass), _ints(counts), _ints(order), _ints(cands), float(tol), float(gain_tol)
    )


def count_compositions(n, k):
    return int(_impl.count_compositions(int(n), int(k)))


def enumerate_equilibria(D, mass, n, tol, gain_tol):
    return _impl.enumerate_equilibria(_table(D), _vec(mass), int(n), float(tol), float(gain_tol))


def symmetric_utility(Ds, dx, mass, sigma, n, tol):
    return float(_impl.symmetric_utility(_table(Ds), _vec(dx), _vec(mass), _vec(sigma), int(n), float(tol)))
