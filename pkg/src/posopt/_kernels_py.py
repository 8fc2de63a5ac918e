"""Pure-Python implementations of the winner-share kernels.

Same functions and semantics as the compiled ``_kernels`` module; selected when
the extension is unavailable or ``POSOPT_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import math

import numpy as np


def _share_at(rows, mass, c, b, tol):
    u = 0.0
    occ = [p for p, k in enumerate(c) if k > 0]
    for t, w in enumerate(mass):
        if w == 0.0:
            continue
        m = min(rows[p][t] for p in occ)
        thr = m + tol
        if rows[b][t] <= thr:
            n_min = sum(c[p] for p in occ if rows[p][t] <= thr)
            u += w / n_min
    return u


def _witness(rows, mass, c, order, cands, tol, gain_tol):
    for a in order:
        if c[a] <= 0:
            continue
        ua = _share_at(rows, mass, c, a, tol)
        for b in cands:
            if b == a:
                continue
            c[a] -= 1
            c[b] += 1
            ub = _share_at(rows, mass, c, b, tol)
            c[a] += 1
            c[b] -= 1
            if ub - ua > gain_tol:
                return int(a), int(b), ua, ub
    return None


def position_utilities(D, mass, counts, tol):
    rows = np.asarray(D, dtype=float).tolist()
    w = np.asarray(mass, dtype=float).tolist()
    c = [int(k) for k in counts]
    return np.array([_share_at(rows, w, c, a, tol) if c[a] > 0 else 0.0 for a in range(len(c))])


def deviation_utilities(D, mass, counts, a, cands, tol):
    rows = np.asarray(D, dtype=float).tolist()
    w = np.asarray(mass, dtype=float).tolist()
    c = [int(k) for k in counts]
    if c[a] <= 0:
        raise ValueError("no player at the deviating position")
    out = []
    for b in cands:
        b = int(b)
        if b == a:
            out.append(_share_at(rows, w, c, a, tol))
            continue
        c[a] -= 1
        c[b] += 1
        out.append(_share_at(rows, w, c, b, tol))
        c[a] += 1
        c[b] -= 1
    return np.array(out, dtype=float)


def find_witness(D, mass, counts, order, cands, tol, gain_tol):
    """First strictly profitable deviation as ``(a, b, u_a, u_b)`` or None."""
    rows = np.asarray(D, dtype=float).tolist()
    w = np.asarray(mass, dtype=float).tolist()
    c = [int(k) for k in counts]
    return _witness(rows, w, c, [int(a) for a in order], [int(b) for b in cands], tol, gain_tol)


def count_compositions(n, k):
    return math.comb(n + k - 1, k - 1) if k > 0 else 0


def compositions(n, k):
    """Count vectors of length k summing to n, lexicographically increasing."""
    if k == 1:
        yield (n,)
        return
    for v in range(n + 1):
        for rest in compositions(n - v, k - 1):
            yield (v,) + rest


def enumerate_equilibria(D, mass, n, tol, gain_tol):
    rows = np.asarray(D, dtype=float).tolist()
    w = np.asarray(mass, dtype=float).tolist()
    P = len(rows)
    if P == 0:
        return np.zeros((0, 0), dtype=np.int64)
    order = list(range(P))
    found = [
        comp
        for comp in compositions(int(n), P)
        if _witness(rows, w, list(comp), order, order, tol, gain_tol) is None
    ]
    return np.array(found, dtype=np.int64).reshape(len(found), P)


def symmetric_utility(Ds, dx, mass, sigma, n, tol):
    """Expected share of a player fixed at ``dx`` against n-1 draws from sigma."""
    rows = np.asarray(Ds, dtype=float).tolist()
    own = np.asarray(dx, dtype=float).tolist()
    w = np.asarray(mass, dtype=float).tolist()
    sig = np.asarray(sigma, dtype=float).tolist()
    s = len(rows)
    if s == 0:
        raise ValueError("empty support")
    m = int(n) - 1
    total = 0.0
    for comp in compositions(m, s):
        # multinomial coefficient as an exact integer
        coef, left = 1, m
        for k in comp:
            coef *= math.comb(left, k)
            left -= k
        weight = float(coef)
        for k, q in zip(comp, sig):
            if k:
                weight *= q**k
        share = 0.0
        occ = [j for j, k in enumerate(comp) if k > 0]
        for t, mt in enumerate(w):
            if mt == 0.0:
                continue
            mn = min([own[t]] + [rows[j][t] for j in occ])
            thr = mn + tol
            if own[t] <= thr:
                share += mt / (1 + sum(comp[j] for j in occ if rows[j][t] <= thr))
        total += weight * share
    return total
