# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled winner-share kernels.

All routines work on a dense distance table ``D`` (positions x targets), a
target mass vector and an integer occupation vector ``counts`` aligned with the
rows of ``D``.  The pure-Python module ``_kernels_py`` exposes the same
functions with identical semantics.
"""
from libc.math cimport INFINITY, exp, lgamma, log

import numpy as np


cdef double _share_at(const double[:, ::1] D, const double[::1] mass,
                      long long[::1] c, Py_ssize_t b, double tol) noexcept nogil:
    # utility of a single player standing at b; c[b] already counts that player
    cdef Py_ssize_t P = D.shape[0], T = D.shape[1], p, t
    cdef double u = 0.0, m, thr
    cdef long long N
    for t in range(T):
        if mass[t] == 0.0:
            continue
        m = INFINITY
        for p in range(P):
            if c[p] > 0 and D[p, t] < m:
                m = D[p, t]
        thr = m + tol
        if D[b, t] <= thr:
            N = 0
            for p in range(P):
                if c[p] > 0 and D[p, t] <= thr:
                    N += c[p]
            u += mass[t] / N
    return u


cdef int _witness(const double[:, ::1] D, const double[::1] mass, long long[::1] c,
                  const long long[::1] order, const long long[::1] cands,
                  double tol, double gain_tol, double* out) noexcept nogil:
    cdef Py_ssize_t i, j, a, b
    cdef double ua, ub
    for i in range(order.shape[0]):
        a = order[i]
        if c[a] <= 0:
            continue
        ua = _share_at(D, mass, c, a, tol)
        for j in range(cands.shape[0]):
            b = cands[j]
            if b == a:
                continue
            c[a] -= 1
            c[b] += 1
            ub = _share_at(D, mass, c, b, tol)
            c[a] += 1
            c[b] -= 1
            if ub - ua > gain_tol:
                out[0] = a
                out[1] = b
                out[2] = ua
                out[3] = ub
                return 1
    return 0


def position_utilities(const double[:, ::1] D, const double[::1] mass,
                       long long[::1] counts, double tol):
    cdef Py_ssize_t P = D.shape[0], a
    c = np.array(counts, dtype=np.int64)
    cdef long long[::1] cv = c
    out = np.zeros(P, dtype=np.float64)
    cdef double[::1] ov = out
    for a in range(P):
        if cv[a] > 0:
            ov[a] = _share_at(D, mass, cv, a, tol)
    return out


def deviation_utilities(const double[:, ::1] D, const double[::1] mass,
                        long long[::1] counts, Py_ssize_t a,
                        const long long[::1] cands, double tol):
    cdef Py_ssize_t j, b
    c = np.array(counts, dtype=np.int64)
    cdef long long[::1] cv = c
    out = np.empty(cands.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    if cv[a] <= 0:
        raise ValueError("no player at the deviating position")
    for j in range(cands.shape[0]):
        b = cands[j]
        if b == a:
            ov[j] = _share_at(D, mass, cv, a, tol)
            continue
        cv[a] -= 1
        cv[b] += 1
        ov[j] = _share_at(D, mass, cv, b, tol)
        cv[a] += 1
        cv[b] -= 1
    return out


def find_witness(const double[:, ::1] D, const double[::1] mass,
                 long long[::1] counts, const long long[::1] order,
                 const long long[::1] cands, double tol, double gain_tol):
    """First strictly profitable deviation as ``(a, b, u_a, u_b)`` or None."""
    cdef double out[4]
    c = np.array(counts, dtype=np.int64)
    cdef long long[::1] cv = c
    cdef int hit
    with nogil:
        hit = _witness(D, mass, cv, order, cands, tol, gain_tol, out)
    if not hit:
        return None
    return int(out[0]), int(out[1]), out[2], out[3]


def count_compositions(long long n, Py_ssize_t k):
    cdef object total = 1
    cdef long long i
    for i in range(1, k):
        total = total * (n + i) // i
    return total


def enumerate_equilibria(const double[:, ::1] D, const double[::1] mass,
                         long long n, double tol, double gain_tol):
    """All count vectors over the rows of D that admit no profitable deviation.

    Compositions are visited in lexicographically increasing order.
    """
    cdef Py_ssize_t P = D.shape[0], j
    cdef long long s
    cdef double out[4]
    cdef int hit
    c = np.zeros(P, dtype=np.int64)
    cdef long long[::1] cv = c
    idx = np.arange(P, dtype=np.int64)
    cdef const long long[::1] order = idx
    found = []
    if P == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if P == 1:
        return np.array([[n]], dtype=np.int64)
    s = 0
    cv[P - 1] = n
    while True:
        with nogil:
            hit = _witness(D, mass, cv, order, order, tol, gain_tol, out)
        if not hit:
            found.append(c.copy())
        # odometer over the free coordinates 0..P-2, last one takes the remainder
        j = P - 2
        while j >= 0:
            if s < n:
                cv[j] += 1
                s += 1
                break
            s -= cv[j]
            cv[j] = 0
            j -= 1
        if j < 0:
            break
        cv[P - 1] = n - s
    if not found:
        return np.zeros((0, P), dtype=np.int64)
    return np.array(found, dtype=np.int64)


def symmetric_utility(const double[:, ::1] Ds, const double[::1] dx,
                      const double[::1] mass, const double[::1] sigma,
                      long long n, double tol):
    """Expected share of a player fixed at ``dx`` against n-1 draws from sigma.

    Rows of ``Ds`` are the support positions; every sigma entry must be > 0.
    """
    cdef Py_ssize_t s = Ds.shape[0], T = Ds.shape[1], j, t
    cdef long long m = n - 1, rest
    cdef double total = 0.0, share, mn, thr, logw, base
    cdef long long N
    if s == 0:
        raise ValueError("empty support")
    logs = np.log(np.asarray(sigma))
    cdef double[::1] ls = logs
    c = np.zeros(s, dtype=np.int64)
    cdef long long[::1] cv = c
    base = lgamma(m + 1.0)
    with nogil:
        rest = 0
        cv[s - 1] = m
        while True:
            logw = base
            for j in range(s):
                if cv[j] > 0:
                    logw += cv[j] * ls[j] - lgamma(cv[j] + 1.0)
            share = 0.0
            for t in range(T):
                if mass[t] == 0.0:
                    continue
                mn = dx[t]
                for j in range(s):
                    if cv[j] > 0 and Ds[j, t] < mn:
                        mn = Ds[j, t]
                thr = mn + tol
                if dx[t] <= thr:
                    N = 1
                    for j in range(s):
                        if cv[j] > 0 and Ds[j, t] <= thr:
                            N += cv[j]
                    share += mass[t] / N
            total += exp(logw) * share
            if s == 1:
                break
            j = s - 2
            while j >= 0:
                if rest < m:
                    cv[j] += 1
                    rest += 1
                    break
                rest -= cv[j]
                cv[j] = 0
                j -= 1
            if j < 0:
                break
            cv[s - 1] = m - rest
    return total
