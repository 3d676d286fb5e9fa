# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled oracle construction kernel.

Mirrors oracle_py.build_oracle_arrays exactly; only the inner distance loops
are lowered to C. Keep the two implementations in sync.
"""

from libc.math cimport sqrt, INFINITY

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef int MODE_EUCLIDEAN = 0
cdef int MODE_ONE_MINUS_DOT = 1
cdef int MODE_DISCRETE = 2


cdef inline double _distance(const double[:, ::1] f, Py_ssize_t a, Py_ssize_t b,
                             int mode) noexcept nogil:
    cdef Py_ssize_t j, d = f.shape[1]
    cdef double acc = 0.0, diff
    if mode == MODE_EUCLIDEAN:
        for j in range(d):
            diff = f[a, j] - f[b, j]
            acc += diff * diff
        return sqrt(acc)
    if mode == MODE_ONE_MINUS_DOT:
        for j in range(d):
            acc += f[a, j] * f[b, j]
        return 1.0 - acc
    for j in range(d):
        if f[a, j] != f[b, j]:
            return 1.0
    return 0.0


cdef long _len_common_suffix(Py_ssize_t p1, Py_ssize_t p2,
                             const long long[::1] sfx,
                             const long long[::1] lrs) noexcept nogil:
    if p2 == sfx[p1]:
        return <long>lrs[p1]
    while sfx[p2] != sfx[p1] and p2 != 0:
        p2 = <Py_ssize_t>sfx[p2]
    if sfx[p2] == sfx[p1]:
        return <long>min(lrs[p1], lrs[p2])
    return 0


def build_oracle_arrays(features, int mode, double theta):
    """See oracle_py.build_oracle_arrays."""
    cdef cnp.ndarray feat = np.ascontiguousarray(features, dtype=np.float64)
    cdef const double[:, ::1] f = feat
    cdef Py_ssize_t n = f.shape[0]
    cdef cnp.ndarray sfx_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray lrs_arr = np.zeros(n + 1, dtype=np.int64)
    cdef long long[::1] sfx = sfx_arr
    cdef long long[::1] lrs = lrs_arr
    cdef list transitions = [[] for _ in range(n + 1)]

    cdef Py_ssize_t i, k, pi_1, target, best
    cdef long length, verified
    cdef double d, best_dist
    cdef bint found
    cdef list trn_k

    sfx[0] = -1
    for i in range(1, n + 1):
        (<list>transitions[i - 1]).append(i)
        pi_1 = i - 1
        k = <Py_ssize_t>sfx[i - 1]
        best = -1
        best_dist = INFINITY
        while k >= 0:
            found = False
            trn_k = <list>transitions[k]
            for target in trn_k:
                d = _distance(f, target - 1, i - 1, mode)
                if d <= theta:
                    found = True
                    if d < best_dist:
                        best_dist = d
                        best = target
            if found:
                break
            trn_k.append(i)
            pi_1 = k
            k = <Py_ssize_t>sfx[k]
        if k < 0:
            sfx[i] = 0
            lrs[i] = 0
        else:
            sfx[i] = best
            length = _len_common_suffix(pi_1, best - 1, sfx, lrs) + 1
            verified = 1
            while (verified < length
                   and best - 1 - verified >= 0
                   and i - 1 - verified >= 0
                   and _distance(f, i - 1 - verified,
                                 best - 1 - verified, mode) <= theta):
                verified += 1
            lrs[i] = verified
    return transitions, sfx_arr, lrs_arr
