# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Pure-Python twins live in ``_kernels_py.py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def kmeans_dp(x, w, Py_ssize_t k):
    cdef const cnp.float64_t[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const cnp.float64_t[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0]
    # Prefix sums are computed with numpy so both backends share them bit for bit.
    W_arr = np.concatenate(([0.0], np.cumsum(np.asarray(wv))))
    S1_arr = np.concatenate(([0.0], np.cumsum(np.asarray(wv) * np.asarray(xv))))
    S2_arr = np.concatenate(([0.0], np.cumsum(np.asarray(wv) * np.asarray(xv) * np.asarray(xv))))
    cdef cnp.float64_t[::1] W = W_arr
    cdef cnp.float64_t[::1] S1 = S1_arr
    cdef cnp.float64_t[::1] S2 = S2_arr

    D_arr = np.empty((k, m), dtype=np.float64)
    B_arr = np.zeros((k, m), dtype=np.int64)
    cdef cnp.float64_t[:, ::1] D = D_arr
    cdef cnp.int64_t[:, ::1] B = B_arr
    cdef Py_ssize_t c, i, j, bj
    cdef double s1, cost, best

    for i in range(m):
        s1 = S1[i + 1] - S1[0]
        D[0, i] = (S2[i + 1] - S2[0]) - s1 * s1 / (W[i + 1] - W[0])
    for c in range(1, k):
        for i in range(c, m):
            best = 0.0
            bj = -1
            for j in range(c, i + 1):
                s1 = S1[i + 1] - S1[j]
                cost = D[c - 1, j - 1] + ((S2[i + 1] - S2[j]) - s1 * s1 / (W[i + 1] - W[j]))
                if bj < 0 or cost < best:
                    best = cost
                    bj = j
            D[c, i] = best
            B[c, i] = bj

    starts = np.zeros(k, dtype=np.int64)
    cdef Py_ssize_t end = m - 1
    for c in range(k - 1, 0, -1):
        starts[c] = B[c, end]
        end = starts[c] - 1
    return starts


def family_counts(data, Py_ssize_t child, parents, cards):
    cdef const cnp.int64_t[:, :] dv = np.asarray(data, dtype=np.int64)
    cdef Py_ssize_t n = dv.shape[0]
    cdef Py_ssize_t npar = len(parents)
    cdef cnp.int64_t[::1] pidx = np.asarray(parents, dtype=np.int64).reshape(-1)
    cdef cnp.int64_t[::1] pcard = np.asarray([cards[p] for p in parents], dtype=np.int64).reshape(-1)
    cdef Py_ssize_t r = cards[child]
    cdef Py_ssize_t q = 1
    cdef Py_ssize_t t
    for t in range(npar):
        q *= pcard[t]
    counts_arr = np.zeros((q, r), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    cdef Py_ssize_t row, cfg, used = 0
    cdef cnp.int64_t v, cv
    cdef bint ok
    for row in range(n):
        cv = dv[row, child]
        if cv < 0:
            continue
        cfg = 0
        ok = True
        for t in range(npar):
            v = dv[row, pidx[t]]
            if v < 0:
                ok = False
                break
            cfg = cfg * pcard[t] + v
        if not ok:
            continue
        counts[cfg, cv] += 1
        used += 1
    return counts_arr, int(used)
