# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CRF dynamic-programming kernels.

Same contract as toxtag.crf._backend_py: forward_logz, forward_backward and
viterbi over C-contiguous float64 arrays, log-space with log-sum-exp
stabilization, double-precision accumulation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()

NAME = "cython"


cdef inline double _lse1d(double* x, Py_ssize_t C) noexcept nogil:
    cdef Py_ssize_t c
    cdef double m = -INFINITY
    cdef double s = 0.0
    for c in range(C):
        if x[c] > m:
            m = x[c]
    if m == -INFINITY:
        return -INFINITY
    for c in range(C):
        s += exp(x[c] - m)
    return m + log(s)


def forward_logz(double[:, ::1] E, double[:, ::1] T):
    """Log of the partition function by the forward recursion."""
    cdef Py_ssize_t n = E.shape[0]
    cdef Py_ssize_t C = E.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_arr = np.empty(C)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work_arr = np.empty(C)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] next_arr = np.empty(C)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] work = work_arr
    cdef double[::1] nxt = next_arr
    cdef Py_ssize_t i, c, cp
    with nogil:
        for c in range(C):
            alpha[c] = E[0, c]
        for i in range(1, n):
            for c in range(C):
                for cp in range(C):
                    work[cp] = alpha[cp] + T[cp, c]
                nxt[c] = E[i, c] + _lse1d(&work[0], C)
            for c in range(C):
                alpha[c] = nxt[c]
    return float(_lse1d(&alpha[0], C))


def forward_backward(double[:, ::1] E, double[:, ::1] T):
    """Returns (logz, marginals (n,C), pairwise totals (C,C), beta (n,C))."""
    cdef Py_ssize_t n = E.shape[0]
    cdef Py_ssize_t C = E.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] alpha_arr = np.empty((n, C))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] beta_arr = np.zeros((n, C))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] marg_arr = np.empty((n, C))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pair_arr = np.zeros((C, C))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work_arr = np.empty(C)
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[:, ::1] marg = marg_arr
    cdef double[:, ::1] pair = pair_arr
    cdef double[::1] work = work_arr
    cdef Py_ssize_t i, c, cp
    cdef double logz

    with nogil:
        for c in range(C):
            alpha[0, c] = E[0, c]
        for i in range(1, n):
            for c in range(C):
                for cp in range(C):
                    work[cp] = alpha[i - 1, cp] + T[cp, c]
                alpha[i, c] = E[i, c] + _lse1d(&work[0], C)
        logz = _lse1d(&alpha[n - 1, 0], C)

        for i in range(n - 2, -1, -1):
            for c in range(C):
                for cp in range(C):
                    work[cp] = T[c, cp] + E[i + 1, cp] + beta[i + 1, cp]
                beta[i, c] = _lse1d(&work[0], C)

        for i in range(n):
            for c in range(C):
                marg[i, c] = exp(alpha[i, c] + beta[i, c] - logz)
        for i in range(n - 1):
            for c in range(C):
                for cp in range(C):
                    pair[c, cp] += exp(
                        alpha[i, c] + T[c, cp] + E[i + 1, cp]
                        + beta[i + 1, cp] - logz
                    )
    return float(logz), marg_arr, pair_arr, beta_arr


def viterbi(double[:, ::1] E, double[:, ::1] T):
    """Maximum-score label sequence; ties resolved toward the lowest label
    index (strict improvement required to replace the running best)."""
    cdef Py_ssize_t n = E.shape[0]
    cdef Py_ssize_t C = E.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] back_arr = np.zeros((n, C), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] delta_arr = np.empty(C)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] next_arr = np.empty(C)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] path_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] back = back_arr
    cdef double[::1] delta = delta_arr
    cdef double[::1] nxt = next_arr
    cdef cnp.int64_t[::1] path = path_arr
    cdef Py_ssize_t i, c, cp
    cdef double best, cand
    cdef Py_ssize_t best_idx

    with nogil:
        for c in range(C):
            delta[c] = E[0, c]
        for i in range(1, n):
            for c in range(C):
                best = -INFINITY
                best_idx = 0
                for cp in range(C):
                    cand = delta[cp] + T[cp, c]
                    if cand > best:
                        best = cand
                        best_idx = cp
                nxt[c] = E[i, c] + best
                back[i, c] = best_idx
            for c in range(C):
                delta[c] = nxt[c]
        best = -INFINITY
        best_idx = 0
        for c in range(C):
            if delta[c] > best:
                best = delta[c]
                best_idx = c
        path[n - 1] = best_idx
        for i in range(n - 1, 0, -1):
            path[i - 1] = back[i, path[i]]
    return path_arr
