# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled resampling kernels: per-replicate means and covariances.

These are the inner loops of the bootstrap engines; the tight C loops
avoid the large centered temporaries the batched-numpy fallback has to
materialize.  Interfaces mirror corrtest._backend._fallback exactly.
"""

import numpy as np


def batch_mean_cov(double[:, :, ::1] y):
    """Means and sample covariances (divisor n-1) of B replicate samples
    given as a (B, n, q) array.  Returns (means (B, q), covs (B, q, q))."""
    cdef Py_ssize_t nb = y.shape[0], n = y.shape[1], q = y.shape[2]
    means_arr = np.empty((nb, q))
    covs_arr = np.zeros((nb, q, q))
    buf_arr = np.empty(q)
    cdef double[:, ::1] means = means_arr
    cdef double[:, :, ::1] covs = covs_arr
    cdef double[::1] c = buf_arr
    cdef Py_ssize_t b, k, j, l
    cdef double s, denom = n - 1
    for b in range(nb):
        for j in range(q):
            s = 0.0
            for k in range(n):
                s += y[b, k, j]
            means[b, j] = s / n
        for k in range(n):
            for j in range(q):
                c[j] = y[b, k, j] - means[b, j]
            for j in range(q):
                for l in range(j, q):
                    covs[b, j, l] += c[j] * c[l]
        for j in range(q):
            for l in range(j, q):
                covs[b, j, l] /= denom
                covs[b, l, j] = covs[b, j, l]
    return means_arr, covs_arr


def wild_mean_cov(double[:, ::1] base, double[:, ::1] w):
    """Means and sample covariances (divisor n-1) of weight-perturbed
    rows: replicate b consists of the rows w[b, k] * base[k]."""
    cdef Py_ssize_t n = base.shape[0], q = base.shape[1], nb = w.shape[0]
    means_arr = np.empty((nb, q))
    covs_arr = np.zeros((nb, q, q))
    buf_arr = np.empty(q)
    cdef double[:, ::1] means = means_arr
    cdef double[:, :, ::1] covs = covs_arr
    cdef double[::1] c = buf_arr
    cdef Py_ssize_t b, k, j, l
    cdef double s, wk, denom = n - 1
    for b in range(nb):
        for j in range(q):
            s = 0.0
            for k in range(n):
                s += w[b, k] * base[k, j]
            means[b, j] = s / n
        for k in range(n):
            wk = w[b, k]
            for j in range(q):
                c[j] = wk * base[k, j] - means[b, j]
            for j in range(q):
                for l in range(j, q):
                    covs[b, j, l] += c[j] * c[l]
        for j in range(q):
            for l in range(j, q):
                covs[b, j, l] /= denom
                covs[b, l, j] = covs[b, j, l]
    return means_arr, covs_arr
