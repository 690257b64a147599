# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the fitting kernels in _kernels_py.

Same contracts, same stopping rules and update order; only speed differs.
"""

from libc.math cimport exp, fabs, log, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double _LOG_2PI = 1.8378770664093453


def best_split2(cnp.ndarray[cnp.float64_t, ndim=1] xs):
    """Exact 1-D 2-means over a sorted array via the contiguous-split scan."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] csum = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] csq = np.empty(n, dtype=np.float64)
    cdef double acc = 0.0, acc2 = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc += xs[i]
        acc2 += xs[i] * xs[i]
        csum[i] = acc
        csq[i] = acc2
    cdef double total = csum[n - 1], totsq = csq[n - 1]
    cdef double best_sse = -1.0, best_lo = 0.0, best_hi = 0.0
    cdef Py_ssize_t best_k = 1
    cdef double mean_lo, mean_hi, sse
    for i in range(1, n):
        mean_lo = csum[i - 1] / i
        mean_hi = (total - csum[i - 1]) / (n - i)
        sse = (csq[i - 1] - csum[i - 1] * mean_lo) + (
            totsq - csq[i - 1] - (total - csum[i - 1]) * mean_hi
        )
        if best_sse < 0.0 or sse < best_sse:
            best_sse = sse
            best_k = i
            best_lo = mean_lo
            best_hi = mean_hi
    if best_sse < 0.0:
        best_sse = 0.0
    return best_k, best_lo, best_hi, best_sse


cdef Py_ssize_t _upper_index(cnp.float64_t[:] xs, double value) nogil:
    # Number of elements <= value in sorted xs (searchsorted side="right").
    cdef Py_ssize_t lo = 0, hi = xs.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if xs[mid] <= value:
            lo = mid + 1
        else:
            hi = mid
    return lo


def lloyd2(cnp.ndarray[cnp.float64_t, ndim=1] xs, double c_lo, double c_hi, int max_iter):
    """Lloyd iteration for two centroids on sorted 1-D data."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] csum = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] csq = np.empty(n + 1, dtype=np.float64)
    cdef double acc = 0.0, acc2 = 0.0
    cdef Py_ssize_t i
    csum[0] = 0.0
    csq[0] = 0.0
    for i in range(n):
        acc += xs[i]
        acc2 += xs[i] * xs[i]
        csum[i + 1] = acc
        csq[i + 1] = acc2
    sse_trace = []
    cdef Py_ssize_t k_prev = -1, n_lo
    cdef int n_iter = 0, it
    cdef double sse
    n_lo = _upper_index(xs, 0.5 * (c_lo + c_hi))
    if n_lo < 1:
        n_lo = 1
    elif n_lo > n - 1:
        n_lo = n - 1
    for it in range(max_iter):
        if n_lo == k_prev:
            break
        k_prev = n_lo
        c_lo = csum[n_lo] / n_lo
        c_hi = (csum[n] - csum[n_lo]) / (n - n_lo)
        sse = (csq[n_lo] - n_lo * c_lo * c_lo) + (
            csq[n] - csq[n_lo] - (n - n_lo) * c_hi * c_hi
        )
        if sse < 0.0:
            sse = 0.0
        sse_trace.append(sse)
        n_iter += 1
        n_lo = _upper_index(xs, 0.5 * (c_lo + c_hi))
        if n_lo < 1:
            n_lo = 1
        elif n_lo > n - 1:
            n_lo = n - 1
    return c_lo, c_hi, k_prev, sse_trace, n_iter


def gmm2_em(
    cnp.ndarray[cnp.float64_t, ndim=1] x,
    double w_lo,
    double mu_lo,
    double sd_lo,
    double w_hi,
    double mu_hi,
    double sd_hi,
    double tol,
    int max_iter,
    double sd_floor,
):
    """EM for a two-component 1-D Gaussian mixture (log-space E-step)."""
    cdef Py_ssize_t n = x.shape[0], i
    cdef double var_floor = sd_floor * sd_floor
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_lo = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_hi = np.empty(n, dtype=np.float64)
    cdef double a_lo, a_hi, top, lse, z
    cdef double ll, ll_new, n_lo, n_hi, s, v
    cdef int n_iter = 0, it
    cdef bint died = False

    cdef double lw_lo = log(w_lo) - log(sd_lo)
    cdef double lw_hi = log(w_hi) - log(sd_hi)
    ll = 0.0
    for i in range(n):
        z = (x[i] - mu_lo) / sd_lo
        a_lo = lw_lo - 0.5 * z * z
        z = (x[i] - mu_hi) / sd_hi
        a_hi = lw_hi - 0.5 * z * z
        top = a_lo if a_lo > a_hi else a_hi
        lse = top + log(exp(a_lo - top) + exp(a_hi - top))
        ll += lse
        r_lo[i] = exp(a_lo - lse)
        r_hi[i] = exp(a_hi - lse)
    ll -= 0.5 * n * _LOG_2PI
    ll_trace = [ll]

    for it in range(max_iter):
        n_lo = 0.0
        n_hi = 0.0
        for i in range(n):
            n_lo += r_lo[i]
            n_hi += r_hi[i]
        if n_lo < 1e-10 or n_hi < 1e-10:
            died = True
            break
        s = 0.0
        for i in range(n):
            s += r_lo[i] * x[i]
        mu_lo = s / n_lo
        s = 0.0
        for i in range(n):
            s += r_hi[i] * x[i]
        mu_hi = s / n_hi
        v = 0.0
        for i in range(n):
            z = x[i] - mu_lo
            v += r_lo[i] * z * z
        v /= n_lo
        sd_lo = sqrt(v if v > var_floor else var_floor)
        v = 0.0
        for i in range(n):
            z = x[i] - mu_hi
            v += r_hi[i] * z * z
        v /= n_hi
        sd_hi = sqrt(v if v > var_floor else var_floor)
        w_lo = n_lo / n
        w_hi = n_hi / n

        lw_lo = log(w_lo) - log(sd_lo)
        lw_hi = log(w_hi) - log(sd_hi)
        ll_new = 0.0
        for i in range(n):
            z = (x[i] - mu_lo) / sd_lo
            a_lo = lw_lo - 0.5 * z * z
            z = (x[i] - mu_hi) / sd_hi
            a_hi = lw_hi - 0.5 * z * z
            top = a_lo if a_lo > a_hi else a_hi
            lse = top + log(exp(a_lo - top) + exp(a_hi - top))
            ll_new += lse
            r_lo[i] = exp(a_lo - lse)
            r_hi[i] = exp(a_hi - lse)
        ll_new -= 0.5 * n * _LOG_2PI
        n_iter += 1
        ll_trace.append(ll_new)
        if fabs(ll_new - ll) <= tol * (1.0 if fabs(ll_new) < 1.0 else fabs(ll_new)):
            ll = ll_new
            break
        ll = ll_new
    return w_lo, mu_lo, sd_lo, w_hi, mu_hi, sd_hi, ll_trace, n_iter, died
