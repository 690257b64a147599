"""Pure-numpy implementations of the hot fitting kernels.

Selected by :mod:`oodeval._backend` when the compiled extension is not
available (or when forced via OODEVAL_BACKEND=python). Semantics must
match :mod:`oodeval._kernels` exactly; only speed differs.
"""

from __future__ import annotations

import math

import numpy as np

_LOG_2PI = math.log(2.0 * math.pi)


def best_split2(xs: np.ndarray):
    """Exact 1-D 2-means over a sorted array via the contiguous-split scan.

    Returns (k, mean_lo, mean_hi, sse) where k is the size of the low
    cluster, 1 <= k <= n-1; ties resolve to the smallest k.
    """
    n = xs.size
    csum = np.cumsum(xs)
    csq = np.cumsum(xs * xs)
    total, totsq = csum[-1], csq[-1]
    k = np.arange(1, n, dtype=np.float64)
    lo_sum = csum[:-1]
    lo_sq = csq[:-1]
    mean_lo = lo_sum / k
    mean_hi = (total - lo_sum) / (n - k)
    sse = (lo_sq - lo_sum * mean_lo) + (totsq - lo_sq - (total - lo_sum) * mean_hi)
    i = int(np.argmin(sse))
    return i + 1, float(mean_lo[i]), float(mean_hi[i]), max(float(sse[i]), 0.0)


def lloyd2(xs: np.ndarray, c_lo: float, c_hi: float, max_iter: int):
    """Lloyd iteration for two centroids on sorted 1-D data.

    A point goes to the low cluster iff x <= midpoint(c_lo, c_hi); the
    boundary index is clamped to keep both clusters non-empty. Returns
    (c_lo, c_hi, n_lo, sse_trace, n_iter) with one SSE entry per centroid
    update; stops at the assignment fixpoint.
    """
    n = xs.size
    csum = np.concatenate([[0.0], np.cumsum(xs)])
    csq = np.concatenate([[0.0], np.cumsum(xs * xs)])
    sse_trace: list[float] = []
    k_prev = -1
    n_lo = max(1, min(n - 1, int(np.searchsorted(xs, 0.5 * (c_lo + c_hi), side="right"))))
    n_iter = 0
    for _ in range(max_iter):
        if n_lo == k_prev:
            break
        k_prev = n_lo
        c_lo = csum[n_lo] / n_lo
        c_hi = (csum[n] - csum[n_lo]) / (n - n_lo)
        sse = (csq[n_lo] - n_lo * c_lo * c_lo) + (csq[n] - csq[n_lo] - (n - n_lo) * c_hi * c_hi)
        sse_trace.append(max(float(sse), 0.0))
        n_iter += 1
        n_lo = max(1, min(n - 1, int(np.searchsorted(xs, 0.5 * (c_lo + c_hi), side="right"))))
    return float(c_lo), float(c_hi), k_prev, sse_trace, n_iter


def _estep(x, w_lo, mu_lo, sd_lo, w_hi, mu_hi, sd_hi):
    a_lo = math.log(w_lo) - math.log(sd_lo) - 0.5 * ((x - mu_lo) / sd_lo) ** 2
    a_hi = math.log(w_hi) - math.log(sd_hi) - 0.5 * ((x - mu_hi) / sd_hi) ** 2
    top = np.maximum(a_lo, a_hi)
    lse = top + np.log(np.exp(a_lo - top) + np.exp(a_hi - top))
    ll = float(lse.sum()) - 0.5 * x.size * _LOG_2PI
    return ll, np.exp(a_lo - lse), np.exp(a_hi - lse)


def gmm2_em(
    x: np.ndarray,
    w_lo: float,
    mu_lo: float,
    sd_lo: float,
    w_hi: float,
    mu_hi: float,
    sd_hi: float,
    tol: float,
    max_iter: int,
    sd_floor: float,
):
    """EM for a two-component 1-D Gaussian mixture.

    Responsibilities are computed in log space; variances are floored at
    sd_floor**2. Returns (w_lo, mu_lo, sd_lo, w_hi, mu_hi, sd_hi,
    ll_trace, n_iter, died). ll_trace[0] is the log-likelihood of the
    initial parameters, with one more entry per EM step; iteration stops
    when |ll_t - ll_{t-1}| <= tol * max(1, |ll_t|). ``died`` flags a
    component whose responsibility mass collapsed.
    """
    n = x.size
    var_floor = sd_floor * sd_floor
    ll, r_lo, r_hi = _estep(x, w_lo, mu_lo, sd_lo, w_hi, mu_hi, sd_hi)
    ll_trace = [ll]
    died = False
    n_iter = 0
    for _ in range(max_iter):
        n_lo = float(r_lo.sum())
        n_hi = float(r_hi.sum())
        if n_lo < 1e-10 or n_hi < 1e-10:
            died = True
            break
        mu_lo = float((r_lo * x).sum()) / n_lo
        mu_hi = float((r_hi * x).sum()) / n_hi
        sd_lo = math.sqrt(max(float((r_lo * (x - mu_lo) ** 2).sum()) / n_lo, var_floor))
        sd_hi = math.sqrt(max(float((r_hi * (x - mu_hi) ** 2).sum()) / n_hi, var_floor))
        w_lo = n_lo / n
        w_hi = n_hi / n
        ll_new, r_lo, r_hi = _estep(x, w_lo, mu_lo, sd_lo, w_hi, mu_hi, sd_hi)
        n_iter += 1
        ll_trace.append(ll_new)
        converged = abs(ll_new - ll) <= tol * max(1.0, abs(ll_new))
        ll = ll_new
        if converged:
            break
    return w_lo, mu_lo, sd_lo, w_hi, mu_hi, sd_hi, ll_trace, n_iter, died
