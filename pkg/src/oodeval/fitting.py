"""Two-component models of a score sample: 1-D k-means, GMM via EM, and
unilateral density estimation (UDE) against a validation-set Gaussian.

All fits are deterministic functions of their inputs. Components are
normalized so the higher-mean one is reported as IND (scores are
higher-is-IND). Collapsed fits carry ``degenerate=True`` and map to
Gscore 0 downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InputError
from .scores import ScoreSet

# Lower bound on fitted standard deviations; prevents EM collapse on
# repeated values and is negligible at the (0, 1)-ish scale of OOD scores.
SIGMA_FLOOR = 1e-6

KMEANS_MAX_ITER = 300
GMM_TOL = 1e-8
GMM_MAX_ITER = 200

# Validation-set size that keeps UDE effective even on suites with
# varied IND:OOD ratios; smaller sets suffice for balanced suites.
DEFAULT_VAL_SIZE = 3000


@dataclass(frozen=True)
class GaussianParams:
    """Mean and standard deviation of a single Gaussian, in score units."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise InputError("Gaussian parameters must be finite")
        if self.sigma < SIGMA_FLOOR:
            object.__setattr__(self, "sigma", SIGMA_FLOOR)


@dataclass(frozen=True)
class TwoComponentFit:
    """Fitted IND/OOD components. Sigmas are None for k-means fits."""

    method: str
    mu_ind: float
    mu_ood: float
    sigma_ind: float | None
    sigma_ood: float | None
    weight_ind: float
    degenerate: bool = False
    empty_side: str | None = None
    n_iter: int = 0
    loglik_trace: tuple[float, ...] = ()
    sse_trace: tuple[float, ...] = ()

    @property
    def has_sigmas(self) -> bool:
        return self.sigma_ind is not None and self.sigma_ood is not None


def _scores_array(scores) -> np.ndarray:
    if isinstance(scores, ScoreSet):
        return scores.scores
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError("scores must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InputError("scores contain non-finite values")
    return arr


def _floored_std(x: np.ndarray) -> float:
    if x.size < 2:
        return SIGMA_FLOOR
    return max(float(np.std(x, ddof=1)), SIGMA_FLOOR)


def _kmeans_core(xs: np.ndarray):
    """Exact-split init plus Lloyd polish on sorted scores.

    In 1-D the 2-means optimum is a contiguous split of the sorted data,
    so starting Lloyd at the best-split centroids reaches the global
    optimum at the assignment fixpoint.
    """
    _, mean_lo, mean_hi, _ = _backend.best_split2(xs)
    return _backend.lloyd2(xs, mean_lo, mean_hi, KMEANS_MAX_ITER)


def fit_kmeans2(scores, seed: int = 0) -> TwoComponentFit:
    """Two-centroid k-means on 1-D scores.

    Deterministic and globally optimal in SSE (see _kmeans_core); ``seed``
    is accepted for interface stability but never affects the result.
    """
    x = _scores_array(scores)
    if x.size < 2:
        raise InputError("k-means needs at least two samples")
    xs = np.sort(x)
    if xs[0] == xs[-1]:
        c = float(xs[0])
        return TwoComponentFit(
            method="kmeans", mu_ind=c, mu_ood=c, sigma_ind=None, sigma_ood=None,
            weight_ind=0.5, degenerate=True, sse_trace=(0.0,),
        )
    c_lo, c_hi, n_lo, sse_trace, n_iter = _kmeans_core(xs)
    return TwoComponentFit(
        method="kmeans",
        mu_ind=float(c_hi),
        mu_ood=float(c_lo),
        sigma_ind=None,
        sigma_ood=None,
        weight_ind=(xs.size - n_lo) / xs.size,
        n_iter=n_iter,
        sse_trace=tuple(sse_trace),
    )


def fit_gmm2(
    scores, seed: int = 0, tol: float = GMM_TOL, max_iter: int = GMM_MAX_ITER
) -> TwoComponentFit:
    """Two-component 1-D Gaussian mixture via EM.

    Initialized from the k-means split (per-cluster means and empirical
    sigmas); stops when the relative log-likelihood improvement drops
    below ``tol`` or after ``max_iter`` steps. Variances are floored at
    SIGMA_FLOOR**2 and components relabeled so mu_ind >= mu_ood.
    """
    x = _scores_array(scores)
    if x.size < 4:
        raise InputError("GMM needs at least four samples")
    xs = np.sort(x)
    if xs[0] == xs[-1]:
        c = float(xs[0])
        return TwoComponentFit(
            method="gmm", mu_ind=c, mu_ood=c, sigma_ind=SIGMA_FLOOR, sigma_ood=SIGMA_FLOOR,
            weight_ind=0.5, degenerate=True,
        )
    c_lo, c_hi, n_lo, _, _ = _kmeans_core(xs)
    sd_lo = max(float(np.std(xs[:n_lo])), SIGMA_FLOOR)
    sd_hi = max(float(np.std(xs[n_lo:])), SIGMA_FLOOR)
    w_lo, mu_lo, sd_lo, w_hi, mu_hi, sd_hi, ll_trace, n_iter, died = _backend.gmm2_em(
        xs, n_lo / xs.size, c_lo, sd_lo, 1.0 - n_lo / xs.size, c_hi, sd_hi,
        tol, max_iter, SIGMA_FLOOR,
    )
    if mu_hi >= mu_lo:
        ind, ood, w_ind = (mu_hi, sd_hi), (mu_lo, sd_lo), w_hi
    else:
        ind, ood, w_ind = (mu_lo, sd_lo), (mu_hi, sd_hi), w_lo
    return TwoComponentFit(
        method="gmm",
        mu_ind=ind[0],
        mu_ood=ood[0],
        sigma_ind=ind[1],
        sigma_ood=ood[1],
        weight_ind=float(w_ind),
        degenerate=bool(died),
        n_iter=n_iter,
        loglik_trace=tuple(ll_trace),
    )


def fit_val_gaussian(val_scores) -> GaussianParams:
    """Single Gaussian over validation IND scores (mean, sd with n-1)."""
    x = _scores_array(val_scores)
    if x.size < 2:
        raise InputError("validation fit needs at least two samples")
    return GaussianParams(mu=float(np.mean(x)), sigma=_floored_std(x))


def ude_membership(x, val: GaussianParams):
    """Membership of x under the validation Gaussian: exp(-(x-mu)^2 / (2 sigma^2)).

    Equals 1 at the validation mean and decays toward 0; accepts scalars
    or arrays.
    """
    z = (np.asarray(x, dtype=np.float64) - val.mu) / val.sigma
    out = np.exp(-0.5 * z * z)
    return float(out) if np.isscalar(x) or out.ndim == 0 else out


def ude_lower_bound(val: GaussianParams, tau: float) -> float:
    """Score below which a sample leaves the IND subset at threshold tau.

    The cut sits where membership crosses 1 - tau on the low side of the
    validation mean, so tau close to 1 keeps nearly all of the validation
    distribution: tau = 0.99 cuts about 3 sigma below the mean.
    """
    if not 0.0 < tau < 1.0:
        raise InputError("tau must lie in (0, 1)")
    return val.mu - val.sigma * math.sqrt(2.0 * math.log(1.0 / (1.0 - tau)))


def fit_ude(scores, val: GaussianParams, tau: float) -> TwoComponentFit:
    """Unilateral density estimation against a validation-set Gaussian.

    Splits the sample at :func:`ude_lower_bound` — samples at or above the
    bound form the IND subset (anything above the validation mean always
    qualifies; only the low-score lobe is cut) — then fits one Gaussian
    per subset. An empty subset yields a degenerate fit with the missing
    side copied from ``val`` (IND side) or from a full-sample fit (OOD
    side), marked via ``empty_side``.
    """
    x = _scores_array(scores)
    bound = ude_lower_bound(val, tau)
    ind_mask = x >= bound
    n_ind = int(ind_mask.sum())
    if n_ind == x.size:
        full = x
        return TwoComponentFit(
            method="ude",
            mu_ind=float(np.mean(x)), sigma_ind=_floored_std(x),
            mu_ood=float(np.mean(full)), sigma_ood=_floored_std(full),
            weight_ind=1.0, degenerate=True, empty_side="ood",
        )
    if n_ind == 0:
        return TwoComponentFit(
            method="ude",
            mu_ind=val.mu, sigma_ind=val.sigma,
            mu_ood=float(np.mean(x)), sigma_ood=_floored_std(x),
            weight_ind=0.0, degenerate=True, empty_side="ind",
        )
    ind = x[ind_mask]
    ood = x[~ind_mask]
    return TwoComponentFit(
        method="ude",
        mu_ind=float(np.mean(ind)), sigma_ind=_floored_std(ind),
        mu_ood=float(np.mean(ood)), sigma_ood=_floored_std(ood),
        weight_ind=n_ind / x.size,
    )
