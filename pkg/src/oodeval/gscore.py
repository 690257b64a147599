"""Scalar separability of a two-component fit, and the one-call pipeline
from a raw score sample to a Gscore.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .fitting import (
    GaussianParams,
    TwoComponentFit,
    fit_gmm2,
    fit_kmeans2,
    fit_ude,
)

METHODS = ("kmeans", "gmm", "ude")
DISTANCES = ("l2", "kl", "kl-rev", "wasserstein")


@dataclass(frozen=True)
class GscoreConfig:
    """How to turn a score sample into a Gscore.

    ``kl`` compares IND against OOD; ``kl-rev`` swaps the roles. k-means
    produces no sigmas, so it pairs only with l2. ``tau`` is the UDE
    split threshold (carried, but unused, for the other methods).
    """

    method: str
    distance: str
    tau: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.distance not in DISTANCES:
            raise ConfigError(f"unknown distance {self.distance!r}")
        if self.method == "kmeans" and self.distance != "l2":
            raise ConfigError("kmeans fits have no sigmas; only l2 applies")


def l2_distance(fit: TwoComponentFit) -> float:
    """Absolute gap between the component means."""
    return abs(fit.mu_ind - fit.mu_ood)


def kl_distance(fit: TwoComponentFit, direction: str = "ind_ood") -> float:
    """Gaussian KL-divergence-based distance between the components.

    Computed as log(s1/s2) + (s2^2 + (m1-m2)^2) / (2 s1^2) - 1/2 with
    (m1, s1) the IND component for direction ``ind_ood`` and the OOD
    component for ``ood_ind``.
    """
    if not fit.has_sigmas:
        raise ConfigError("KL distance needs sigmas (gmm or ude fit)")
    if direction == "ind_ood":
        m1, s1, m2, s2 = fit.mu_ind, fit.sigma_ind, fit.mu_ood, fit.sigma_ood
    elif direction == "ood_ind":
        m1, s1, m2, s2 = fit.mu_ood, fit.sigma_ood, fit.mu_ind, fit.sigma_ind
    else:
        raise ConfigError(f"unknown KL direction {direction!r}")
    return math.log(s1 / s2) + (s2 * s2 + (m1 - m2) ** 2) / (2.0 * s1 * s1) - 0.5


def wasserstein_distance(fit: TwoComponentFit) -> float:
    """Squared-form Wasserstein distance (mu gap squared plus sigma gap squared)."""
    if not fit.has_sigmas:
        raise ConfigError("Wasserstein distance needs sigmas (gmm or ude fit)")
    return (fit.mu_ind - fit.mu_ood) ** 2 + (fit.sigma_ind - fit.sigma_ood) ** 2


def distance_from_fit(fit: TwoComponentFit, distance: str) -> float:
    if distance == "l2":
        return l2_distance(fit)
    if distance == "kl":
        return kl_distance(fit, "ind_ood")
    if distance == "kl-rev":
        return kl_distance(fit, "ood_ind")
    if distance == "wasserstein":
        return wasserstein_distance(fit)
    raise ConfigError(f"unknown distance {distance!r}")


def fit_components(scores, val: GaussianParams | None, cfg: GscoreConfig) -> TwoComponentFit:
    """Fit the two-component model selected by ``cfg``."""
    if cfg.method == "kmeans":
        return fit_kmeans2(scores, seed=cfg.seed)
    if cfg.method == "gmm":
        return fit_gmm2(scores, seed=cfg.seed)
    if val is None:
        raise ConfigError("UDE needs validation-set Gaussian parameters")
    return fit_ude(scores, val, cfg.tau)


def compute_gscore_fit(
    scores, val: GaussianParams | None, cfg: GscoreConfig
) -> tuple[float, TwoComponentFit]:
    """Gscore plus the underlying fit (for degeneracy reporting)."""
    fit = fit_components(scores, val, cfg)
    if fit.degenerate:
        return 0.0, fit
    return distance_from_fit(fit, cfg.distance), fit


def compute_gscore(scores, val: GaussianParams | None, cfg: GscoreConfig) -> float:
    """Dispatch fit per cfg.method, then distance per cfg.distance.

    Degenerate fits yield Gscore 0.
    """
    return compute_gscore_fit(scores, val, cfg)[0]
