"""Linear discriminant analysis on the (midpoint, log-range) interval model.

Each K-interval observation is recoded as z = (c_1..c_K, r*_1..r*_K) with
c = (l+u)/2 and r* = ln(u-l), and a shared-covariance Gaussian model is fit
per class. Four covariance structures are tried:

  1. unrestricted;
  2. features independent of each other, keeping only the 2x2 block that
     couples c_j with its own r*_j;
  3. midpoints and log-ranges mutually uncorrelated (two full blocks);
  4. fully diagonal.

Each structure's pooled covariance is the zero-patterned sample covariance
(the exact MLE for these decomposable patterns); the structure with the
lowest BIC wins. Degenerate intervals are rejected because their log-range
is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInterval, InvalidParameter, SingularCovariance
from .intervals import IntervalVector, LabeledDataset, stack_bounds

CONFIGS = (1, 2, 3, 4)


def interval_gaussian_features(observations: Sequence[IntervalVector]) -> np.ndarray:
    """Stack observations as (N, 2K) rows of midpoints then log-ranges."""
    lo, up = stack_bounds(observations)
    widths = up - lo
    if np.any(widths <= 0.0):
        i, k = np.unravel_index(int(np.argmin(widths)), widths.shape)
        raise DegenerateInterval(f"observation {i}, feature {k}: zero-width interval")
    return np.hstack([0.5 * (lo + up), np.log(widths)])


def _pattern_mask(n_features: int, config: int) -> np.ndarray:
    """Boolean (2K, 2K) mask of allowed covariance entries for a config."""
    k = n_features
    dim = 2 * k
    if config == 1:
        return np.ones((dim, dim), dtype=bool)
    if config == 2:
        mask = np.zeros((dim, dim), dtype=bool)
        idx = np.arange(dim)
        mask[idx, idx] = True
        j = np.arange(k)
        mask[j, j + k] = True
        mask[j + k, j] = True
        return mask
    if config == 3:
        mask = np.zeros((dim, dim), dtype=bool)
        mask[:k, :k] = True
        mask[k:, k:] = True
        return mask
    if config == 4:
        return np.eye(dim, dtype=bool)
    raise InvalidParameter(f"unknown covariance configuration {config}")


def covariance_param_count(n_features: int, config: int) -> int:
    mask = _pattern_mask(n_features, config)
    return int((np.count_nonzero(mask) + 2 * n_features) // 2)  # upper triangle incl. diagonal


def _condition(sigma: np.ndarray) -> np.ndarray:
    dim = sigma.shape[0]
    bump = 1e-8 * float(np.trace(sigma)) / dim
    return sigma + bump * np.eye(dim)


@dataclass(frozen=True)
class LdaIdModel:
    means: np.ndarray  # (Q, 2K) class means in (C, R*) space
    sigma: np.ndarray  # (2K, 2K) pooled covariance, patterned and conditioned
    sigma_inv: np.ndarray
    priors: np.ndarray  # (Q,)
    config: int
    bics: dict
    logliks: dict
    n_classes: int
    n_features: int  # K (number of intervals)


def ldaid_fit(data: LabeledDataset, configs: Sequence[int] = CONFIGS) -> LdaIdModel:
    """Fit the interval Gaussian model, selecting the covariance structure by BIC."""
    if data.is_functional:
        raise InvalidParameter("vectorize curves before fitting this model")
    y = data.label_array()
    q = data.n_classes
    counts = np.bincount(y, minlength=q + 1)[1:]
    if np.any(counts < 2):
        raise InvalidParameter("need at least 2 observations per class")
    z = interval_gaussian_features(data.observations)
    n, dim = z.shape
    k = dim // 2

    means = np.stack([z[y == g].mean(axis=0) for g in range(1, q + 1)])
    centered = z - means[y - 1]
    pooled = (centered.T @ centered) / n  # MLE denominator

    bics: dict[int, float] = {}
    logliks: dict[int, float] = {}
    chosen = None
    for config in configs:
        sigma = np.where(_pattern_mask(k, config), pooled, 0.0)
        sigma = _condition(sigma)
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise SingularCovariance(
                f"covariance for configuration {config} is singular even after conditioning"
            ) from None
        logdet = 2.0 * float(np.log(np.diagonal(chol)).sum())
        sigma_inv = np.linalg.inv(sigma)
        mahal = float(np.einsum("ij,jk,ik->", centered, sigma_inv, centered))
        loglik = -0.5 * (n * dim * np.log(2.0 * np.pi) + n * logdet + mahal)
        n_params = q * dim + covariance_param_count(k, config)
        bic = -2.0 * loglik + n_params * np.log(n)
        bics[config] = float(bic)
        logliks[config] = float(loglik)
        if chosen is None or bic < bics[chosen]:
            chosen = config

    sigma = _condition(np.where(_pattern_mask(k, chosen), pooled, 0.0))
    sigma_inv = np.linalg.inv(sigma)
    priors = counts / n
    return LdaIdModel(
        means=means,
        sigma=sigma,
        sigma_inv=sigma_inv,
        priors=priors,
        config=chosen,
        bics=bics,
        logliks=logliks,
        n_classes=q,
        n_features=k,
    )


def ldaid_predict_proba(model: LdaIdModel, observations: Sequence[IntervalVector]) -> np.ndarray:
    """Gaussian class posteriors under the shared patterned covariance."""
    z = interval_gaussian_features(observations)
    if z.shape[1] != 2 * model.n_features:
        raise InvalidParameter(
            f"expected {model.n_features} interval features, got {z.shape[1] // 2}"
        )
    proj = model.sigma_inv @ model.means.T  # (2K, Q)
    scores = z @ proj + (np.log(model.priors) - 0.5 * np.einsum("qd,dq->q", model.means, proj))
    scores -= scores.max(axis=1, keepdims=True)
    np.exp(scores, out=scores)
    scores /= scores.sum(axis=1, keepdims=True)
    return scores


def ldaid_predict(model: LdaIdModel, observations: Sequence[IntervalVector]) -> np.ndarray:
    return np.argmax(ldaid_predict_proba(model, observations), axis=1) + 1
