"""Kernel principal components for interval data, and the two-stage
pipeline that feeds the projections to ordinal regression.

The Gaussian-of-Hausdorff kernel is not guaranteed positive semi-definite,
so eigenvalues at or below a small fraction of the leading one (including
all non-positive ones) are silently dropped rather than treated as errors.
Projections are scaled by 1/sqrt(eigenvalue), which makes the inner products
of training projections reproduce the centered kernel matrix on the
retained components.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateKernel, FitFailed, InvalidParameter
from .intervals import LabeledDataset
from .numeric import sym_eigen
from .ordinal_forest import kernel_feature_map
from .polr import PolrModel, polr_fit, polr_predict_proba

EIGENVALUE_FLOOR = 1e-10
DEFAULT_MASS = 0.95
DEFAULT_MAX_COMPONENTS = 10


@dataclass(frozen=True)
class KpcaModel:
    train_observations: tuple
    gamma: float
    distance_kind: str
    eigenvalues: np.ndarray  # (d,), positive, descending
    alphas: np.ndarray  # (N, d) unit-norm eigenvectors of the centered kernel
    column_means: np.ndarray  # (N,) means of the training kernel matrix
    grand_mean: float
    n_components: int


def _select_dimension(values: np.ndarray, mass: float, max_components: int) -> int:
    share = np.cumsum(values) / values.sum()
    d = int(np.searchsorted(share, mass, side="left")) + 1
    return max(1, min(d, max_components, values.size))


def kpca_fit(
    observations: Sequence,
    gamma: float,
    distance_kind: str,
    mass: float = DEFAULT_MASS,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> KpcaModel:
    """Eigendecompose the double-centered kernel matrix of the observations.

    Retains the smallest number of leading components whose eigenvalue mass
    reaches ``mass``, capped at ``max_components``.
    """
    obs = tuple(observations)
    if len(obs) < 2:
        raise InvalidParameter("kernel PCA needs at least 2 observations")
    k = kernel_feature_map(obs, obs, gamma, distance_kind)  # symmetric (N, N)
    col_means = k.mean(axis=0)
    grand = float(k.mean())
    centered = k - col_means[None, :] - col_means[:, None] + grand
    eig = sym_eigen(centered)
    lead = float(eig.values[0]) if eig.values.size else 0.0
    if lead <= 0.0:
        raise DegenerateKernel("centered kernel matrix has no positive eigenvalues")
    keep = eig.values > EIGENVALUE_FLOOR * lead
    values = eig.values[keep]
    vectors = eig.vectors[:, keep]
    d = _select_dimension(values, mass, max_components)
    return KpcaModel(
        train_observations=obs,
        gamma=gamma,
        distance_kind=distance_kind,
        eigenvalues=values[:d],
        alphas=vectors[:, :d],
        column_means=col_means,
        grand_mean=grand,
        n_components=d,
    )


def kpca_train_projections(model: KpcaModel) -> np.ndarray:
    """Projections of the training observations, (N, d)."""
    return model.alphas * np.sqrt(model.eigenvalues)[None, :]


def kpca_transform(model: KpcaModel, observations: Sequence) -> np.ndarray:
    """Project observations onto the retained components, (n, d)."""
    k = kernel_feature_map(model.train_observations, observations, model.gamma, model.distance_kind)
    centered = (
        k
        - k.mean(axis=1, keepdims=True)
        - model.column_means[None, :]
        + model.grand_mean
    )
    return (centered @ model.alphas) / np.sqrt(model.eigenvalues)[None, :]


def _truncate(model: KpcaModel, d: int) -> KpcaModel:
    return KpcaModel(
        train_observations=model.train_observations,
        gamma=model.gamma,
        distance_kind=model.distance_kind,
        eigenvalues=model.eigenvalues[:d],
        alphas=model.alphas[:, :d],
        column_means=model.column_means,
        grand_mean=model.grand_mean,
        n_components=d,
    )


@dataclass(frozen=True)
class KpcaPolrModel:
    kpca: KpcaModel
    polr: PolrModel

    @property
    def n_classes(self) -> int:
        return self.polr.n_classes


def kpca_polr_fit(
    data: LabeledDataset,
    gamma: float,
    mass: float = DEFAULT_MASS,
    max_components: int = DEFAULT_MAX_COMPONENTS,
    ridge: float | None = None,
) -> KpcaPolrModel:
    """Kernel PCA feature extraction followed by ordinal regression.

    If the regression fails to converge, the component count is halved and
    the fit retried once before giving up.
    """
    kind = "FEH" if data.is_functional else "EH"
    cap = min(max_components, data.n - data.n_classes - 1)
    if cap < 1:
        raise FitFailed("too few observations to retain any component")
    kpca = kpca_fit(data.observations, gamma, kind, mass=mass, max_components=cap)
    y = data.label_array()
    kwargs = {} if ridge is None else {"ridge": ridge}
    try:
        polr = polr_fit(
            kpca_train_projections(kpca), y, n_classes=data.n_classes, recipe="kpca", **kwargs
        )
        return KpcaPolrModel(kpca=kpca, polr=polr)
    except FitFailed:
        if kpca.n_components == 1:
            raise
        reduced = _truncate(kpca, max(1, kpca.n_components // 2))
        polr = polr_fit(
            kpca_train_projections(reduced), y, n_classes=data.n_classes, recipe="kpca", **kwargs
        )
        return KpcaPolrModel(kpca=reduced, polr=polr)


def kpca_polr_predict_proba(model: KpcaPolrModel, observations: Sequence) -> np.ndarray:
    return polr_predict_proba(model.polr, kpca_transform(model.kpca, observations))


def kpca_polr_predict(model: KpcaPolrModel, observations: Sequence) -> np.ndarray:
    return np.argmax(kpca_polr_predict_proba(model, observations), axis=1) + 1
