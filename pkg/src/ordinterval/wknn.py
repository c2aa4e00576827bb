"""Weighted k-nearest-neighbor ordinal classification on interval distances.

The k+1 nearest training observations are found under the configured
distance; the k smallest distances are normalized by the (k+1)-th and turned
into weights (triangular kernel 1 - d, or rectangular all-ones). The
predicted label is the weighted median of the neighbor classes, which
respects the class order. If the (k+1)-th distance is zero all weights are
set to 1; ties in the neighbor ranking break by training index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameter
from .intervals import LabeledDataset
from .metrics import cross_distances
from .numeric import weighted_median

WEIGHT_KERNELS = ("triangular", "rectangular")


@dataclass(frozen=True)
class WknnConfig:
    k: int = 7
    weight_kernel: str = "rectangular"
    distance_kind: str | None = None  # None -> EH for IVD, FEH for IVF

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameter("k must be >= 1")
        if self.weight_kernel not in WEIGHT_KERNELS:
            raise InvalidParameter(f"unknown weight kernel {self.weight_kernel!r}")


@dataclass(frozen=True)
class WknnModel:
    train: LabeledDataset
    config: WknnConfig
    distance_kind: str

    @property
    def n_classes(self) -> int:
        return self.train.n_classes


def wknn_fit(train: LabeledDataset, config: WknnConfig = WknnConfig()) -> WknnModel:
    if train.n < config.k + 1:
        raise InvalidParameter(f"need at least k+1={config.k + 1} training observations")
    kind = config.distance_kind or ("FEH" if train.is_functional else "EH")
    return WknnModel(train=train, config=config, distance_kind=kind)


def wknn_predict(model: WknnModel, observations: Sequence) -> np.ndarray:
    """Predict labels for a batch of observations."""
    k = model.config.k
    labels = model.train.label_array()
    dists = cross_distances(model.train.observations, observations, model.distance_kind)
    out = np.empty(dists.shape[0], dtype=np.int64)
    for i in range(dists.shape[0]):
        order = np.argsort(dists[i], kind="stable")
        nearest = order[:k]
        pivot = dists[i][order[k]]
        if pivot == 0.0:
            weights = np.ones(k)
        elif model.config.weight_kernel == "rectangular":
            weights = np.ones(k)
        else:
            weights = np.maximum(0.0, 1.0 - dists[i][nearest] / pivot)
            if weights.sum() <= 0.0:
                # every neighbor ties with the pivot distance; weight evenly
                weights = np.ones(k)
        out[i] = weighted_median(labels[nearest], weights)
    return out
