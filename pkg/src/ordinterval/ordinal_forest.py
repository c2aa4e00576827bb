"""Ordinal forests: regression forests on optimized class scores, and the
kernel-induced variant that replaces raw features with kernel similarities
to every training observation.

The ordinal forest searches for a good numeric embedding of the Q ordered
classes into (0, 1): candidate embeddings come from sorted uniform cut
points (borders) with class scores at the interval midpoints. Each
candidate is evaluated by the out-of-bag accuracy of a small forest trained
on its scores, the borders of the best candidates are averaged border-wise,
and one larger forest is trained on the resulting final scores. A
regression output is mapped back to the class whose border interval
contains it, with outputs at or below 0 going to the first class and above
1 to the last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameter
from .forest import FeatureTable, ForestModel, ForestParams, rforest_fit, rforest_oob_predict, rforest_predict
from .intervals import LabeledDataset
from .metrics import cross_distances
from .numeric import RngStream


@dataclass(frozen=True)
class OfParams:
    n_sets: int = 20
    trees_per_set: int = 25
    n_best: int = 5
    trees_final: int = 200
    min_leaf: int = 5
    mtry: int | None = None


@dataclass(frozen=True)
class OfModel:
    borders: np.ndarray  # (Q+1,), 0 = b_0 < b_1 < ... < b_Q = 1
    scores: np.ndarray  # (Q,), interval midpoints
    forest: ForestModel
    n_classes: int
    candidate_borders: np.ndarray = field(repr=False, default=None)
    candidate_accuracy: np.ndarray = field(repr=False, default=None)
    chosen: np.ndarray = field(repr=False, default=None)


def _sample_borders(n_classes: int, rng: RngStream) -> np.ndarray:
    while True:
        cuts = np.sort(rng.uniform(size=n_classes - 1))
        if np.unique(cuts).size == n_classes - 1 and cuts[0] > 0.0 and cuts[-1] < 1.0:
            return np.concatenate([[0.0], cuts, [1.0]])


def labels_from_borders(borders: np.ndarray, regression_output: np.ndarray) -> np.ndarray:
    """Map regression outputs to classes via border intervals (ties go low)."""
    interior = borders[1:-1]
    return np.searchsorted(interior, regression_output, side="left") + 1


def of_fit(
    x: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    params: OfParams,
    rng: RngStream,
) -> OfModel:
    """Fit an ordinal forest on a real feature matrix."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if set(range(1, n_classes + 1)) - set(np.unique(y).tolist()):
        raise InvalidParameter("every class 1..Q must appear in the training labels")
    table = FeatureTable(x)  # shared by the candidate forests and the final one
    forest_params = ForestParams(
        n_trees=params.trees_per_set, mtry=params.mtry, min_leaf=params.min_leaf
    )
    cand_borders = np.empty((params.n_sets, n_classes + 1))
    cand_acc = np.empty(params.n_sets)
    for c in range(params.n_sets):
        borders = _sample_borders(n_classes, rng.split(1, c))
        scores = 0.5 * (borders[:-1] + borders[1:])
        forest = rforest_fit(x, scores[y - 1], forest_params, rng.split(2, c), table=table)
        oob, covered = rforest_oob_predict(forest, x)
        if covered.any():
            oob_labels = labels_from_borders(borders, oob[covered])
            acc = float((oob_labels == y[covered]).mean())
        else:
            acc = 0.0
        cand_borders[c] = borders
        cand_acc[c] = acc
    n_best = min(params.n_best, params.n_sets)
    chosen = np.argsort(-cand_acc, kind="stable")[:n_best]
    final_borders = cand_borders[chosen].mean(axis=0)
    final_scores = 0.5 * (final_borders[:-1] + final_borders[1:])
    final_params = ForestParams(
        n_trees=params.trees_final, mtry=params.mtry, min_leaf=params.min_leaf
    )
    final_forest = rforest_fit(x, final_scores[y - 1], final_params, rng.split(3), table=table)
    return OfModel(
        borders=final_borders,
        scores=final_scores,
        forest=final_forest,
        n_classes=n_classes,
        candidate_borders=cand_borders,
        candidate_accuracy=cand_acc,
        chosen=chosen,
    )


def of_predict(model: OfModel, x: np.ndarray) -> np.ndarray:
    return labels_from_borders(model.borders, rforest_predict(model.forest, x))


# ---------------------------------------------------------------------------
# kernel-induced features and the kernel-induced ordinal forest
# ---------------------------------------------------------------------------


def kernel_feature_map(
    train_obs: Sequence,
    query_obs: Sequence,
    gamma: float,
    kind: str,
) -> np.ndarray:
    """Kernel similarities of each query against every training observation.

    Column j of the (Nq, Ntrain) result holds exp(-d(x, train_j)^2 / gamma),
    so forests trained on it split on "is x within some kernel radius of
    training point j".
    """
    if gamma <= 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    d = cross_distances(train_obs, query_obs, kind)
    return np.exp(-(d * d) / gamma)


@dataclass(frozen=True)
class KiofModel:
    train_observations: tuple
    gamma: float
    distance_kind: str
    of_model: OfModel

    @property
    def n_classes(self) -> int:
        return self.of_model.n_classes


def kiof_fit(
    data: LabeledDataset,
    gamma: float,
    of_params: OfParams,
    rng: RngStream,
) -> KiofModel:
    """Ordinal forest on the kernel feature representation of the data."""
    kind = "FEH" if data.is_functional else "EH"
    features = kernel_feature_map(data.observations, data.observations, gamma, kind)
    of_model = of_fit(features, data.label_array(), data.n_classes, of_params, rng)
    return KiofModel(
        train_observations=data.observations,
        gamma=gamma,
        distance_kind=kind,
        of_model=of_model,
    )


def kiof_predict(model: KiofModel, observations: Sequence) -> np.ndarray:
    features = kernel_feature_map(
        model.train_observations, observations, model.gamma, model.distance_kind
    )
    return of_predict(model.of_model, features)
