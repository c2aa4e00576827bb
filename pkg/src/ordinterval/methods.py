"""Uniform fit/predict surface over the nine classification methods.

Every method is fit through ``fit_method(name, train, settings, rng)`` and
returns a ``FittedMethod`` exposing ``predict`` (hard labels) and, for the
probabilistic methods, ``predict_proba``. Functional datasets are handled
per method: the distance- and kernel-based methods consume curves directly,
while the vector-only methods see the curves subsampled on a coarser grid
and flattened to interval vectors. The plain ordinal-regression variants
are vector-only and are not offered for functional input at all.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidParameter
from .frank_hall import FhModel, fh_fit, fh_predict_proba
from .intervals import (
    IntervalCurve,
    LabeledDataset,
    curve_to_vector,
    dataset_to_vectors,
    subsample_grid,
)
from .kpca import kpca_polr_fit, kpca_polr_predict_proba
from .ldaid import ldaid_fit, ldaid_predict_proba
from .numeric import RngStream
from .ordinal_forest import OfParams, kiof_fit, kiof_predict, of_fit, of_predict
from .polr import (
    design_matrix,
    polr_fit,
    polr_i2_fit,
    polr_i2_predict_proba,
    polr_i_fit,
    polr_predict_proba,
)
from .wknn import WknnConfig, wknn_fit, wknn_predict

VECTOR_METHODS = (
    "polr",
    "of",
    "lda_id",
    "fh_lda_id",
    "di_wknn",
    "kpca_polr",
    "kiof",
    "polr_i",
    "polr_i2",
)

# methods usable on functional data; the starred three see a subsampled grid
CURVE_METHODS = ("of", "lda_id", "fh_lda_id", "di_wknn", "kpca_polr", "kiof")
SUBSAMPLED_ON_CURVES = ("of", "lda_id", "fh_lda_id")

PROBABILISTIC_METHODS = ("polr", "lda_id", "fh_lda_id", "kpca_polr", "polr_i", "polr_i2")


@dataclass(frozen=True)
class RunSettings:
    """Tunable knobs shared by the CLI, the benchmark harness, and tests."""

    gamma: float = 1.0
    k: int = 7
    weight_kernel: str = "rectangular"
    of_n_sets: int = 20
    of_trees_per_set: int = 25
    of_n_best: int = 5
    of_trees_final: int = 200
    min_leaf: int = 5
    mtry: int | None = None
    kpca_mass: float = 0.95
    kpca_max_components: int = 10
    subsample_step: int = 30
    ridge: float = 1e-6

    def of_params(self) -> OfParams:
        return OfParams(
            n_sets=self.of_n_sets,
            trees_per_set=self.of_trees_per_set,
            n_best=self.of_n_best,
            trees_final=self.of_trees_final,
            min_leaf=self.min_leaf,
            mtry=self.mtry,
        )

    def wknn_config(self) -> WknnConfig:
        return WknnConfig(k=self.k, weight_kernel=self.weight_kernel)


def supported_methods(functional: bool) -> tuple[str, ...]:
    return CURVE_METHODS if functional else VECTOR_METHODS


@dataclass(frozen=True)
class FittedMethod:
    """A fitted classifier plus the input plumbing needed to reuse it."""

    method: str
    n_classes: int
    functional_input: bool  # inner model consumes curves directly
    subsample_step: int  # grid step applied when flattening curves
    inner: object

    def _prepare(self, observations: Sequence) -> list:
        obs = list(observations)
        if obs and isinstance(obs[0], IntervalCurve) and not self.functional_input:
            return [curve_to_vector(subsample_grid(c, self.subsample_step)) for c in obs]
        return obs

    def predict(self, observations: Sequence) -> np.ndarray:
        obs = self._prepare(observations)
        m = self.method
        if m in ("polr", "polr_i"):
            proba = polr_predict_proba(self.inner, design_matrix(_as_dataset(obs), self.inner.recipe))
            return np.argmax(proba, axis=1) + 1
        if m == "polr_i2":
            return np.argmax(polr_i2_predict_proba(self.inner, _as_dataset(obs)), axis=1) + 1
        if m == "of":
            return of_predict(self.inner, design_matrix(_as_dataset(obs), "midpoint"))
        if m == "lda_id":
            return np.argmax(ldaid_predict_proba(self.inner, obs), axis=1) + 1
        if m == "fh_lda_id":
            return np.argmax(fh_predict_proba(self.inner, obs), axis=1) + 1
        if m == "di_wknn":
            return wknn_predict(self.inner, obs)
        if m == "kpca_polr":
            return np.argmax(kpca_polr_predict_proba(self.inner, obs), axis=1) + 1
        if m == "kiof":
            return kiof_predict(self.inner, obs)
        raise InvalidParameter(f"unknown method {m!r}")

    def predict_proba(self, observations: Sequence) -> np.ndarray:
        if self.method not in PROBABILISTIC_METHODS:
            raise InvalidParameter(f"{self.method} does not produce class probabilities")
        obs = self._prepare(observations)
        m = self.method
        if m in ("polr", "polr_i"):
            return polr_predict_proba(self.inner, design_matrix(_as_dataset(obs), self.inner.recipe))
        if m == "polr_i2":
            return polr_i2_predict_proba(self.inner, _as_dataset(obs))
        if m == "lda_id":
            return ldaid_predict_proba(self.inner, obs)
        if m == "fh_lda_id":
            return fh_predict_proba(self.inner, obs)
        return kpca_polr_predict_proba(self.inner, obs)


def _as_dataset(observations: Sequence) -> LabeledDataset:
    # wrap bare observations so the design-matrix helpers apply; labels unused
    return LabeledDataset(
        observations=tuple(observations),
        labels=tuple(1 for _ in observations),
        n_classes=1,
    )


def _ldaid_predict_high(model, observations) -> np.ndarray:
    return ldaid_predict_proba(model, observations)[:, 1]


def fit_method(
    name: str,
    train: LabeledDataset,
    settings: RunSettings = RunSettings(),
    rng: RngStream | None = None,
) -> FittedMethod:
    """Fit one method by name on a training dataset."""
    functional = train.is_functional
    if name not in VECTOR_METHODS:
        raise InvalidParameter(f"unknown method {name!r}; choose from {VECTOR_METHODS}")
    if functional and name not in CURVE_METHODS:
        raise InvalidParameter(f"{name} does not support functional data")
    if rng is None:
        rng = RngStream(0)

    step = settings.subsample_step
    needs_vectors = name not in ("di_wknn", "kpca_polr", "kiof")
    data = dataset_to_vectors(train, step) if (functional and needs_vectors) else train
    functional_input = functional and not needs_vectors
    y = data.label_array()

    if name == "polr":
        inner = polr_fit(
            design_matrix(data, "midpoint"),
            y,
            n_classes=data.n_classes,
            ridge=settings.ridge,
            recipe="midpoint",
        )
    elif name == "of":
        inner = of_fit(
            design_matrix(data, "midpoint"), y, data.n_classes, settings.of_params(), rng
        )
    elif name == "lda_id":
        inner = ldaid_fit(data)
    elif name == "fh_lda_id":
        inner = fh_fit(data, ldaid_fit, _ldaid_predict_high)
    elif name == "di_wknn":
        inner = wknn_fit(data, settings.wknn_config())
    elif name == "kpca_polr":
        inner = kpca_polr_fit(
            data,
            gamma=settings.gamma,
            mass=settings.kpca_mass,
            max_components=settings.kpca_max_components,
            ridge=settings.ridge,
        )
    elif name == "kiof":
        inner = kiof_fit(data, settings.gamma, settings.of_params(), rng)
    elif name == "polr_i":
        inner = polr_i_fit(data, ridge=settings.ridge)
    else:  # polr_i2
        inner = polr_i2_fit(data, ridge=settings.ridge)

    return FittedMethod(
        method=name,
        n_classes=train.n_classes,
        functional_input=functional_input,
        subsample_step=step,
        inner=inner,
    )
