"""Versioned JSON records for fitted models.

Payloads hold every number needed to reproduce predictions bit-exactly
(floats survive the JSON round trip unchanged via repr). Training-time-only
state, such as per-tree bootstrap indices, is deliberately not stored, so a
reloaded forest predicts identically but cannot produce out-of-bag values.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InvalidParameter, SchemaError
from .forest import ForestModel, ForestParams
from .frank_hall import FhModel
from .intervals import IntervalCurve, IntervalVector, LabeledDataset
from .kpca import KpcaModel, KpcaPolrModel
from .ldaid import LdaIdModel
from .methods import FittedMethod, _ldaid_predict_high
from .ordinal_forest import KiofModel, OfModel
from .polr import PolrI2Model, PolrModel
from .wknn import WknnConfig, WknnModel

FORMAT = "ordinterval-model"
VERSION = 1


def _arr(a) -> list:
    return np.asarray(a).tolist()


def _observations_payload(observations) -> dict:
    first = observations[0]
    if isinstance(first, IntervalCurve):
        return {
            "type": "ivf",
            "grid": _arr(first.grid),
            "lower": [_arr(o.lower) for o in observations],
            "upper": [_arr(o.upper) for o in observations],
        }
    return {
        "type": "ivd",
        "lower": [_arr(o.lower) for o in observations],
        "upper": [_arr(o.upper) for o in observations],
    }


def _observations_from(payload: dict) -> tuple:
    if payload["type"] == "ivf":
        grid = payload["grid"]
        return tuple(
            IntervalCurve(grid, lo, up) for lo, up in zip(payload["lower"], payload["upper"])
        )
    return tuple(
        IntervalVector(lo, up) for lo, up in zip(payload["lower"], payload["upper"])
    )


def _dataset_payload(data: LabeledDataset) -> dict:
    out = _observations_payload(data.observations)
    out["labels"] = list(data.labels)
    out["n_classes"] = data.n_classes
    return out


def _dataset_from(payload: dict) -> LabeledDataset:
    return LabeledDataset(
        observations=_observations_from(payload),
        labels=tuple(payload["labels"]),
        n_classes=int(payload["n_classes"]),
    )


def _polr_payload(model: PolrModel) -> dict:
    return {
        "zeta": _arr(model.zeta),
        "beta": _arr(model.beta),
        "n_classes": model.n_classes,
        "recipe": model.recipe,
        "grad_norm": model.grad_norm,
    }


def _polr_from(payload: dict) -> PolrModel:
    return PolrModel(
        zeta=np.asarray(payload["zeta"], dtype=np.float64),
        beta=np.asarray(payload["beta"], dtype=np.float64),
        n_classes=int(payload["n_classes"]),
        recipe=payload["recipe"],
        grad_norm=float(payload["grad_norm"]),
    )


def _ldaid_payload(model: LdaIdModel) -> dict:
    return {
        "means": _arr(model.means),
        "sigma": _arr(model.sigma),
        "sigma_inv": _arr(model.sigma_inv),
        "priors": _arr(model.priors),
        "config": model.config,
        "bics": {str(k): v for k, v in model.bics.items()},
        "logliks": {str(k): v for k, v in model.logliks.items()},
        "n_classes": model.n_classes,
        "n_features": model.n_features,
    }


def _ldaid_from(payload: dict) -> LdaIdModel:
    return LdaIdModel(
        means=np.asarray(payload["means"], dtype=np.float64),
        sigma=np.asarray(payload["sigma"], dtype=np.float64),
        sigma_inv=np.asarray(payload["sigma_inv"], dtype=np.float64),
        priors=np.asarray(payload["priors"], dtype=np.float64),
        config=int(payload["config"]),
        bics={int(k): v for k, v in payload["bics"].items()},
        logliks={int(k): v for k, v in payload["logliks"].items()},
        n_classes=int(payload["n_classes"]),
        n_features=int(payload["n_features"]),
    )


def _forest_payload(model: ForestModel) -> dict:
    return {
        "feature": _arr(model.node_feature),
        "threshold": _arr(model.node_threshold),
        "left": _arr(model.node_left),
        "right": _arr(model.node_right),
        "value": _arr(model.node_value),
        "offsets": _arr(model.tree_offsets),
        "n_features": model.n_features,
        "params": {
            "n_trees": model.params.n_trees,
            "mtry": model.params.mtry,
            "min_leaf": model.params.min_leaf,
        },
    }


def _forest_from(payload: dict) -> ForestModel:
    params = payload["params"]
    n_trees = int(params["n_trees"])
    return ForestModel(
        node_feature=np.asarray(payload["feature"], dtype=np.int64),
        node_threshold=np.asarray(payload["threshold"], dtype=np.float64),
        node_left=np.asarray(payload["left"], dtype=np.int64),
        node_right=np.asarray(payload["right"], dtype=np.int64),
        node_value=np.asarray(payload["value"], dtype=np.float64),
        tree_offsets=np.asarray(payload["offsets"], dtype=np.int64),
        bootstrap=np.zeros((n_trees, 0), dtype=np.int64),
        n_features=int(payload["n_features"]),
        params=ForestParams(
            n_trees=n_trees,
            mtry=params["mtry"],
            min_leaf=int(params["min_leaf"]),
        ),
    )


def _of_payload(model: OfModel) -> dict:
    return {
        "borders": _arr(model.borders),
        "scores": _arr(model.scores),
        "forest": _forest_payload(model.forest),
        "n_classes": model.n_classes,
    }


def _of_from(payload: dict) -> OfModel:
    return OfModel(
        borders=np.asarray(payload["borders"], dtype=np.float64),
        scores=np.asarray(payload["scores"], dtype=np.float64),
        forest=_forest_from(payload["forest"]),
        n_classes=int(payload["n_classes"]),
    )


def _inner_payload(method: str, inner) -> dict:
    if method in ("polr", "polr_i"):
        return _polr_payload(inner)
    if method == "polr_i2":
        return {
            "lower": _polr_payload(inner.lower_model),
            "upper": _polr_payload(inner.upper_model),
        }
    if method == "lda_id":
        return _ldaid_payload(inner)
    if method == "fh_lda_id":
        return {
            "submodels": [_ldaid_payload(s) for s in inner.submodels],
            "n_classes": inner.n_classes,
        }
    if method == "di_wknn":
        return {
            "train": _dataset_payload(inner.train),
            "k": inner.config.k,
            "weight_kernel": inner.config.weight_kernel,
            "distance_kind": inner.distance_kind,
        }
    if method == "kpca_polr":
        kp = inner.kpca
        return {
            "train": _observations_payload(kp.train_observations),
            "gamma": kp.gamma,
            "distance_kind": kp.distance_kind,
            "eigenvalues": _arr(kp.eigenvalues),
            "alphas": _arr(kp.alphas),
            "column_means": _arr(kp.column_means),
            "grand_mean": kp.grand_mean,
            "n_components": kp.n_components,
            "polr": _polr_payload(inner.polr),
        }
    if method == "kiof":
        return {
            "train": _observations_payload(inner.train_observations),
            "gamma": inner.gamma,
            "distance_kind": inner.distance_kind,
            "of": _of_payload(inner.of_model),
        }
    if method == "of":
        return _of_payload(inner)
    raise InvalidParameter(f"cannot serialize method {method!r}")


def _inner_from(method: str, payload: dict):
    if method in ("polr", "polr_i"):
        return _polr_from(payload)
    if method == "polr_i2":
        return PolrI2Model(
            lower_model=_polr_from(payload["lower"]),
            upper_model=_polr_from(payload["upper"]),
        )
    if method == "lda_id":
        return _ldaid_from(payload)
    if method == "fh_lda_id":
        return FhModel(
            submodels=tuple(_ldaid_from(s) for s in payload["submodels"]),
            predict_high=_ldaid_predict_high,
            n_classes=int(payload["n_classes"]),
        )
    if method == "di_wknn":
        config = WknnConfig(
            k=int(payload["k"]),
            weight_kernel=payload["weight_kernel"],
            distance_kind=payload["distance_kind"],
        )
        return WknnModel(
            train=_dataset_from(payload["train"]),
            config=config,
            distance_kind=payload["distance_kind"],
        )
    if method == "kpca_polr":
        kp = KpcaModel(
            train_observations=_observations_from(payload["train"]),
            gamma=float(payload["gamma"]),
            distance_kind=payload["distance_kind"],
            eigenvalues=np.asarray(payload["eigenvalues"], dtype=np.float64),
            alphas=np.asarray(payload["alphas"], dtype=np.float64),
            column_means=np.asarray(payload["column_means"], dtype=np.float64),
            grand_mean=float(payload["grand_mean"]),
            n_components=int(payload["n_components"]),
        )
        return KpcaPolrModel(kpca=kp, polr=_polr_from(payload["polr"]))
    if method == "kiof":
        return KiofModel(
            train_observations=_observations_from(payload["train"]),
            gamma=float(payload["gamma"]),
            distance_kind=payload["distance_kind"],
            of_model=_of_from(payload["of"]),
        )
    if method == "of":
        return _of_from(payload)
    raise SchemaError(f"cannot deserialize method {method!r}")


def model_to_json(fitted: FittedMethod) -> str:
    record = {
        "format": FORMAT,
        "version": VERSION,
        "method": fitted.method,
        "n_classes": fitted.n_classes,
        "functional_input": fitted.functional_input,
        "subsample_step": fitted.subsample_step,
        "payload": _inner_payload(fitted.method, fitted.inner),
    }
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def model_from_json(text: str) -> FittedMethod:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a valid model file: {exc}") from None
    if record.get("format") != FORMAT:
        raise SchemaError("not an ordinterval model file")
    if record.get("version") != VERSION:
        raise SchemaError(f"unsupported model version {record.get('version')!r}")
    method = record["method"]
    return FittedMethod(
        method=method,
        n_classes=int(record["n_classes"]),
        functional_input=bool(record["functional_input"]),
        subsample_step=int(record["subsample_step"]),
        inner=_inner_from(method, record["payload"]),
    )


def save_model(path: str, fitted: FittedMethod) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(fitted))


def load_model(path: str) -> FittedMethod:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())
