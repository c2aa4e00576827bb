"""Synthetic data generation, the Monte Carlo evaluation protocol, metrics,
and report aggregation.

Protocol: each replicate either generates a fresh synthetic dataset (for a
design) or re-splits a fixed dataset, makes one 80/20 train/test split, and
runs every requested method on that identical split, so per-replicate
differences between methods are paired. Randomness is organized so that
replicate r derives all of its streams from (master seed, r) and each
method additionally from a stable hash of its name; adding or removing a
method therefore never changes any other method's results, and replicates
can run in any order or in parallel with identical output.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import FitFailed, InvalidParameter, ShapeMismatch, SplitFailed
from .intervals import (
    IntervalVector,
    LabeledDataset,
    standardize_curves_apply,
    standardize_curves_fit,
    standardize_vectors_apply,
    standardize_vectors_fit,
)
from .methods import RunSettings, fit_method, supported_methods
from .numeric import RngStream, mvn_sample
from .polr import design_matrix

TRAIN_FRACTION_DEFAULT = 0.8

# purposes for per-replicate stream splitting
_STREAM_DATA = 0
_STREAM_SPLIT = 1
_STREAM_METHOD = 2


@dataclass(frozen=True)
class ClassSpec:
    mean1: float
    mean2: float
    sd1: float
    sd2: float
    rho: float = 0.0


@dataclass(frozen=True)
class SyntheticDesign:
    """A mixture of bivariate normal seed distributions, one per class."""

    name: str
    classes: tuple
    n_per_class: int = 100
    width_low: float = 1.0
    width_high: float = 5.0

    @property
    def n_classes(self) -> int:
        return len(self.classes)


THREE_CLASS = SyntheticDesign(
    name="three_class",
    classes=(
        ClassSpec(25.0, 50.0, 6.0, 3.0),
        ClassSpec(38.0, 40.0, 3.0, 3.0),
        ClassSpec(45.0, 35.0, 5.0, 5.0),
    ),
)

FOUR_CLASS = SyntheticDesign(
    name="four_class",
    classes=(
        ClassSpec(25.0, 50.0, 6.0, 3.0),
        ClassSpec(30.0, 45.0, 5.0, 5.0),
        ClassSpec(38.0, 40.0, 3.0, 3.0),
        ClassSpec(45.0, 35.0, 2.0, 3.0),
    ),
)

DESIGNS = {d.name: d for d in (THREE_CLASS, FOUR_CLASS)}


def gen_synthetic(
    design: SyntheticDesign, rng: RngStream, n_per_class: int | None = None
) -> LabeledDataset:
    """Generate an IVD dataset: class seeds from bivariate normals, interval
    widths drawn uniformly per observation."""
    n = design.n_per_class if n_per_class is None else int(n_per_class)
    if n < 1:
        raise InvalidParameter("need at least one observation per class")
    observations = []
    labels = []
    for g, spec in enumerate(design.classes, start=1):
        class_rng = rng.split(g)
        seeds = mvn_sample(
            class_rng, (spec.mean1, spec.mean2), spec.sd1, spec.sd2, spec.rho, size=n
        )
        widths = class_rng.uniform(design.width_low, design.width_high, size=(n, 2))
        for i in range(n):
            half = 0.5 * widths[i]
            observations.append(IntervalVector(seeds[i] - half, seeds[i] + half))
            labels.append(g)
    return LabeledDataset(
        observations=tuple(observations), labels=tuple(labels), n_classes=design.n_classes
    )


def split_indices(
    data: LabeledDataset, train_frac: float, rng: RngStream, max_attempts: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Index sets of a random permutation split whose training part covers
    every class (retried up to ``max_attempts`` permutations)."""
    n_train = int(round(data.n * train_frac))
    if n_train < 1 or n_train >= data.n:
        raise InvalidParameter(
            f"train fraction {train_frac} leaves an empty side for n={data.n}"
        )
    wanted = set(range(1, data.n_classes + 1))
    for _ in range(max_attempts):
        perm = rng.permutation(data.n)
        train_idx = np.sort(perm[:n_train])
        if wanted <= {data.labels[i] for i in train_idx}:
            return train_idx, np.sort(perm[n_train:])
    raise SplitFailed(
        f"could not cover all {data.n_classes} classes in {max_attempts} attempts"
    )


def split_train_test(
    data: LabeledDataset, train_frac: float, rng: RngStream, max_attempts: int = 100
) -> tuple[LabeledDataset, LabeledDataset]:
    train_idx, test_idx = split_indices(data, train_frac, rng, max_attempts)
    return data.subset(train_idx.tolist()), data.subset(test_idx.tolist())


def midpoint_view(data: LabeledDataset) -> np.ndarray:
    """(N, K) matrix of interval midpoints, the input of the naive baselines."""
    return design_matrix(data, "midpoint")


@dataclass(frozen=True)
class ReplicateMetrics:
    accuracy: float
    confusion: np.ndarray  # (Q, Q), rows = truth, columns = prediction
    precision: tuple  # per class, None when the class was never predicted
    recall: tuple  # per class, None when the class is absent from truth
    f1: tuple  # per class, None when either part is undefined


def evaluate(predictions, truth, n_classes: int) -> ReplicateMetrics:
    """Accuracy and per-class precision/recall/F1 from a confusion table.

    Ratios with a zero denominator are reported as None and later excluded
    from aggregation (with the exclusions counted).
    """
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truth, dtype=np.int64)
    if pred.shape != true.shape or pred.ndim != 1:
        raise ShapeMismatch(f"predictions {pred.shape} vs truth {true.shape}")
    q = n_classes
    confusion = np.zeros((q, q), dtype=np.int64)
    np.add.at(confusion, (true - 1, pred - 1), 1)
    accuracy = float(np.trace(confusion) / confusion.sum())
    precision, recall, f1 = [], [], []
    for c in range(q):
        tp = float(confusion[c, c])
        predicted = float(confusion[:, c].sum())
        actual = float(confusion[c, :].sum())
        p = tp / predicted if predicted > 0 else None
        r = tp / actual if actual > 0 else None
        precision.append(p)
        recall.append(r)
        if p is None or r is None or (p + r) == 0.0:
            f1.append(None)
        else:
            f1.append(2.0 * p * r / (p + r))
    return ReplicateMetrics(
        accuracy=accuracy,
        confusion=confusion,
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
    )


def _method_stream_id(name: str) -> int:
    # stable across runs and method-set changes
    return zlib.crc32(name.encode("utf-8"))


def _split_hash(train_idx, test_idx) -> str:
    digest = hashlib.sha256()
    digest.update(np.asarray(train_idx, dtype=np.int64).tobytes())
    digest.update(b"|")
    digest.update(np.asarray(test_idx, dtype=np.int64).tobytes())
    return digest.hexdigest()[:16]


def _standardize_split(train: LabeledDataset, test: LabeledDataset):
    if train.is_functional:
        params = standardize_curves_fit(train)
        apply = lambda d: LabeledDataset(  # noqa: E731
            observations=tuple(standardize_curves_apply(params, c) for c in d.observations),
            labels=d.labels,
            n_classes=d.n_classes,
            ids=d.ids,
        )
    else:
        params = standardize_vectors_fit(train)
        apply = lambda d: LabeledDataset(  # noqa: E731
            observations=tuple(standardize_vectors_apply(params, o) for o in d.observations),
            labels=d.labels,
            n_classes=d.n_classes,
            ids=d.ids,
        )
    return apply(train), apply(test)


def _run_replicate(args) -> dict:
    (rep, seed, design, dataset, method_names, settings, train_frac, standardize) = args
    master = RngStream(seed)
    if design is not None:
        data = gen_synthetic(design, master.split(rep, _STREAM_DATA))
    else:
        data = dataset
    train_idx, test_idx = split_indices(data, train_frac, master.split(rep, _STREAM_SPLIT))
    train = data.subset(train_idx.tolist())
    test = data.subset(test_idx.tolist())
    split_hash = _split_hash(train_idx, test_idx)
    if standardize:
        train, test = _standardize_split(train, test)
    truth = test.label_array()
    methods_out = {}
    for name in method_names:
        stream = master.split(rep, _STREAM_METHOD, _method_stream_id(name))
        try:
            fitted = fit_method(name, train, settings, stream)
            predictions = fitted.predict(test.observations)
        except FitFailed as exc:
            methods_out[name] = {"failed": str(exc)}
            continue
        metrics = evaluate(predictions, truth, data.n_classes)
        methods_out[name] = {
            "accuracy": metrics.accuracy,
            "confusion": metrics.confusion.tolist(),
            "precision": list(metrics.precision),
            "recall": list(metrics.recall),
            "f1": list(metrics.f1),
        }
    return {"replicate": rep, "split_hash": split_hash, "methods": methods_out}


def _mean_sd(values: list) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return None, None
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, sd


def _aggregate(replicates: list, method_names, n_classes: int) -> dict:
    out = {}
    for name in method_names:
        cells = [r["methods"][name] for r in replicates]
        ok = [c for c in cells if "failed" not in c]
        acc_mean, acc_sd = _mean_sd([c["accuracy"] for c in ok])
        per_class = {}
        for key in ("precision", "recall", "f1"):
            means, excluded = [], []
            for c in range(n_classes):
                defined = [cell[key][c] for cell in ok if cell[key][c] is not None]
                m, _ = _mean_sd(defined)
                means.append(m)
                excluded.append(len(ok) - len(defined))
            per_class[key + "_mean"] = means
            per_class[key + "_excluded"] = excluded
        out[name] = {
            "n_used": len(ok),
            "fit_failures": len(cells) - len(ok),
            "accuracy_mean": acc_mean,
            "accuracy_sd": acc_sd,
            **per_class,
        }
    return out


def _paired_differences(replicates: list, method_names) -> list:
    out = []
    for i, a in enumerate(method_names):
        for b in method_names[i + 1 :]:
            diffs = []
            for r in replicates:
                ca, cb = r["methods"][a], r["methods"][b]
                if "failed" not in ca and "failed" not in cb:
                    diffs.append(ca["accuracy"] - cb["accuracy"])
            mean, sd = _mean_sd(diffs)
            out.append(
                {"method_a": a, "method_b": b, "mean": mean, "sd": sd, "n": len(diffs)}
            )
    return out


def run_mc(
    source,
    methods,
    settings: RunSettings = RunSettings(),
    reps: int = 50,
    seed: int = 0,
    train_frac: float = TRAIN_FRACTION_DEFAULT,
    standardize: bool = True,
    jobs: int = 1,
) -> dict:
    """Monte Carlo cross-validation over a design or a fixed dataset.

    ``source`` is either a SyntheticDesign (fresh data each replicate) or a
    LabeledDataset (fresh split each replicate). Returns the full report as
    a JSON-serializable dict.
    """
    if isinstance(source, SyntheticDesign):
        design, dataset = source, None
        functional = False
        n_classes = source.n_classes
    elif isinstance(source, LabeledDataset):
        design, dataset = None, source
        functional = source.is_functional
        n_classes = source.n_classes
    else:
        raise InvalidParameter("source must be a SyntheticDesign or a LabeledDataset")
    method_names = list(methods)
    if not method_names:
        raise InvalidParameter("need at least one method")
    allowed = supported_methods(functional)
    for name in method_names:
        if name not in allowed:
            raise InvalidParameter(
                f"method {name!r} is not available for this data; choose from {allowed}"
            )
    if reps < 1:
        raise InvalidParameter("need at least one replicate")

    tasks = [
        (rep, seed, design, dataset, tuple(method_names), settings, train_frac, standardize)
        for rep in range(reps)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            replicates = list(pool.map(_run_replicate, tasks))
    else:
        replicates = [_run_replicate(t) for t in tasks]
    replicates.sort(key=lambda r: r["replicate"])

    report = {
        "schema": "ordinterval-report/1",
        "config": {
            "source": design.name if design is not None else "dataset",
            "methods": method_names,
            "reps": reps,
            "seed": seed,
            "train_frac": train_frac,
            "standardize": standardize,
            "settings": asdict(settings),
        },
        "replicates": replicates,
        "aggregate": _aggregate(replicates, method_names, n_classes),
        "paired_differences": _paired_differences(replicates, method_names),
    }
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def aggregate_csv(report: dict) -> str:
    """Aggregate accuracy table in a method, mean (sd) layout."""
    lines = ["method,reps_used,accuracy_mean,accuracy_sd,summary"]
    agg = report["aggregate"]
    for name in report["config"]["methods"]:
        row = agg[name]
        if row["accuracy_mean"] is None:
            lines.append(f"{name},0,,,no successful replicates")
            continue
        mean = row["accuracy_mean"] * 100.0
        sd = (row["accuracy_sd"] or 0.0) * 100.0
        lines.append(
            f"{name},{row['n_used']},{row['accuracy_mean']!r},{row['accuracy_sd']!r},"
            f"{mean:.1f} ({sd:.1f})"
        )
    return "\n".join(lines) + "\n"


def format_table(report: dict) -> str:
    """Human-readable accuracy table mirroring the aggregate CSV."""
    agg = report["aggregate"]
    width = max(len(m) for m in report["config"]["methods"])
    lines = [f"{'method'.ljust(width)}  accuracy"]
    for name in report["config"]["methods"]:
        row = agg[name]
        if row["accuracy_mean"] is None:
            lines.append(f"{name.ljust(width)}  (no successful replicates)")
        else:
            mean = row["accuracy_mean"] * 100.0
            sd = (row["accuracy_sd"] or 0.0) * 100.0
            suffix = f"  [{row['fit_failures']} failed]" if row["fit_failures"] else ""
            lines.append(f"{name.ljust(width)}  {mean:.1f} ({sd:.1f}){suffix}")
    return "\n".join(lines)
