"""Command-line interface: generate synthetic data, fit and apply models,
and run the Monte Carlo benchmark.

Exit codes: 0 on success, 2 for input/usage problems, 3 for numerical or
fitting failures. All commands are deterministic given their flags and
seed. A ``--config`` file holds flat ``key = value`` lines mirroring the
flag names (underscores for dashes); explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

import numpy as np

from .bench import DESIGNS, aggregate_csv, format_table, gen_synthetic, report_to_json, run_mc
from .errors import (
    DegenerateKernel,
    FitFailed,
    NumericalFailure,
    OrdintervalError,
    SingularCovariance,
)
from .intervals import LabeledDataset
from .io import (
    read_ivd_csv,
    read_ivf_csv,
    write_ivd_csv,
    write_predictions_csv,
)
from .methods import (
    PROBABILISTIC_METHODS,
    RunSettings,
    VECTOR_METHODS,
    fit_method,
    supported_methods,
)
from .numeric import RngStream
from .serialize import load_model, save_model

_FIT_ERRORS = (FitFailed, NumericalFailure, SingularCovariance, DegenerateKernel)

_SETTINGS_KEYS = {f.name for f in fields(RunSettings)}
_BOOL_KEYS = {"standardize"}
_INT_KEYS = {
    "seed",
    "reps",
    "jobs",
    "k",
    "of_n_sets",
    "of_trees_per_set",
    "of_n_best",
    "of_trees_final",
    "min_leaf",
    "mtry",
    "kpca_max_components",
    "subsample_step",
    "n_per_class",
    "n_classes",
}
_FLOAT_KEYS = {"train_frac", "gamma", "kpca_mass", "ridge"}


def read_config_file(path: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_num, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise OrdintervalError(f"{path}:{line_num}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key in _BOOL_KEYS:
                out[key] = value.lower() in ("1", "true", "yes", "on")
            elif key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            else:
                out[key] = value
    return out


def _merged_options(args: argparse.Namespace) -> dict:
    """flag > config file > built-in default, per option."""
    merged = dict(vars(args))
    config_path = merged.pop("config", None)
    if config_path:
        config = read_config_file(config_path)
        for key, value in config.items():
            if key in merged and merged[key] is None:
                merged[key] = value
    return merged


def _settings_from(options: dict) -> RunSettings:
    defaults = RunSettings()
    chosen = {
        key: options[key]
        for key in _SETTINGS_KEYS
        if key in options and options[key] is not None
    }
    return RunSettings(**{**{f.name: getattr(defaults, f.name) for f in fields(RunSettings)}, **chosen})


def _load_any_dataset(path: str, n_classes: int | None):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
    columns = [c.strip() for c in header.split(",")]
    if "channel" in columns:
        return read_ivf_csv(path, n_classes=n_classes)
    return read_ivd_csv(path, n_classes=n_classes)


def _add_settings_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma", type=float, default=None, help="kernel spread (default 1.0)")
    parser.add_argument("--k", type=int, default=None, help="neighbor count (default 7)")
    parser.add_argument(
        "--weight-kernel", choices=("triangular", "rectangular"), default=None, dest="weight_kernel"
    )
    parser.add_argument("--of-n-sets", type=int, default=None, dest="of_n_sets")
    parser.add_argument("--of-trees-per-set", type=int, default=None, dest="of_trees_per_set")
    parser.add_argument("--of-n-best", type=int, default=None, dest="of_n_best")
    parser.add_argument("--of-trees-final", type=int, default=None, dest="of_trees_final")
    parser.add_argument("--min-leaf", type=int, default=None, dest="min_leaf")
    parser.add_argument("--mtry", type=int, default=None)
    parser.add_argument("--kpca-mass", type=float, default=None, dest="kpca_mass")
    parser.add_argument(
        "--kpca-max-components", type=int, default=None, dest="kpca_max_components"
    )
    parser.add_argument("--subsample-step", type=int, default=None, dest="subsample_step")
    parser.add_argument("--ridge", type=float, default=None)
    parser.add_argument("--config", default=None, help="flat key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordinterval",
        description="Ordinal classification for interval-valued data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic IVD dataset CSV")
    gen.add_argument("--design", required=True, help=f"one of {', '.join(sorted(DESIGNS))}")
    gen.add_argument("--n-per-class", type=int, default=None, dest="n_per_class")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("-o", "--out", required=True)
    gen.add_argument("--config", default=None)

    fit = sub.add_parser("fit", help="fit a model and write it as JSON")
    fit.add_argument("--method", required=True, help=f"one of {', '.join(VECTOR_METHODS)}")
    fit.add_argument("--data", required=True, help="training CSV (IVD or IVF)")
    fit.add_argument("--n-classes", type=int, default=None, dest="n_classes")
    fit.add_argument("--seed", type=int, default=None)
    fit.add_argument("-o", "--out", required=True)
    _add_settings_flags(fit)

    predict = sub.add_parser("predict", help="apply a stored model to a CSV")
    predict.add_argument("--model", required=True)
    predict.add_argument("--data", required=True)
    predict.add_argument("-o", "--out", required=True)
    predict.add_argument("--config", default=None)

    bench = sub.add_parser("bench", help="run the Monte Carlo benchmark")
    group = bench.add_mutually_exclusive_group(required=True)
    group.add_argument("--design", help=f"one of {', '.join(sorted(DESIGNS))}")
    group.add_argument("--data", help="fixed dataset CSV, re-split each replicate")
    bench.add_argument("--methods", default=None, help="'all' or comma-separated names")
    bench.add_argument("--reps", type=int, default=None)
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--train-frac", type=float, default=None, dest="train_frac")
    bench.add_argument("--jobs", type=int, default=None)
    bench.add_argument(
        "--no-standardize",
        action="store_const",
        const=False,
        default=None,
        dest="standardize",
        help="skip per-split feature standardization",
    )
    bench.add_argument("--n-classes", type=int, default=None, dest="n_classes")
    bench.add_argument("-o", "--out", required=True, help="report JSON path (CSV written beside)")
    _add_settings_flags(bench)

    return parser


def _cmd_gen(options: dict) -> int:
    design_name = options["design"]
    if design_name not in DESIGNS:
        raise OrdintervalError(f"unknown design {design_name!r}; choose from {sorted(DESIGNS)}")
    seed = options.get("seed") or 0
    data = gen_synthetic(
        DESIGNS[design_name], RngStream(seed), n_per_class=options.get("n_per_class")
    )
    write_ivd_csv(options["out"], data.ids, data.observations, data.labels)
    print(f"wrote {data.n} observations to {options['out']}")
    return 0


def _cmd_fit(options: dict) -> int:
    loaded = _load_any_dataset(options["data"], options.get("n_classes"))
    if not isinstance(loaded, LabeledDataset):
        raise OrdintervalError(f"{options['data']} has no label column; cannot fit")
    settings = _settings_from(options)
    seed = options.get("seed") or 0
    fitted = fit_method(options["method"], loaded, settings, RngStream(seed))
    save_model(options["out"], fitted)
    print(f"fitted {options['method']} on {loaded.n} observations -> {options['out']}")
    return 0


def _cmd_predict(options: dict) -> int:
    fitted = load_model(options["model"])
    loaded = _load_any_dataset(options["data"], None)
    if isinstance(loaded, LabeledDataset):
        ids, observations = loaded.ids, loaded.observations
    else:
        ids, observations = loaded
    labels = fitted.predict(observations)
    probabilities = None
    if fitted.method in PROBABILISTIC_METHODS:
        probabilities = fitted.predict_proba(observations)
    write_predictions_csv(options["out"], ids, labels, probabilities)
    print(f"wrote {len(labels)} predictions to {options['out']}")
    return 0


def _cmd_bench(options: dict) -> int:
    if options.get("design"):
        if options["design"] not in DESIGNS:
            raise OrdintervalError(
                f"unknown design {options['design']!r}; choose from {sorted(DESIGNS)}"
            )
        source = DESIGNS[options["design"]]
        functional = False
    else:
        loaded = _load_any_dataset(options["data"], options.get("n_classes"))
        if not isinstance(loaded, LabeledDataset):
            raise OrdintervalError(f"{options['data']} has no label column; cannot benchmark")
        source = loaded
        functional = loaded.is_functional
    methods_opt = options.get("methods") or "all"
    if methods_opt == "all":
        methods = list(supported_methods(functional))
    else:
        methods = [m.strip() for m in methods_opt.split(",") if m.strip()]
    report = run_mc(
        source,
        methods,
        settings=_settings_from(options),
        reps=options.get("reps") if options.get("reps") is not None else 50,
        seed=options.get("seed") or 0,
        train_frac=options.get("train_frac") if options.get("train_frac") is not None else 0.8,
        standardize=options.get("standardize") if options.get("standardize") is not None else True,
        jobs=options.get("jobs") or 1,
    )
    out = options["out"]
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(report_to_json(report))
    csv_path = out[:-5] + ".csv" if out.endswith(".json") else out + ".csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(aggregate_csv(report))
    print(format_table(report))
    print(f"report: {out}\naggregate: {csv_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    np.seterr(over="ignore")  # overflow in exp tails is handled explicitly
    try:
        options = _merged_options(args)
        if args.command == "gen":
            return _cmd_gen(options)
        if args.command == "fit":
            return _cmd_fit(options)
        if args.command == "predict":
            return _cmd_predict(options)
        return _cmd_bench(options)
    except _FIT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OrdintervalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
