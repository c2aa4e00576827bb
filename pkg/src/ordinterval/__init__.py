"""Ordinal classification for interval-valued and interval-valued
functional data: distances, kernels, six interval-aware classifiers, naive
baselines, and a reproducible Monte Carlo benchmark harness."""

from .intervals import (
    Interval,
    IntervalCurve,
    IntervalVector,
    LabeledDataset,
    curve_to_vector,
    make_interval,
    midpoint_logrange,
    percentile_labels,
    standardize_curves_apply,
    standardize_curves_fit,
    subsample_grid,
)
from .metrics import dist_curve, dist_interval, kernel_from_dist, pairwise
from .methods import RunSettings, fit_method, supported_methods
from .numeric import RngStream, minimize, mvn_sample, sym_eigen, weighted_median
from .bench import (
    DESIGNS,
    FOUR_CLASS,
    THREE_CLASS,
    evaluate,
    gen_synthetic,
    midpoint_view,
    run_mc,
    split_train_test,
)

__version__ = "0.1.0"

__all__ = [
    "Interval",
    "IntervalCurve",
    "IntervalVector",
    "LabeledDataset",
    "RngStream",
    "RunSettings",
    "DESIGNS",
    "THREE_CLASS",
    "FOUR_CLASS",
    "curve_to_vector",
    "dist_curve",
    "dist_interval",
    "evaluate",
    "fit_method",
    "gen_synthetic",
    "kernel_from_dist",
    "make_interval",
    "midpoint_logrange",
    "midpoint_view",
    "minimize",
    "mvn_sample",
    "pairwise",
    "percentile_labels",
    "run_mc",
    "split_train_test",
    "standardize_curves_apply",
    "standardize_curves_fit",
    "subsample_grid",
    "supported_methods",
    "sym_eigen",
    "weighted_median",
]
