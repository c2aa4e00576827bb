"""Core data types for interval-valued and interval-valued functional data.

An observation is either a vector of K intervals (IVD) or a set of V
lower/upper curve pairs sampled on a shared time grid (IVF). All containers
are immutable after construction: the backing numpy arrays are marked
read-only so observations can be shared freely across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    DegenerateInterval,
    EmptyGrid,
    InvalidInterval,
    InvalidParameter,
    ShapeMismatch,
    TooManyClasses,
    ZeroVariance,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Interval:
    """A closed real interval [lower, upper] with lower <= upper."""

    lower: float
    upper: float

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def make_interval(lower: float, upper: float) -> Interval:
    """Validate and build an Interval; bounds are preserved exactly."""
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise InvalidInterval(f"bounds must be finite, got [{lower}, {upper}]")
    if lower > upper:
        raise InvalidInterval(f"lower > upper: [{lower}, {upper}]")
    return Interval(float(lower), float(upper))


def midpoint_logrange(x: Interval) -> tuple[float, float]:
    """Recode an interval as (midpoint, log-range) = ((l+u)/2, ln(u-l)).

    Only defined for non-degenerate intervals, since the log-range of a
    zero-width interval is -inf.
    """
    if x.degenerate:
        raise DegenerateInterval(f"log-range undefined for [{x.lower}, {x.upper}]")
    return x.midpoint, math.log(x.width)


class IntervalVector:
    """An observation made of K intervals, stored as lower/upper arrays."""

    __slots__ = ("lower", "upper")

    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        lo = np.asarray(lower, dtype=np.float64)
        up = np.asarray(upper, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != up.shape:
            raise ShapeMismatch("lower and upper must be equal-length 1-d sequences")
        if lo.size < 1:
            raise InvalidInterval("an interval vector needs at least one feature")
        if not (np.isfinite(lo).all() and np.isfinite(up).all()):
            raise InvalidInterval("non-finite interval bound")
        if np.any(lo > up):
            k = int(np.argmax(lo > up))
            raise InvalidInterval(f"feature {k}: lower {lo[k]} > upper {up[k]}")
        self.lower = _readonly(lo)
        self.upper = _readonly(up)

    @classmethod
    def from_intervals(cls, intervals: Sequence[Interval]) -> "IntervalVector":
        return cls([iv.lower for iv in intervals], [iv.upper for iv in intervals])

    def __len__(self) -> int:
        return self.lower.size

    def interval(self, k: int) -> Interval:
        return Interval(float(self.lower[k]), float(self.upper[k]))

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntervalVector)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    def __repr__(self) -> str:
        return f"IntervalVector(K={len(self)})"


class IntervalCurve:
    """An interval-valued function sampled on a shared grid.

    ``lower`` and ``upper`` have shape (V, T): V channels, T grid points.
    The grid must be strictly increasing and lower(t) <= upper(t) must hold
    at every channel and grid point.
    """

    __slots__ = ("grid", "lower", "upper")

    def __init__(self, grid: Sequence[float], lower, upper):
        g = np.asarray(grid, dtype=np.float64)
        lo = np.atleast_2d(np.asarray(lower, dtype=np.float64))
        up = np.atleast_2d(np.asarray(upper, dtype=np.float64))
        if g.ndim != 1 or g.size < 1:
            raise ShapeMismatch("grid must be a nonempty 1-d sequence")
        if np.any(np.diff(g) <= 0):
            raise InvalidParameter("grid must be strictly increasing")
        if lo.shape != up.shape or lo.shape[1] != g.size:
            raise ShapeMismatch(
                f"bounds shaped {lo.shape}/{up.shape} do not match grid of length {g.size}"
            )
        if not (np.isfinite(lo).all() and np.isfinite(up).all() and np.isfinite(g).all()):
            raise InvalidInterval("non-finite curve value")
        if np.any(lo > up):
            raise InvalidInterval("lower curve exceeds upper curve somewhere")
        self.grid = _readonly(g)
        self.lower = _readonly(lo)
        self.upper = _readonly(up)

    @property
    def n_channels(self) -> int:
        return self.lower.shape[0]

    @property
    def n_points(self) -> int:
        return self.grid.size

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntervalCurve)
            and np.array_equal(self.grid, other.grid)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    def __repr__(self) -> str:
        return f"IntervalCurve(V={self.n_channels}, T={self.n_points})"


Observation = Union[IntervalVector, IntervalCurve]


@dataclass(frozen=True)
class LabeledDataset:
    """N observations (all-IVD or all-IVF) with ordinal labels in 1..Q."""

    observations: tuple
    labels: tuple
    n_classes: int
    ids: tuple = field(default=())

    def __post_init__(self):
        obs = tuple(self.observations)
        labels = tuple(int(v) for v in self.labels)
        ids = tuple(self.ids) if self.ids else tuple(range(1, len(obs) + 1))
        if len(obs) == 0:
            raise InvalidParameter("dataset is empty")
        if len(obs) != len(labels):
            raise ShapeMismatch(f"{len(obs)} observations but {len(labels)} labels")
        if len(ids) != len(obs):
            raise ShapeMismatch("ids length does not match observations")
        if self.n_classes < 1:
            raise InvalidParameter("n_classes must be >= 1")
        if any(v < 1 or v > self.n_classes for v in labels):
            raise InvalidParameter(f"labels must lie in 1..{self.n_classes}")
        first = obs[0]
        if isinstance(first, IntervalVector):
            k = len(first)
            if any(not isinstance(o, IntervalVector) or len(o) != k for o in obs):
                raise ShapeMismatch("all observations must be IntervalVectors with equal K")
        elif isinstance(first, IntervalCurve):
            for o in obs:
                if (
                    not isinstance(o, IntervalCurve)
                    or o.n_channels != first.n_channels
                    or not np.array_equal(o.grid, first.grid)
                ):
                    raise ShapeMismatch("all curves must share grid and channel count")
        else:
            raise InvalidParameter(f"unsupported observation type {type(first)!r}")
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def is_functional(self) -> bool:
        return isinstance(self.observations[0], IntervalCurve)

    @property
    def n_features(self) -> int:
        first = self.observations[0]
        if isinstance(first, IntervalVector):
            return len(first)
        return first.n_channels * first.n_points

    def classes_present(self) -> set:
        return set(self.labels)

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        idx = list(indices)
        return LabeledDataset(
            observations=tuple(self.observations[i] for i in idx),
            labels=tuple(self.labels[i] for i in idx),
            n_classes=self.n_classes,
            ids=tuple(self.ids[i] for i in idx),
        )

    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)


def stack_bounds(observations: Sequence[IntervalVector]) -> tuple[np.ndarray, np.ndarray]:
    """Stack IVD observations into (N, K) lower/upper matrices."""
    lo = np.stack([o.lower for o in observations])
    up = np.stack([o.upper for o in observations])
    return lo, up


def stack_curves(observations: Sequence[IntervalCurve]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack IVF observations into (N, V, T) lower/upper arrays plus the grid."""
    lo = np.stack([o.lower for o in observations])
    up = np.stack([o.upper for o in observations])
    return observations[0].grid, lo, up


def percentile_labels(values: Sequence[float], n_classes: int) -> list[int]:
    """Assign ordinal codes 1..Q by empirical percentile bins.

    Cut points are the q*100/Q empirical percentiles (linear interpolation of
    order statistics) of the input itself, so classes come out approximately
    balanced. A value exactly equal to a cut point is assigned to the lower
    class; the last bin is closed above.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise InvalidParameter("values must be nonempty")
    if n_classes < 2:
        raise InvalidParameter("need at least 2 classes")
    if np.unique(vals).size < n_classes:
        raise TooManyClasses(
            f"{n_classes} classes requested but only {np.unique(vals).size} distinct values"
        )
    qs = [100.0 * q / n_classes for q in range(1, n_classes)]
    cuts = np.percentile(vals, qs, method="linear")
    return [int(c) + 1 for c in np.searchsorted(cuts, vals, side="left")]


@dataclass(frozen=True)
class StandardizationParams:
    """Pointwise midpoint mean/sd for affine standardization of IVF data."""

    grid: np.ndarray
    mean: np.ndarray  # (V, T)
    sd: np.ndarray  # (V, T), all > 0


def standardize_curves_fit(train: LabeledDataset) -> StandardizationParams:
    """Estimate per-channel, per-grid-point midpoint mean/sd on a training set.

    The sd uses the N-1 denominator. A zero sd anywhere is an error: the
    affine map would collapse the scale at that point.
    """
    if not train.is_functional:
        raise InvalidParameter("curve standardization needs an IVF dataset")
    if train.n < 2:
        raise InvalidParameter("need at least 2 observations to estimate sd")
    grid, lo, up = stack_curves(train.observations)
    mids = 0.5 * (lo + up)  # (N, V, T)
    mean = mids.mean(axis=0)
    sd = mids.std(axis=0, ddof=1)
    if np.any(sd <= 0.0):
        v, t = np.unravel_index(int(np.argmin(sd)), sd.shape)
        raise ZeroVariance(f"zero midpoint sd at channel {v}, grid index {t}")
    return StandardizationParams(grid=_readonly(grid), mean=_readonly(mean), sd=_readonly(sd))


def standardize_curves_apply(params: StandardizationParams, curve: IntervalCurve) -> IntervalCurve:
    """Apply (v - mean) / sd to both bounds; order is preserved since sd > 0."""
    if curve.lower.shape != params.mean.shape or not np.array_equal(curve.grid, params.grid):
        raise ShapeMismatch("curve grid/channels do not match standardization params")
    return IntervalCurve(
        grid=curve.grid,
        lower=(curve.lower - params.mean) / params.sd,
        upper=(curve.upper - params.mean) / params.sd,
    )


@dataclass(frozen=True)
class VectorStandardization:
    """Per-feature midpoint mean/sd for affine standardization of IVD data."""

    mean: np.ndarray  # (K,)
    sd: np.ndarray  # (K,), all > 0


def standardize_vectors_fit(train: LabeledDataset) -> VectorStandardization:
    """Per-feature analogue of curve standardization, over interval midpoints."""
    if train.is_functional:
        raise InvalidParameter("vector standardization needs an IVD dataset")
    if train.n < 2:
        raise InvalidParameter("need at least 2 observations to estimate sd")
    lo, up = stack_bounds(train.observations)
    mids = 0.5 * (lo + up)
    mean = mids.mean(axis=0)
    sd = mids.std(axis=0, ddof=1)
    if np.any(sd <= 0.0):
        raise ZeroVariance(f"zero midpoint sd at feature {int(np.argmin(sd))}")
    return VectorStandardization(mean=_readonly(mean), sd=_readonly(sd))


def standardize_vectors_apply(params: VectorStandardization, x: IntervalVector) -> IntervalVector:
    if len(x) != params.mean.size:
        raise ShapeMismatch(f"K={len(x)} does not match params K={params.mean.size}")
    return IntervalVector((x.lower - params.mean) / params.sd, (x.upper - params.mean) / params.sd)


def subsample_grid(curve: IntervalCurve, step: int) -> IntervalCurve:
    """Keep grid indices 0, step, 2*step, ... of a curve."""
    if step < 1:
        raise InvalidParameter("step must be >= 1")
    if step == 1:
        return curve
    if step >= curve.n_points:
        raise EmptyGrid(f"step {step} too coarse for a {curve.n_points}-point grid")
    keep = np.arange(0, curve.n_points, step)
    return IntervalCurve(curve.grid[keep], curve.lower[:, keep], curve.upper[:, keep])


def curve_to_vector(curve: IntervalCurve) -> IntervalVector:
    """Flatten a curve to a K = V*T interval vector, channel-major order."""
    return IntervalVector(curve.lower.reshape(-1), curve.upper.reshape(-1))


def dataset_to_vectors(data: LabeledDataset, step: int = 1) -> LabeledDataset:
    """Turn an IVF dataset into IVD by optional subsampling then flattening."""
    if not data.is_functional:
        return data
    obs = tuple(curve_to_vector(subsample_grid(c, step)) for c in data.observations)
    return LabeledDataset(observations=obs, labels=data.labels, n_classes=data.n_classes, ids=data.ids)
