"""Distances between interval observations and the RBF kernels built on them.

For interval vectors, the per-feature gap is D_k = max(|dl_k|, |du_k|) over
endpoint differences; the plain distance sums the D_k and the Euclidean
variant takes sqrt(sum D_k^2). For curves the same pointwise gap is
integrated over the grid by the trapezoidal rule; multichannel curves
combine per-channel Euclidean values as a root sum of squares (and plain
values as a sum, matching the sum-over-features form of the vector case).

Kernels are exp(-d^2 / gamma) with the Euclidean distance of the matching
data kind, so they live in (0, 1] with value 1 exactly at distance 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, ShapeMismatch
from .intervals import (
    IntervalCurve,
    IntervalVector,
    LabeledDataset,
    stack_bounds,
    stack_curves,
)

VECTOR_KINDS = ("H", "EH")
CURVE_KINDS = ("FH", "FEH")


def dist_interval(x: IntervalVector, y: IntervalVector, kind: str = "EH") -> float:
    """Distance between two interval vectors; kind in {"H", "EH"}."""
    if len(x) != len(y):
        raise ShapeMismatch(f"K mismatch: {len(x)} vs {len(y)}")
    if kind not in VECTOR_KINDS:
        raise InvalidParameter(f"unknown interval distance kind {kind!r}")
    gaps = np.maximum(np.abs(x.lower - y.lower), np.abs(x.upper - y.upper))
    if kind == "H":
        return float(gaps.sum())
    return float(np.sqrt((gaps * gaps).sum()))


def _trapezoid(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Trapezoidal rule along the last axis, using actual grid spacings."""
    if grid.size == 1:
        return np.zeros(values.shape[:-1])
    dt = np.diff(grid)
    return 0.5 * ((values[..., 1:] + values[..., :-1]) * dt).sum(axis=-1)


def dist_curve(x: IntervalCurve, y: IntervalCurve, kind: str = "FEH") -> float:
    """Distance between two interval curves; kind in {"FH", "FEH"}.

    Per channel both kinds integrate the pointwise endpoint gap
    max(|dl(t)|, |du(t)|); they differ in how channels combine (sum for FH,
    root sum of squares for FEH).
    """
    if kind not in CURVE_KINDS:
        raise InvalidParameter(f"unknown curve distance kind {kind!r}")
    if (
        x.lower.shape != y.lower.shape
        or not np.array_equal(x.grid, y.grid)
    ):
        raise ShapeMismatch("curves must share grid and channel count")
    gaps = np.maximum(np.abs(x.lower - y.lower), np.abs(x.upper - y.upper))  # (V, T)
    per_channel = _trapezoid(gaps, x.grid)  # (V,)
    if kind == "FH":
        return float(per_channel.sum())
    return float(np.sqrt((per_channel * per_channel).sum()))


def kernel_from_dist(d: float, gamma: float = 1.0) -> float:
    """RBF kernel value exp(-d^2 / gamma) for a nonnegative distance."""
    if gamma <= 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    if d < 0:
        raise InvalidParameter(f"distance must be nonnegative, got {d}")
    return math.exp(-(d * d) / gamma)


# ---------------------------------------------------------------------------
# vectorized cross-distance matrices (the building block for pairwise
# matrices, nearest neighbors, kernel features, and kernel PCA)
# ---------------------------------------------------------------------------


def cross_dist_vectors(
    a_lower: np.ndarray,
    a_upper: np.ndarray,
    b_lower: np.ndarray,
    b_upper: np.ndarray,
    kind: str = "EH",
) -> np.ndarray:
    """All pairwise interval-vector distances between two stacked sets.

    Inputs are (Na, K) and (Nb, K); the result is (Na, Nb).
    """
    if a_lower.shape[1] != b_lower.shape[1]:
        raise ShapeMismatch("K mismatch between observation sets")
    if kind not in VECTOR_KINDS:
        raise InvalidParameter(f"unknown interval distance kind {kind!r}")
    dl = np.abs(a_lower[:, None, :] - b_lower[None, :, :])
    du = np.abs(a_upper[:, None, :] - b_upper[None, :, :])
    gaps = np.maximum(dl, du)
    if kind == "H":
        return gaps.sum(axis=2)
    return np.sqrt((gaps * gaps).sum(axis=2))


def cross_dist_curves(
    grid: np.ndarray,
    a_lower: np.ndarray,
    a_upper: np.ndarray,
    b_lower: np.ndarray,
    b_upper: np.ndarray,
    kind: str = "FEH",
) -> np.ndarray:
    """All pairwise curve distances between two stacked sets.

    Inputs are (Na, V, T) and (Nb, V, T); the result is (Na, Nb).
    """
    if a_lower.shape[1:] != b_lower.shape[1:]:
        raise ShapeMismatch("channel/grid mismatch between curve sets")
    if kind not in CURVE_KINDS:
        raise InvalidParameter(f"unknown curve distance kind {kind!r}")
    dl = np.abs(a_lower[:, None] - b_lower[None, :])  # (Na, Nb, V, T)
    du = np.abs(a_upper[:, None] - b_upper[None, :])
    per_channel = _trapezoid(np.maximum(dl, du), grid)  # (Na, Nb, V)
    if kind == "FH":
        return per_channel.sum(axis=2)
    return np.sqrt((per_channel * per_channel).sum(axis=2))


def _blocked(fn, n_a: int, per_pair: int) -> np.ndarray:
    """Apply a cross-distance kernel in query-row blocks to bound memory."""
    budget = 8_000_000  # float64 elements per temporary
    block = max(1, budget // max(1, per_pair))
    if block >= n_a:
        return fn(slice(None))
    parts = [fn(slice(s, min(s + block, n_a))) for s in range(0, n_a, block)]
    return np.concatenate(parts, axis=0)


def cross_distances(train_obs: Sequence, query_obs: Sequence, kind: str) -> np.ndarray:
    """Cross-distance matrix between two observation lists of the same type."""
    if kind in VECTOR_KINDS:
        al, au = stack_bounds(query_obs)
        bl, bu = stack_bounds(train_obs)
        per_pair = bl.shape[0] * bl.shape[1]
        return _blocked(
            lambda s: cross_dist_vectors(al[s], au[s], bl, bu, kind), al.shape[0], per_pair
        )
    grid, al, au = stack_curves(query_obs)
    grid_b, bl, bu = stack_curves(train_obs)
    if not np.array_equal(grid, grid_b):
        raise ShapeMismatch("curve sets must share the grid")
    per_pair = bl.shape[0] * bl.shape[1] * bl.shape[2]
    return _blocked(
        lambda s: cross_dist_curves(grid, al[s], au[s], bl, bu, kind), al.shape[0], per_pair
    )


@dataclass(frozen=True)
class PairwiseMatrix:
    """Dense symmetric matrix of pairwise distances or kernel values."""

    n: int
    entries: np.ndarray
    kind: str  # "distance" | "kernel"

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.shape != (self.n, self.n):
            raise ShapeMismatch(f"expected ({self.n}, {self.n}) entries, got {e.shape}")
        if self.kind not in ("distance", "kernel"):
            raise InvalidParameter(f"kind must be 'distance' or 'kernel', got {self.kind!r}")
        if float(np.abs(e - e.T).max(initial=0.0)) > 1e-12:
            raise InvalidParameter("pairwise matrix is not symmetric")
        diag = np.diagonal(e)
        target = 0.0 if self.kind == "distance" else 1.0
        if float(np.abs(diag - target).max(initial=0.0)) > 1e-12:
            raise InvalidParameter(f"{self.kind} matrix diagonal must be {target}")


def pairwise(
    data: LabeledDataset | Sequence,
    kind: str,
    gamma: float = 1.0,
    as_kernel: bool = False,
) -> PairwiseMatrix:
    """Pairwise distance (or kernel) matrix over a homogeneous dataset.

    Only the upper triangle is computed; the lower is mirrored, so exact
    symmetry holds. ``kind`` selects the distance; with ``as_kernel`` the
    entries become exp(-d^2 / gamma).
    """
    obs = list(data.observations) if isinstance(data, LabeledDataset) else list(data)
    n = len(obs)
    full = cross_distances(obs, obs, kind)
    out = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    out[iu] = full[iu]
    out = out + out.T
    if as_kernel:
        if gamma <= 0:
            raise InvalidParameter(f"gamma must be positive, got {gamma}")
        out = np.exp(-(out * out) / gamma)
        return PairwiseMatrix(n=n, entries=out, kind="kernel")
    return PairwiseMatrix(n=n, entries=out, kind="distance")


def write_matrix_csv(path: str, matrix: PairwiseMatrix, ids: Sequence) -> None:
    """Dump a pairwise matrix as CSV with an id header row and column."""
    if len(ids) != matrix.n:
        raise ShapeMismatch("ids length does not match matrix size")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("id," + ",".join(str(i) for i in ids) + "\n")
        for i, row_id in enumerate(ids):
            row = ",".join(repr(float(v)) for v in matrix.entries[i])
            fh.write(f"{row_id},{row}\n")
