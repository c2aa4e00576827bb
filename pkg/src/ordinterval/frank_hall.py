"""Ordinal classification by a stack of cumulative binary problems.

A Q-class ordinal problem becomes Q-1 binary problems: split q separates
{C_1..C_q} from {C_{q+1}..C_Q}. Any probabilistic binary fitter can be
plugged in; sub-model q must estimate p_q = P(y > C_q | x). Class
probabilities are recovered by differencing:

    P(C_1) = 1 - p_1,  P(C_q) = p_{q-1} - p_q,  P(C_Q) = p_{Q-1}.

Nothing forces the fitted p_q to be monotone in q, so negative differences
can occur; they are clipped to zero and the vector renormalized, which keeps
the output on the simplex without disturbing consistent stacks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySplit, FitFailed
from .intervals import LabeledDataset


@dataclass(frozen=True)
class FhModel:
    submodels: tuple  # Q-1 binary models, split q at index q-1
    predict_high: Callable  # (submodel, observations) -> P(high side) array
    n_classes: int


def fh_fit(
    data: LabeledDataset,
    binary_fitter: Callable[[LabeledDataset], object],
    binary_predict_high: Callable[[object, Sequence], np.ndarray],
) -> FhModel:
    """Train one binary sub-model per cumulative split.

    ``binary_fitter`` sees a relabeled two-class dataset (1 = low side,
    2 = high side); ``binary_predict_high`` must return P(class 2 | x).
    """
    q = data.n_classes
    labels = data.label_array()
    submodels = []
    for split in range(1, q):
        binary = (labels > split).astype(np.int64) + 1
        if (binary == 1).sum() == 0 or (binary == 2).sum() == 0:
            raise EmptySplit(f"split {split} has an empty side")
        relabeled = LabeledDataset(
            observations=data.observations,
            labels=tuple(int(b) for b in binary),
            n_classes=2,
            ids=data.ids,
        )
        try:
            submodels.append(binary_fitter(relabeled))
        except FitFailed as exc:
            raise FitFailed(f"binary sub-model for split {split} failed: {exc}") from exc
    return FhModel(submodels=tuple(submodels), predict_high=binary_predict_high, n_classes=q)


def assemble_probabilities(p_high: np.ndarray) -> np.ndarray:
    """Difference cumulative exceedance probabilities into class probabilities.

    ``p_high`` has shape (N, Q-1) with column q-1 holding P(y > C_q | x).
    Negative differences are clipped to zero and rows renormalized.
    """
    p = np.atleast_2d(np.asarray(p_high, dtype=np.float64))
    n, qm1 = p.shape
    out = np.empty((n, qm1 + 1))
    out[:, 0] = 1.0 - p[:, 0]
    out[:, 1:-1] = p[:, :-1] - p[:, 1:]
    out[:, -1] = p[:, -1]
    np.clip(out, 0.0, None, out=out)
    totals = out.sum(axis=1, keepdims=True)
    totals[totals == 0.0] = 1.0  # all-zero rows become uniform below
    out /= totals
    zero_rows = (out.sum(axis=1) == 0.0)
    if np.any(zero_rows):
        out[zero_rows] = 1.0 / out.shape[1]
    return out


def fh_predict_proba(model: FhModel, observations: Sequence) -> np.ndarray:
    p_high = np.column_stack(
        [model.predict_high(sub, observations) for sub in model.submodels]
    )
    return assemble_probabilities(p_high)


def fh_predict(model: FhModel, observations: Sequence) -> np.ndarray:
    return np.argmax(fh_predict_proba(model, observations), axis=1) + 1
