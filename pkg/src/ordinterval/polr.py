"""Proportional-odds (cumulative logit) ordinal regression.

The model is logit P(y <= q | x) = zeta_q - beta'x with strictly increasing
thresholds zeta_1 < ... < zeta_{Q-1}. Fitting maximizes the multinomial
likelihood of the cumulative logits with a small ridge penalty on beta;
monotone thresholds are enforced by optimizing (zeta_1, log-increments)
unconstrained. Interval observations enter through a feature recipe that
says which real columns were extracted from the intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitFailed, InvalidParameter, ShapeMismatch
from .intervals import LabeledDataset, stack_bounds
from .numeric import minimize

RECIPES = ("midpoint", "bounds", "lower", "upper")

DEFAULT_RIDGE = 1e-6


def design_matrix(data: LabeledDataset, recipe: str) -> np.ndarray:
    """Real design matrix extracted from an IVD dataset by a feature recipe."""
    if data.is_functional:
        raise InvalidParameter("vectorize curves before building a design matrix")
    if recipe not in RECIPES:
        raise InvalidParameter(f"unknown feature recipe {recipe!r}")
    lo, up = stack_bounds(data.observations)
    if recipe == "midpoint":
        return 0.5 * (lo + up)
    if recipe == "lower":
        return lo
    if recipe == "upper":
        return up
    n, k = lo.shape
    out = np.empty((n, 2 * k))
    out[:, 0::2] = lo
    out[:, 1::2] = up
    return out


def _log_logistic(z: np.ndarray) -> np.ndarray:
    # log F(z) computed without overflow on either tail
    out = np.where(z > 0, -np.log1p(np.exp(-np.abs(z))), z - np.log1p(np.exp(-np.abs(z))))
    return out


def _logistic(z: np.ndarray) -> np.ndarray:
    return np.exp(_log_logistic(z))


def _unpack(theta: np.ndarray, n_classes: int, n_features: int):
    zeta1 = theta[0]
    incr = np.exp(theta[1 : n_classes - 1])
    zeta = zeta1 + np.concatenate([[0.0], np.cumsum(incr)])
    beta = theta[n_classes - 1 :]
    assert beta.size == n_features
    return zeta, incr, beta


def polr_objective(
    theta: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    ridge: float = DEFAULT_RIDGE,
) -> tuple[float, np.ndarray]:
    """Penalized negative log-likelihood and its analytic gradient.

    ``theta`` packs (zeta_1, log-increments of the remaining thresholds,
    beta). The ridge penalty applies to beta only.
    """
    n, p = x.shape
    q = n_classes
    zeta, incr, beta = _unpack(np.asarray(theta, dtype=np.float64), q, p)
    eta = x @ beta
    # u = zeta_y - eta (or +inf for the top class), v = zeta_{y-1} - eta (or -inf)
    top = y == q
    bottom = y == 1
    u = np.where(top, np.inf, zeta[np.minimum(y, q - 1) - 1] - eta)
    v = np.where(bottom, -np.inf, zeta[np.maximum(y - 2, 0)] - eta)

    loglik = np.empty(n)
    gu = np.zeros(n)  # d log P / d u  (coefficient of the zeta_y direction)
    gv = np.zeros(n)  # d log P / d v
    interior = ~(top | bottom)
    if np.any(bottom):
        ub = u[bottom]
        loglik[bottom] = _log_logistic(ub)
        gu[bottom] = _logistic(-ub)
    if np.any(top):
        vt = v[top]
        loglik[top] = _log_logistic(-vt)
        gv[top] = -_logistic(vt)
    if np.any(interior):
        ui = u[interior]
        vi = v[interior]
        gap = -np.expm1(vi - ui)  # 1 - exp(v - u) in (0, 1]
        # P = F(u) - F(v) = F(u) F(-v) gap, so f(u)/P = F(-u) / (F(-v) gap)
        # and f(v)/P = F(v) / (F(u) gap)
        with np.errstate(divide="ignore", invalid="ignore"):
            loglik[interior] = _log_logistic(ui) + _log_logistic(-vi) + np.log(gap)
            gu[interior] = _logistic(-ui) / (_logistic(-vi) * gap)
            gv[interior] = -_logistic(vi) / (_logistic(ui) * gap)

    nll = -float(loglik.sum()) + ridge * float(beta @ beta)

    # gradient w.r.t. each threshold: class-q rows push zeta_q via gu,
    # class-(q+1) rows push zeta_q via gv
    grad_zeta = np.zeros(q - 1)
    for j in range(1, q):
        grad_zeta[j - 1] = -(gu[y == j].sum() + gv[y == j + 1].sum())
    grad_beta = x.T @ (gu + gv) + 2.0 * ridge * beta
    # chain rule through zeta_q = zeta_1 + sum_{2..q} exp(s_j)
    grad = np.empty_like(theta, dtype=np.float64)
    grad[0] = grad_zeta.sum()
    if q > 2:
        tail = np.cumsum(grad_zeta[::-1])[::-1]  # sum over thresholds >= j
        grad[1 : q - 1] = incr * tail[1:]
    grad[q - 1 :] = grad_beta
    return nll, grad


@dataclass(frozen=True)
class PolrModel:
    zeta: np.ndarray  # (Q-1,), strictly increasing
    beta: np.ndarray  # (p,)
    n_classes: int
    recipe: str
    grad_norm: float

    @property
    def n_features(self) -> int:
        return self.beta.size


def polr_fit(
    x: np.ndarray,
    y: np.ndarray,
    n_classes: int | None = None,
    ridge: float = DEFAULT_RIDGE,
    recipe: str = "midpoint",
    tol: float = 1e-6,
    max_iter: int = 500,
) -> PolrModel:
    """Fit the cumulative logit model by quasi-Newton maximum likelihood.

    Columns are standardized internally for conditioning and the parameters
    mapped back, so the returned model is expressed in the raw feature scale.
    The default gradient tolerance sits at the rounding floor of a
    double-precision likelihood sum; tighter values stall the line search.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ShapeMismatch(f"design {x.shape} does not match {y.size} labels")
    n, p = x.shape
    q = int(n_classes) if n_classes is not None else int(y.max())
    present = np.unique(y)
    if present.size < 2 or present[0] < 1 or present[-1] > q:
        raise InvalidParameter(f"labels must cover >= 2 classes within 1..{q}")
    if set(range(1, q + 1)) - set(present.tolist()):
        raise InvalidParameter("every class 1..Q must appear in the training labels")
    if n <= p + q:
        raise FitFailed(f"too few observations ({n}) for {p} features and {q} classes")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    xs = (x - mean) / scale

    counts = np.bincount(y, minlength=q + 1)[1:]
    cum = np.cumsum(counts)[:-1] / n
    zeta0 = np.log(cum / (1.0 - cum))
    theta0 = np.zeros(q - 1 + p)
    theta0[0] = zeta0[0]
    if q > 2:
        theta0[1 : q - 1] = np.log(np.diff(zeta0))

    def f(theta):
        return polr_objective(theta, xs, y, q, ridge)[0]

    def g(theta):
        return polr_objective(theta, xs, y, q, ridge)[1]

    theta, converged = minimize(f, g, theta0, tol=tol, max_iter=max_iter)
    grad_norm = float(np.abs(g(theta)).max())
    if not converged:
        raise FitFailed(
            f"cumulative logit fit did not converge: grad inf-norm {grad_norm:.3e} "
            f"after {max_iter} iterations (n={n}, p={p}, Q={q})"
        )
    zeta_s, _, beta_s = _unpack(theta, q, p)
    beta = beta_s / scale
    zeta = zeta_s + float(beta @ mean)
    return PolrModel(zeta=zeta, beta=beta, n_classes=q, recipe=recipe, grad_norm=grad_norm)


def polr_predict_proba(model: PolrModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities by successive differences of cumulative logits."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.n_features:
        raise ShapeMismatch(f"expected {model.n_features} features, got {x.shape[1]}")
    eta = x @ model.beta
    cum = _logistic(model.zeta[None, :] - eta[:, None])  # (N, Q-1), non-decreasing
    out = np.empty((x.shape[0], model.n_classes))
    out[:, 0] = cum[:, 0]
    out[:, 1:-1] = np.diff(cum, axis=1)
    out[:, -1] = 1.0 - cum[:, -1]
    return out


def polr_predict(model: PolrModel, x: np.ndarray) -> np.ndarray:
    """Argmax labels; ties resolve to the lower class."""
    return np.argmax(polr_predict_proba(model, x), axis=1) + 1


def polr_i_fit(data: LabeledDataset, **kwargs) -> PolrModel:
    """Ordinal regression on both interval bounds as 2K separate features."""
    x = design_matrix(data, "bounds")
    return polr_fit(x, data.label_array(), n_classes=data.n_classes, recipe="bounds", **kwargs)


@dataclass(frozen=True)
class PolrI2Model:
    """Two bound-specific ordinal regressions whose probabilities average."""

    lower_model: PolrModel
    upper_model: PolrModel

    @property
    def n_classes(self) -> int:
        return self.lower_model.n_classes


def polr_i2_fit(data: LabeledDataset, **kwargs) -> PolrI2Model:
    y = data.label_array()
    try:
        low = polr_fit(
            design_matrix(data, "lower"), y, n_classes=data.n_classes, recipe="lower", **kwargs
        )
    except FitFailed as exc:
        raise FitFailed(f"lower-bound model: {exc}") from exc
    try:
        up = polr_fit(
            design_matrix(data, "upper"), y, n_classes=data.n_classes, recipe="upper", **kwargs
        )
    except FitFailed as exc:
        raise FitFailed(f"upper-bound model: {exc}") from exc
    return PolrI2Model(lower_model=low, upper_model=up)


def polr_i2_predict_proba(model: PolrI2Model, data: LabeledDataset) -> np.ndarray:
    pl = polr_predict_proba(model.lower_model, design_matrix(data, "lower"))
    pu = polr_predict_proba(model.upper_model, design_matrix(data, "upper"))
    return 0.5 * (pl + pu)
