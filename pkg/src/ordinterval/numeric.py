"""Numerical backbone: seeded RNG streams, 2-d normal sampling, symmetric
eigendecomposition, quasi-Newton minimization, and the weighted median.

Randomness is organized as independent streams keyed by (seed, path of
stream ids). Streams are backed by the counter-based Philox generator via
``numpy.random.SeedSequence`` spawn keys, so any (seed, path) pair yields the
same draws on every platform and splitting never correlates siblings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameter, NotSymmetric, NumericalFailure


class RngStream:
    """A reproducible random stream identified by a seed and a split path."""

    __slots__ = ("seed", "path", "gen")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self.gen = np.random.Generator(np.random.Philox(ss))

    def split(self, *ids: int) -> "RngStream":
        """Derive an independent child stream; never reuses this stream's state."""
        return RngStream(self.seed, self.path + tuple(int(i) for i in ids))

    # thin passthroughs for the handful of draw kinds the package needs
    def uniform(self, low=0.0, high=1.0, size=None):
        return self.gen.uniform(low, high, size)

    def standard_normal(self, size=None):
        return self.gen.standard_normal(size)

    def integers(self, low, high=None, size=None):
        return self.gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.gen.permutation(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"


def mvn_sample(
    rng: RngStream,
    mean: Sequence[float],
    sigma1: float,
    sigma2: float,
    rho: float,
    size: int | None = None,
):
    """Draw from a 2-d normal with the given means, sds, and correlation.

    Uses the Cholesky factor of the 2x2 covariance, so rho = 0 gives exactly
    independent components. Returns shape (2,) or (size, 2).
    """
    if not (sigma1 > 0 and sigma2 > 0):
        raise InvalidParameter(f"sds must be positive, got ({sigma1}, {sigma2})")
    if not abs(rho) < 1:
        raise InvalidParameter(f"|rho| must be < 1, got {rho}")
    mu = np.asarray(mean, dtype=np.float64)
    if mu.shape != (2,):
        raise InvalidParameter("mean must have length 2")
    chol = np.array(
        [[sigma1, 0.0], [rho * sigma2, sigma2 * np.sqrt(1.0 - rho * rho)]]
    )
    z = rng.standard_normal((1 if size is None else size, 2))
    out = mu + z @ chol.T
    return out[0] if size is None else out


@dataclass(frozen=True)
class SymmetricEigen:
    """Full spectrum of a symmetric matrix, eigenvalues descending."""

    values: np.ndarray  # (n,)
    vectors: np.ndarray  # (n, n), orthonormal columns


def sym_eigen(a: np.ndarray, tol: float = 1e-10) -> SymmetricEigen:
    """Eigendecompose a symmetric matrix with a deterministic sign convention.

    Eigenvalues are returned in descending order; each eigenvector is flipped
    so its largest-magnitude component is positive (ties resolved by the
    first such component).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > tol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return SymmetricEigen(values=vals, vectors=vecs * signs)


def minimize(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    tol: float = 1e-8,
    max_iter: int = 200,
) -> tuple[np.ndarray, bool]:
    """BFGS with backtracking line search.

    Stops when the gradient inf-norm drops to ``tol`` (converged=True) or
    after ``max_iter`` accepted steps (converged=False; callers decide what a
    non-converged fit means). The objective is non-increasing along accepted
    steps by construction of the Armijo backtracking rule.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    n = x.size
    fx = float(f(x))
    g = np.asarray(grad(x), dtype=np.float64)
    if not (np.isfinite(fx) and np.isfinite(g).all()):
        raise NumericalFailure("non-finite objective or gradient at the start point")
    h = np.eye(n)  # inverse Hessian approximation
    first_update = True
    for _ in range(max_iter):
        if float(np.abs(g).max()) <= tol:
            return x, True
        d = -h @ g
        slope = float(d @ g)
        if slope >= 0.0:  # lost positive-definiteness; reset to steepest descent
            h = np.eye(n)
            first_update = True
            d = -g
            slope = -float(g @ g)
        step = 1.0
        accepted = False
        for _bt in range(60):
            x_new = x + step * d
            f_new = f(x_new)
            if np.isfinite(f_new) and f_new <= fx + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # descent not verifiable at machine-small steps: the point is final
            return x, float(np.abs(g).max()) <= tol
        g_new = np.asarray(grad(x_new), dtype=np.float64)
        if not np.isfinite(g_new).all() or not np.isfinite(f_new):
            raise NumericalFailure("non-finite objective or gradient during minimization")
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)) and sy > 0:
            if first_update:
                h *= sy / float(yv @ yv)  # initial curvature scaling
                first_update = False
            rho_ = 1.0 / sy
            hy = h @ yv
            yhy = float(yv @ hy)
            h = (
                h
                - rho_ * (np.outer(s, hy) + np.outer(hy, s))
                + rho_ * rho_ * (yhy + sy) * np.outer(s, s)
            )
        x, fx, g = x_new, float(f_new), g_new
    return x, float(np.abs(g).max()) <= tol


def weighted_median(classes: Sequence[int], weights: Sequence[float]) -> int:
    """Smallest class whose cumulative weight reaches half the total.

    This is the weighted median of the class codes under the
    lower-class-on-ties convention: it minimizes sum_i w_i |c_i - m| and
    picks the smallest minimizer.
    """
    c = np.asarray(classes, dtype=np.int64)
    w = np.asarray(weights, dtype=np.float64)
    if c.shape != w.shape or c.ndim != 1 or c.size == 0:
        raise InvalidParameter("classes and weights must be equal-length nonempty 1-d")
    if np.any(w < 0):
        raise InvalidParameter("weights must be nonnegative")
    total = float(w.sum())
    if total <= 0.0:
        raise InvalidParameter("total weight must be positive")
    order = np.argsort(c, kind="stable")
    cum = np.cumsum(w[order])
    pos = int(np.searchsorted(cum, 0.5 * total, side="left"))
    pos = min(pos, c.size - 1)  # guard against rounding in the final cumsum entry
    return int(c[order][pos])
