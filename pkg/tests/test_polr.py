import numpy as np
import pytest

from ordinterval.errors import FitFailed, InvalidParameter, ShapeMismatch
from ordinterval.intervals import IntervalVector, LabeledDataset
from ordinterval.numeric import RngStream
from ordinterval.polr import (
    PolrModel,
    design_matrix,
    polr_fit,
    polr_i2_fit,
    polr_i2_predict_proba,
    polr_i_fit,
    polr_objective,
    polr_predict,
    polr_predict_proba,
)


def simulate_polr(rng, n, zeta, beta):
    """Draw (x, y) from the cumulative-logit model."""
    zeta = np.asarray(zeta, dtype=float)
    beta = np.asarray(beta, dtype=float)
    x = rng.standard_normal((n, beta.size))
    eta = x @ beta
    cum = 1.0 / (1.0 + np.exp(-(zeta[None, :] - eta[:, None])))
    u = rng.uniform(size=n)
    y = 1 + (u[:, None] > cum).sum(axis=1)
    return x, y.astype(np.int64)


def interval_data(rng, n=60, k=2, q=3):
    lo = rng.standard_normal((n, k))
    obs = tuple(IntervalVector(lo[i], lo[i] + rng.uniform(0.1, 2, k)) for i in range(n))
    labels = tuple(int(v) for v in rng.integers(1, q + 1, n))
    labels = labels[: n - q] + tuple(range(1, q + 1))  # force coverage
    return LabeledDataset(observations=obs, labels=labels, n_classes=q)


class TestGradient:
    def test_matches_central_differences_at_random_points(self):
        rng = np.random.default_rng(31)
        x = rng.standard_normal((40, 3))
        y = rng.integers(1, 5, size=40)
        y[:4] = [1, 2, 3, 4]
        for _ in range(20):
            theta = rng.standard_normal(3 + 3)
            _, grad = polr_objective(theta, x, y, 4)
            eps = 1e-6
            fd = np.empty_like(theta)
            for i in range(theta.size):
                tp, tm = theta.copy(), theta.copy()
                tp[i] += eps
                tm[i] -= eps
                fd[i] = (
                    polr_objective(tp, x, y, 4)[0] - polr_objective(tm, x, y, 4)[0]
                ) / (2 * eps)
            denom = max(1.0, float(np.abs(fd).max()))
            assert np.abs(grad - fd).max() / denom <= 1e-6


class TestFit:
    def test_parameter_recovery(self):
        rng = np.random.default_rng(7)
        x, y = simulate_polr(rng, 5000, zeta=[-1.0, 1.0], beta=[1.0])
        model = polr_fit(x, y, n_classes=3)
        assert np.abs(model.zeta - [-1.0, 1.0]).max() < 0.1
        assert abs(model.beta[0] - 1.0) < 0.1

    def test_intercept_only_reduction_on_noise(self):
        rng = np.random.default_rng(8)
        n = 3000
        y = np.concatenate([np.full(900, 1), np.full(1500, 2), np.full(600, 3)])
        rng.shuffle(y)
        x = rng.standard_normal((n, 2))  # pure noise
        model = polr_fit(x, y, n_classes=3)
        probs = polr_predict_proba(model, np.zeros((1, 2)))[0]
        freq = np.array([0.3, 0.5, 0.2])
        assert np.abs(probs - freq).max() < 0.02

    def test_single_class_is_a_precondition_error(self):
        x = np.random.default_rng(0).standard_normal((30, 2))
        with pytest.raises(InvalidParameter):
            polr_fit(x, np.ones(30, dtype=int), n_classes=3)

    def test_too_many_features_is_fit_failure(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((10, 12))
        y = np.array([1, 2, 3] * 3 + [1])
        with pytest.raises(FitFailed):
            polr_fit(x, y, n_classes=3)

    def test_thresholds_strictly_increasing(self):
        rng = np.random.default_rng(5)
        x, y = simulate_polr(rng, 800, zeta=[-0.5, 0.2, 1.4], beta=[0.7, -0.3])
        model = polr_fit(x, y, n_classes=4)
        assert np.all(np.diff(model.zeta) > 0)

    def test_rescaling_a_feature_keeps_heldout_labels(self):
        rng = np.random.default_rng(12)
        x, y = simulate_polr(rng, 600, zeta=[-1.0, 0.8], beta=[1.2, -0.5])
        x_test = rng.standard_normal((200, 2))
        base = polr_fit(x, y, n_classes=3)
        scaled = x.copy()
        scaled[:, 0] = 3.5 * scaled[:, 0] - 2.0
        rescaled = polr_fit(scaled, y, n_classes=3)
        x_test_scaled = x_test.copy()
        x_test_scaled[:, 0] = 3.5 * x_test_scaled[:, 0] - 2.0
        assert np.array_equal(
            polr_predict(base, x_test), polr_predict(rescaled, x_test_scaled)
        )


class TestPredict:
    def test_scalar_logistic_example(self):
        model = PolrModel(
            zeta=np.array([0.0, 1.0]), beta=np.array([0.0]), n_classes=3,
            recipe="midpoint", grad_norm=0.0,
        )
        probs = polr_predict_proba(model, np.array([[5.0]]))[0]
        assert probs == pytest.approx([0.5, 0.2310585786, 0.2689414214], abs=1e-9)

    def test_extreme_linear_predictor_sends_mass_to_top_class(self):
        model = PolrModel(
            zeta=np.array([0.0, 1.0]), beta=np.array([1.0]), n_classes=3,
            recipe="midpoint", grad_norm=0.0,
        )
        probs = polr_predict_proba(model, np.array([[60.0]]))[0]
        assert probs[2] > 0.999999

    def test_rows_sum_to_one_and_cumulative_monotone(self):
        rng = np.random.default_rng(3)
        model = PolrModel(
            zeta=np.array([-0.7, 0.1, 2.0]), beta=rng.standard_normal(4),
            n_classes=4, recipe="midpoint", grad_norm=0.0,
        )
        x = rng.standard_normal((200, 4)) * 3
        probs = polr_predict_proba(model, x)
        assert np.abs(probs.sum(axis=1) - 1.0).max() <= 1e-12
        assert np.all(probs >= 0)
        cum = np.cumsum(probs, axis=1)
        assert np.all(np.diff(cum, axis=1) >= -1e-15)

    def test_dimension_mismatch(self):
        model = PolrModel(
            zeta=np.array([0.0]), beta=np.array([1.0, 2.0]), n_classes=2,
            recipe="midpoint", grad_norm=0.0,
        )
        with pytest.raises(ShapeMismatch):
            polr_predict_proba(model, np.array([[1.0]]))


class TestIntervalVariants:
    def test_bounds_recipe_has_two_columns_per_feature(self):
        rng = np.random.default_rng(21)
        data = interval_data(rng, n=60, k=2)
        x = design_matrix(data, "bounds")
        assert x.shape == (60, 4)
        lo, up = data.observations[0].lower, data.observations[0].upper
        assert x[0].tolist() == [lo[0], up[0], lo[1], up[1]]
        model = polr_i_fit(data)
        assert model.n_features == 4 and model.recipe == "bounds"

    def test_degenerate_intervals_are_fine(self):
        rng = np.random.default_rng(4)
        mid = rng.standard_normal((40, 2))
        obs = tuple(IntervalVector(m, m) for m in mid)
        labels = tuple(int(v) for v in rng.integers(1, 4, 40))
        labels = labels[:37] + (1, 2, 3)
        data = LabeledDataset(observations=obs, labels=labels, n_classes=3)
        model = polr_i_fit(data)
        assert model.n_features == 4

    def test_lower_signal_beats_intercept_only_likelihood(self):
        rng = np.random.default_rng(17)
        n = 150
        y = np.sort(rng.integers(1, 4, n))
        y[:3] = [1, 2, 3]
        lo = y[:, None] * 2.0 + rng.standard_normal((n, 1)) * 0.3
        obs = tuple(IntervalVector(lo[i], lo[i] + 1.0) for i in range(n))
        data = LabeledDataset(observations=obs, labels=tuple(int(v) for v in y), n_classes=3)
        model = polr_i_fit(data)
        x = design_matrix(data, "bounds")
        probs = polr_predict_proba(model, x)
        fitted_ll = np.log(probs[np.arange(n), y - 1]).sum()
        freq = np.bincount(y, minlength=4)[1:] / n
        null_ll = (np.bincount(y, minlength=4)[1:] * np.log(freq)).sum()
        assert fitted_ll > null_ll

    def test_i2_averaging_and_low_tie_rule(self):
        pl = np.array([[1.0, 0.0, 0.0]])
        pu = np.array([[0.0, 0.0, 1.0]])
        avg = 0.5 * (pl + pu)
        assert avg[0].tolist() == [0.5, 0.0, 0.5]
        assert int(np.argmax(avg[0])) + 1 == 1  # first maximum wins

    def test_i2_equal_bounds_collapse_to_identical_submodels(self):
        rng = np.random.default_rng(9)
        mid = rng.standard_normal((50, 2)) + np.array([0.0, 1.0])
        y = 1 + (mid[:, 0] > 0).astype(int)
        obs = tuple(IntervalVector(m, m) for m in mid)
        data = LabeledDataset(observations=obs, labels=tuple(int(v) for v in y), n_classes=2)
        model = polr_i2_fit(data)
        probs = polr_i2_predict_proba(model, data)
        pl = polr_predict_proba(model.lower_model, design_matrix(data, "lower"))
        assert np.allclose(probs, pl, atol=1e-9)
        assert np.abs(probs.sum(axis=1) - 1).max() <= 1e-12

    def test_i2_failure_names_the_side(self):
        rng = np.random.default_rng(2)
        lo = rng.standard_normal((8, 6))
        obs = tuple(IntervalVector(l, l + 1) for l in lo)
        data = LabeledDataset(observations=obs, labels=(1, 2, 3, 1, 2, 3, 1, 2), n_classes=3)
        with pytest.raises(FitFailed, match="lower-bound model"):
            polr_i2_fit(data)
