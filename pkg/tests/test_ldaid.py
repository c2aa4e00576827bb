import numpy as np
import pytest

from ordinterval.errors import DegenerateInterval, InvalidParameter
from ordinterval.intervals import IntervalVector, LabeledDataset
from ordinterval.ldaid import (
    covariance_param_count,
    interval_gaussian_features,
    ldaid_fit,
    ldaid_predict,
    ldaid_predict_proba,
)
from ordinterval.numeric import RngStream, mvn_sample


def dataset_from_z(c, r_star, labels, q):
    """Build interval observations whose (midpoint, log-range) features are given."""
    c = np.atleast_2d(c)
    widths = np.exp(np.atleast_2d(r_star))
    lo = c - widths / 2
    up = c + widths / 2
    obs = tuple(IntervalVector(lo[i], up[i]) for i in range(c.shape[0]))
    return LabeledDataset(observations=obs, labels=tuple(int(v) for v in labels), n_classes=q)


def gaussian_interval_data(rng, n_per_class, means, sds, q):
    """Independent-dimension Gaussian (C, R*) data, one spec per class."""
    cs, rs, labels = [], [], []
    for g in range(q):
        mu_c, mu_r = means[g]
        sd_c, sd_r = sds[g]
        cs.append(rng.standard_normal((n_per_class, len(mu_c))) * sd_c + mu_c)
        rs.append(rng.standard_normal((n_per_class, len(mu_r))) * sd_r + mu_r)
        labels += [g + 1] * n_per_class
    return dataset_from_z(np.vstack(cs), np.vstack(rs), labels, q)


class TestParamCounts:
    def test_spec_audit_example(self):
        # K=1: config 4 has 2 free entries, config 1 has 3
        assert covariance_param_count(1, 4) == 2
        assert covariance_param_count(1, 1) == 3

    def test_general_formulas(self):
        for k in (1, 2, 3, 5):
            dim = 2 * k
            assert covariance_param_count(k, 1) == dim * (dim + 1) // 2
            assert covariance_param_count(k, 2) == 3 * k
            assert covariance_param_count(k, 3) == k * (k + 1)
            assert covariance_param_count(k, 4) == dim


class TestFit:
    def test_rejects_degenerate_intervals(self):
        obs = (IntervalVector([0], [0]), IntervalVector([0], [1]),
               IntervalVector([2], [3]), IntervalVector([2], [4]))
        data = LabeledDataset(observations=obs, labels=(1, 1, 2, 2), n_classes=2)
        with pytest.raises(DegenerateInterval):
            ldaid_fit(data)

    def test_needs_two_per_class(self):
        obs = (IntervalVector([0], [1]), IntervalVector([0], [1]), IntervalVector([2], [3]))
        data = LabeledDataset(observations=obs, labels=(1, 1, 2), n_classes=2)
        with pytest.raises(InvalidParameter):
            ldaid_fit(data)

    def test_bic_prefers_diagonal_truth(self):
        picks = []
        for trial in range(100):
            data = gaussian_interval_data(
                np.random.default_rng(1000 + trial),
                n_per_class=250,
                means=[((0.0, 0.0), (0.0, 0.0)), ((2.0, 1.0), (0.5, 0.0))],
                sds=[((1.0, 1.0), (0.7, 0.7)), ((1.0, 1.0), (0.7, 0.7))],
                q=2,
            )
            picks.append(ldaid_fit(data).config)
        assert (np.asarray(picks) == 4).mean() >= 0.9

    def test_nesting_of_likelihoods(self):
        rng = np.random.default_rng(55)
        data = gaussian_interval_data(
            rng, 80,
            means=[((0.0, 0.0), (0.0, 0.0)), ((1.5, -1.0), (0.3, 0.2))],
            sds=[((1.0, 2.0), (0.5, 0.5)), ((1.0, 2.0), (0.5, 0.5))],
            q=2,
        )
        model = ldaid_fit(data)
        for config in (2, 3, 4):
            assert model.logliks[1] >= model.logliks[config] - 1e-8

    def test_priors_are_class_frequencies(self):
        rng = np.random.default_rng(3)
        c = rng.standard_normal((30, 1))
        data = dataset_from_z(c, np.zeros((30, 1)) + rng.standard_normal((30, 1)) * 0.1,
                              [1] * 10 + [2] * 20, 2)
        model = ldaid_fit(data)
        assert model.priors == pytest.approx([1 / 3, 2 / 3])


class TestPredict:
    def test_symmetric_two_class_boundary(self):
        rng = np.random.default_rng(8)
        n = 200
        c1 = rng.standard_normal((n, 1)) - 2.0
        c2 = rng.standard_normal((n, 1)) + 2.0
        r = rng.standard_normal((2 * n, 1)) * 0.3
        data = dataset_from_z(np.vstack([c1, c2]), r, [1] * n + [2] * n, 2)
        model = ldaid_fit(data)
        mid_c = 0.5 * (c1.mean() + c2.mean())
        mid_r = r.mean()
        probe = dataset_from_z([[mid_c]], [[mid_r]], [1], 2).observations
        posterior = ldaid_predict_proba(model, probe)[0]
        assert posterior[0] == pytest.approx(0.5, abs=0.05)

    def test_point_at_class_mean_is_assigned_there(self):
        rng = np.random.default_rng(10)
        data = gaussian_interval_data(
            rng, 100,
            means=[((0.0,), (0.0,)), ((4.0,), (0.0,))],
            sds=[((1.0,), (0.5,)), ((1.0,), (0.5,))],
            q=2,
        )
        model = ldaid_fit(data)
        z = interval_gaussian_features(data.observations)
        for g in (1, 2):
            mean_z = z[data.label_array() == g].mean(axis=0)
            probe = dataset_from_z([mean_z[:1]], [mean_z[1:]], [1], 2).observations
            assert ldaid_predict(model, probe)[0] == g

    def test_equal_means_give_prior_posteriors(self):
        rng = np.random.default_rng(6)
        c = rng.standard_normal((90, 2))
        r = rng.standard_normal((90, 2)) * 0.4
        labels = [1] * 30 + [2] * 60
        data = dataset_from_z(c, r, labels, 2)
        model = ldaid_fit(data)
        forced = model.__class__(
            means=np.tile(model.means.mean(axis=0), (2, 1)),
            sigma=model.sigma,
            sigma_inv=model.sigma_inv,
            priors=model.priors,
            config=model.config,
            bics=model.bics,
            logliks=model.logliks,
            n_classes=2,
            n_features=model.n_features,
        )
        post = ldaid_predict_proba(forced, data.observations[:5])
        assert np.allclose(post, np.tile(model.priors, (5, 1)), atol=1e-12)

    def test_posteriors_sum_to_one(self):
        rng = np.random.default_rng(2)
        data = gaussian_interval_data(
            rng, 40,
            means=[((0.0, 1.0), (0.0, 0.0)), ((2.0, -1.0), (0.2, 0.1)), ((4.0, 0.0), (0.4, 0.2))],
            sds=[((1.0, 1.0), (0.5, 0.5))] * 3,
            q=3,
        )
        model = ldaid_fit(data)
        post = ldaid_predict_proba(model, data.observations)
        assert np.abs(post.sum(axis=1) - 1).max() <= 1e-12

    def test_feature_permutation_invariance(self):
        rng = np.random.default_rng(13)
        data = gaussian_interval_data(
            rng, 60,
            means=[((0.0, 2.0), (0.0, 0.3)), ((1.0, -1.0), (0.2, 0.0))],
            sds=[((1.0, 0.5), (0.4, 0.6))] * 2,
            q=2,
        )
        perm_obs = tuple(
            IntervalVector(o.lower[::-1].copy(), o.upper[::-1].copy())
            for o in data.observations
        )
        permuted = LabeledDataset(observations=perm_obs, labels=data.labels, n_classes=2)
        post_a = ldaid_predict_proba(ldaid_fit(data), data.observations)
        post_b = ldaid_predict_proba(ldaid_fit(permuted), permuted.observations)
        assert np.allclose(post_a, post_b, atol=1e-9)
