import numpy as np
import pytest

from ordinterval.errors import EmptySplit
from ordinterval.frank_hall import assemble_probabilities, fh_fit, fh_predict, fh_predict_proba
from ordinterval.intervals import IntervalVector, LabeledDataset
from ordinterval.ldaid import ldaid_fit, ldaid_predict_proba


def interval_data(rng, n, q, separation=3.0):
    centers = rng.standard_normal((n, 2))
    labels = rng.integers(1, q + 1, n)
    labels[:q] = np.arange(1, q + 1)
    centers[:, 0] += separation * labels
    widths = rng.uniform(0.5, 1.5, size=(n, 2))
    obs = tuple(IntervalVector(centers[i] - widths[i] / 2, centers[i] + widths[i] / 2) for i in range(n))
    return LabeledDataset(observations=obs, labels=tuple(int(v) for v in labels), n_classes=q)


def predict_high(model, observations):
    return ldaid_predict_proba(model, observations)[:, 1]


class TestAssembly:
    def test_difference_formula(self):
        probs = assemble_probabilities(np.array([[0.9, 0.4]]))
        assert probs[0] == pytest.approx([0.1, 0.5, 0.4], abs=1e-12)

    def test_clip_and_renormalize(self):
        probs = assemble_probabilities(np.array([[0.3, 0.6]]))
        assert probs[0] == pytest.approx([7 / 13, 0.0, 6 / 13], abs=1e-12)

    def test_monotone_stack_needs_no_clipping(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = np.sort(rng.uniform(size=4))[::-1]
            probs = assemble_probabilities(p[None, :])[0]
            raw = np.concatenate([[1 - p[0]], p[:-1] - p[1:], [p[-1]]])
            assert probs == pytest.approx(raw, abs=1e-12)

    def test_always_a_probability_vector(self):
        rng = np.random.default_rng(42)
        p = rng.uniform(size=(500, 3))
        probs = assemble_probabilities(p)
        assert np.all(probs >= 0)
        assert np.abs(probs.sum(axis=1) - 1).max() <= 1e-12


class TestFit:
    def test_stack_length_and_probability_output(self):
        rng = np.random.default_rng(5)
        data = interval_data(rng, 120, q=4)
        model = fh_fit(data, ldaid_fit, predict_high)
        assert len(model.submodels) == 3
        probs = fh_predict_proba(model, data.observations)
        assert probs.shape == (120, 4)
        assert np.all(probs >= 0)
        assert np.abs(probs.sum(axis=1) - 1).max() <= 1e-12

    def test_two_class_degenerates_to_single_binary_model(self):
        rng = np.random.default_rng(6)
        data = interval_data(rng, 80, q=2)
        model = fh_fit(data, ldaid_fit, predict_high)
        assert len(model.submodels) == 1
        direct = ldaid_predict_proba(model.submodels[0], data.observations)
        stacked = fh_predict_proba(model, data.observations)
        assert np.allclose(stacked, direct, atol=1e-12)

    def test_separable_classes_are_learned(self):
        rng = np.random.default_rng(7)
        data = interval_data(rng, 150, q=3, separation=8.0)
        model = fh_fit(data, ldaid_fit, predict_high)
        pred = fh_predict(model, data.observations)
        assert (pred == data.label_array()).mean() > 0.95

    def test_empty_split_detected(self):
        rng = np.random.default_rng(8)
        obs = tuple(
            IntervalVector(lo, lo + 1) for lo in rng.standard_normal((6, 1))
        )
        data = LabeledDataset(observations=obs, labels=(2, 2, 3, 3, 2, 3), n_classes=3)
        with pytest.raises(EmptySplit):
            fh_fit(data, ldaid_fit, predict_high)
