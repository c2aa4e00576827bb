import numpy as np
import pytest

from ordinterval.errors import InvalidParameter
from ordinterval.forest import (
    FeatureTable,
    ForestParams,
    rforest_fit,
    rforest_oob_predict,
    rforest_predict,
)
from ordinterval.numeric import RngStream


class TestForestBasics:
    def test_constant_target_predicts_constant(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((60, 3))
        y = np.full(60, 4.25)
        model = rforest_fit(x, y, ForestParams(n_trees=20), RngStream(1))
        pred = rforest_predict(model, rng.standard_normal((10, 3)))
        assert np.allclose(pred, 4.25, atol=1e-12)

    def test_step_function_oob_error(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-1, 1, size=(200, 1))
        y = (x[:, 0] > 0).astype(float)
        model = rforest_fit(x, y, ForestParams(n_trees=100), RngStream(2))
        oob, covered = rforest_oob_predict(model, x)
        assert covered.all()
        mse = float(((oob - y) ** 2).mean())
        assert mse <= 0.05

    def test_identical_seed_gives_identical_forest(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((80, 5))
        y = rng.standard_normal(80)
        a = rforest_fit(x, y, ForestParams(n_trees=30), RngStream(33))
        b = rforest_fit(x, y, ForestParams(n_trees=30), RngStream(33))
        assert np.array_equal(a.node_feature, b.node_feature)
        assert np.array_equal(a.node_threshold, b.node_threshold)
        assert np.array_equal(a.node_value, b.node_value)
        assert np.array_equal(a.bootstrap, b.bootstrap)

    def test_different_seed_gives_different_forest(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((80, 5))
        y = rng.standard_normal(80)
        a = rforest_fit(x, y, ForestParams(n_trees=10), RngStream(33))
        b = rforest_fit(x, y, ForestParams(n_trees=10), RngStream(34))
        assert not np.array_equal(a.bootstrap, b.bootstrap)

    def test_constant_features_yield_stumps_not_errors(self):
        x = np.ones((40, 2))
        y = np.random.default_rng(0).standard_normal(40)
        model = rforest_fit(x, y, ForestParams(n_trees=5), RngStream(0))
        # no valid split exists: every tree is a single leaf at the mean
        assert np.all(model.node_feature == -1)
        pred = rforest_predict(model, np.ones((3, 2)))
        assert np.allclose(pred, y.mean(), atol=1e-12)

    def test_min_leaf_respected(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((50, 2))
        y = rng.standard_normal(50)
        model = rforest_fit(x, y, ForestParams(n_trees=10, min_leaf=5), RngStream(5))
        for t in range(model.n_trees):
            base, end = model.tree_offsets[t], model.tree_offsets[t + 1]
            counts = np.zeros(end - base, dtype=int)
            boot = model.bootstrap[t]
            for row in boot:
                node = 0
                while model.node_feature[base + node] >= 0:
                    counts[node] += 1
                    if x[row, model.node_feature[base + node]] <= model.node_threshold[base + node]:
                        node = model.node_left[base + node]
                    else:
                        node = model.node_right[base + node]
                counts[node] += 1
            leaves = model.node_feature[base:end] == -1
            assert counts[leaves].min() >= 5

    def test_oob_noise_sanity(self):
        # pure-noise targets: OOB MSE should sit near the target variance
        rng = np.random.default_rng(11)
        x = rng.standard_normal((400, 3))
        y = rng.standard_normal(400)
        model = rforest_fit(x, y, ForestParams(n_trees=200), RngStream(7))
        oob, covered = rforest_oob_predict(model, x)
        mse = float(((oob[covered] - y[covered]) ** 2).mean())
        var = float(y.var())
        assert 0.8 * var <= mse <= 1.2 * var

    def test_rejects_bad_shapes(self):
        with pytest.raises(InvalidParameter):
            rforest_fit(np.zeros((5, 2)), np.zeros(4), ForestParams(n_trees=1), RngStream(0))

    def test_table_reuse_matches_fresh_fit(self):
        rng = np.random.default_rng(15)
        x = rng.standard_normal((60, 4))
        y = rng.standard_normal(60)
        table = FeatureTable(x)
        a = rforest_fit(x, y, ForestParams(n_trees=12), RngStream(3), table=table)
        b = rforest_fit(x, y, ForestParams(n_trees=12), RngStream(3))
        assert np.array_equal(a.node_threshold, b.node_threshold)

    def test_split_search_matches_exhaustive_cart(self):
        # single tree, no bootstrap variation concerns: compare the root split
        # against a brute-force scan over all features and boundaries
        rng = np.random.default_rng(21)
        x = rng.standard_normal((40, 3))
        y = x[:, 1] * 2 + rng.standard_normal(40) * 0.1
        params = ForestParams(n_trees=1, mtry=3, min_leaf=2)
        model = rforest_fit(x, y, params, RngStream(8))
        boot = model.bootstrap[0]
        xb, yb = x[boot], y[boot]

        best = (np.inf, None, None)
        for f in range(3):
            order = np.argsort(xb[:, f], kind="stable")
            xs, ys = xb[order, f], yb[order]
            for i in range(1, 40):
                if xs[i] <= xs[i - 1] or i < 2 or 40 - i < 2:
                    continue
                sse_l = ys[:i].var() * i
                sse_r = ys[i:].var() * (40 - i)
                if sse_l + sse_r < best[0] - 1e-12:
                    best = (sse_l + sse_r, f, 0.5 * (xs[i - 1] + xs[i]))
        assert model.node_feature[0] == best[1]
        assert model.node_threshold[0] == pytest.approx(best[2], abs=1e-12)
