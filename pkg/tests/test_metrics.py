import math

import numpy as np
import pytest

from ordinterval.errors import InvalidParameter, ShapeMismatch
from ordinterval.intervals import IntervalCurve, IntervalVector
from ordinterval.metrics import (
    PairwiseMatrix,
    cross_distances,
    dist_curve,
    dist_interval,
    kernel_from_dist,
    pairwise,
    write_matrix_csv,
)


def iv(*pairs):
    return IntervalVector([p[0] for p in pairs], [p[1] for p in pairs])


def random_ivs(rng, n, k=3):
    lo = rng.standard_normal((n, k)) * 2
    width = rng.uniform(0, 3, size=(n, k))
    return [IntervalVector(lo[i], lo[i] + width[i]) for i in range(n)]


class TestDistInterval:
    def test_identity(self):
        x = iv((0, 2), (1, 3))
        assert dist_interval(x, x, "H") == 0.0
        assert dist_interval(x, x, "EH") == 0.0

    def test_hand_example(self):
        x = iv((0, 2), (1, 3))
        y = iv((1, 4), (1, 3))
        assert dist_interval(x, y, "H") == 2.0
        assert dist_interval(x, y, "EH") == 2.0

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        a, b = random_ivs(rng, 2)
        for kind in ("H", "EH"):
            assert dist_interval(a, b, kind) == dist_interval(b, a, kind)

    def test_k_mismatch(self):
        with pytest.raises(ShapeMismatch):
            dist_interval(iv((0, 1)), iv((0, 1), (1, 2)))

    def test_metric_axioms_on_random_triples(self):
        rng = np.random.default_rng(99)
        for kind in ("H", "EH"):
            for _ in range(1000):
                a, b, c = random_ivs(rng, 3)
                dab = dist_interval(a, b, kind)
                dba = dist_interval(b, a, kind)
                dac = dist_interval(a, c, kind)
                dbc = dist_interval(b, c, kind)
                assert dab >= 0
                assert abs(dab - dba) <= 1e-9
                assert dab <= dac + dbc + 1e-9  # triangle via c
                assert dist_interval(a, a, kind) == 0.0


class TestDistCurve:
    def test_identity(self):
        c = IntervalCurve([0, 0.5, 1], [[0, 1, 0]], [[1, 2, 1]])
        assert dist_curve(c, c, "FH") == 0.0
        assert dist_curve(c, c, "FEH") == 0.0

    @pytest.mark.parametrize("grid", [[0, 1], [0, 0.25, 1], [0, 0.1, 0.2, 0.9, 1]])
    def test_constant_gap_integrates_to_one(self, grid):
        t = len(grid)
        x = IntervalCurve(grid, np.zeros((1, t)), np.zeros((1, t)))
        y = IntervalCurve(grid, np.ones((1, t)), np.ones((1, t)))
        assert dist_curve(x, y, "FH") == pytest.approx(1.0, abs=1e-12)
        assert dist_curve(x, y, "FEH") == pytest.approx(1.0, abs=1e-12)

    def test_two_identical_channels_combine_root_sum_square(self):
        rng = np.random.default_rng(1)
        grid = np.sort(rng.uniform(0, 1, 6))
        lo1 = rng.standard_normal((1, 6))
        lo2 = rng.standard_normal((1, 6))
        x1 = IntervalCurve(grid, lo1, lo1 + 1)
        y1 = IntervalCurve(grid, lo2, lo2 + 1)
        d1 = dist_curve(x1, y1, "FEH")
        x2 = IntervalCurve(grid, np.vstack([lo1, lo1]), np.vstack([lo1, lo1]) + 1)
        y2 = IntervalCurve(grid, np.vstack([lo2, lo2]), np.vstack([lo2, lo2]) + 1)
        assert dist_curve(x2, y2, "FEH") == pytest.approx(math.sqrt(2) * d1, rel=1e-12)
        assert dist_curve(x2, y2, "FH") == pytest.approx(2 * dist_curve(x1, y1, "FH"), rel=1e-12)

    def test_single_grid_interval_constant_functions_exact(self):
        # gap g over [a, b] integrates to exactly g * (b - a)
        x = IntervalCurve([2.0, 5.0], [[1.0, 1.0]], [[1.0, 1.0]])
        y = IntervalCurve([2.0, 5.0], [[3.5, 3.5]], [[3.5, 3.5]])
        assert dist_curve(x, y, "FEH") == 2.5 * 3.0

    def test_grid_mismatch(self):
        x = IntervalCurve([0, 1], [[0, 0]], [[1, 1]])
        y = IntervalCurve([0, 2], [[0, 0]], [[1, 1]])
        with pytest.raises(ShapeMismatch):
            dist_curve(x, y)

    def test_metric_axioms_on_random_curves(self):
        rng = np.random.default_rng(123)
        grid = np.sort(rng.uniform(0, 1, 5))
        def rand_curve():
            lo = rng.standard_normal((2, 5))
            return IntervalCurve(grid, lo, lo + rng.uniform(0, 1, (2, 5)))
        for kind in ("FH", "FEH"):
            for _ in range(300):
                a, b, c = rand_curve(), rand_curve(), rand_curve()
                dab = dist_curve(a, b, kind)
                assert dab >= 0
                assert abs(dab - dist_curve(b, a, kind)) <= 1e-9
                assert dab <= dist_curve(a, c, kind) + dist_curve(b, c, kind) + 1e-9


class TestKernel:
    def test_zero_distance_is_one(self):
        assert kernel_from_dist(0.0, 1.0) == 1.0

    def test_scalar_example(self):
        assert kernel_from_dist(2.0, 1.0) == pytest.approx(math.exp(-4.0), rel=1e-12)

    def test_monotone_in_gamma(self):
        values = [kernel_from_dist(1.5, g) for g in (0.5, 1, 2, 10, 1000)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] > 0.99

    def test_strictly_decreasing_in_distance(self):
        ds = np.linspace(0, 5, 40)
        ks = [kernel_from_dist(d, 1.0) for d in ds]
        assert all(b < a for a, b in zip(ks, ks[1:]))
        assert all(0 < k <= 1 for k in ks)

    def test_invalid_gamma(self):
        with pytest.raises(InvalidParameter):
            kernel_from_dist(1.0, 0.0)


class TestPairwise:
    def test_identical_observations_give_all_ones_kernel(self):
        x = iv((0, 1), (2, 3))
        mat = pairwise([x, x, x], "EH", as_kernel=True)
        assert np.array_equal(mat.entries, np.ones((3, 3)))
        assert mat.kind == "kernel"

    def test_two_observations_off_diagonal(self):
        x = iv((0, 2), (1, 3))
        y = iv((1, 4), (1, 3))
        mat = pairwise([x, y], "EH")
        assert mat.entries[0, 1] == 2.0
        assert mat.entries[1, 0] == 2.0
        assert mat.entries[0, 0] == 0.0

    def test_exact_symmetry_and_triangle_on_random_data(self):
        rng = np.random.default_rng(7)
        obs = random_ivs(rng, 25)
        mat = pairwise(obs, "EH").entries
        assert np.array_equal(mat, mat.T)
        n = len(obs)
        idx = rng.integers(0, n, size=(1000, 3))
        i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
        assert np.all(mat[i, j] <= mat[i, k] + mat[k, j] + 1e-9)

    def test_kernel_matrix_unit_diagonal(self):
        rng = np.random.default_rng(8)
        obs = random_ivs(rng, 10)
        mat = pairwise(obs, "EH", gamma=2.0, as_kernel=True)
        assert np.array_equal(np.diagonal(mat.entries), np.ones(10))
        assert np.array_equal(mat.entries, mat.entries.T)

    def test_invariants_enforced_by_container(self):
        bad = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(InvalidParameter):
            PairwiseMatrix(n=2, entries=bad, kind="distance")

    def test_matrix_csv_dump(self, tmp_path):
        rng = np.random.default_rng(3)
        obs = random_ivs(rng, 4)
        mat = pairwise(obs, "EH")
        path = tmp_path / "m.csv"
        write_matrix_csv(str(path), mat, ids=["a", "b", "c", "d"])
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "id,a,b,c,d"
        assert len(lines) == 5
        parsed = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])
        assert np.array_equal(parsed, mat.entries)


class TestCrossDistances:
    def test_blocked_path_matches_direct(self):
        rng = np.random.default_rng(10)
        obs = random_ivs(rng, 30, k=2)
        full = cross_distances(obs, obs, "EH")
        single = np.array(
            [[dist_interval(a, b, "EH") for b in obs] for a in obs]
        )
        assert np.allclose(full, single, atol=1e-12)
