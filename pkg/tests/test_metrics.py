import math

import numpy as np
import pytest
from scipy import stats

from winsep.errors import DataError, DegenerateSeriesError
from winsep.labeling import LabelSet
from winsep.metrics import (
    Measure,
    distance,
    distance_matrix,
    partition_pairs,
    pearson,
    proximity,
    verify_angle_identities,
)

from conftest import business_panel


class TestPearson:
    def test_self_correlation(self):
        x = np.array([0.3, -1.2, 2.5, 0.0, 1.1])
        assert pearson(x, x) == 1.0

    def test_perfect_anticorrelation(self):
        x = np.array([0.3, -1.2, 2.5, 0.0, 1.1])
        assert pearson(x, -x) == -1.0

    def test_hand_formula(self):
        # x=(1,2,3), y=(1,2,4): centered dot products give
        # num = 3, den = sqrt(2 * 42/9), so c = 9 / (2*sqrt(21))
        expected = 9.0 / (2.0 * math.sqrt(21.0))
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(expected, abs=1e-12)

    def test_matches_scipy(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            x = rng.normal(size=40)
            y = rng.normal(size=40)
            assert pearson(x, y) == pytest.approx(stats.pearsonr(x, y)[0], abs=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateSeriesError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DataError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_clamped_to_unit_interval(self):
        rng = np.random.default_rng(22)
        base = rng.normal(size=500)
        c = pearson(base, 3.0 * base + 1e-9 * rng.normal(size=500))
        assert -1.0 <= c <= 1.0


class TestMeasures:
    def test_distance_endpoints(self):
        assert distance(1.0) == 0.0
        assert distance(-1.0) == 2.0
        assert distance(0.0) == pytest.approx(math.sqrt(2.0))

    def test_proximity_endpoints(self):
        assert proximity(1.0) == 0.0
        assert proximity(-1.0) == 0.0
        assert proximity(0.0) == 1.0

    def test_proximity_three_four_five(self):
        assert proximity(0.6) == pytest.approx(0.8, abs=1e-15)

    def test_proximity_is_not_a_metric(self):
        # distinct, perfectly anticorrelated series are at proximity zero
        x = np.array([1.0, 2.0, 3.0, 4.0])
        assert proximity(pearson(x, -x)) == 0.0

    def test_overshoot_does_not_nan(self):
        assert distance(1.0 + 1e-12) == 0.0
        assert proximity(-1.0 - 1e-12) == 0.0

    def test_far_out_of_range_rejected(self):
        with pytest.raises(DataError):
            distance(1.5)

    def test_distance_monotone_decreasing_in_c(self):
        grid = np.linspace(-1.0, 1.0, 201)
        vals = [distance(c) for c in grid]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_proximity_monotone_decreasing_in_abs_c(self):
        grid = np.linspace(0.0, 1.0, 101)
        vals = [proximity(c) for c in grid]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        neg = [proximity(-c) for c in grid]
        assert neg == pytest.approx(vals)

    def test_ranges(self):
        for c in np.linspace(-1, 1, 101):
            assert 0.0 <= distance(c) <= 2.0
            assert 0.0 <= proximity(c) <= 1.0


class TestAngleIdentities:
    def test_zero_angle(self):
        assert verify_angle_identities([0.0]) == 0.0

    def test_quarter_pi(self):
        # c = cos(pi/2) = 0: distance form sqrt(2), proximity form 1
        alpha = math.pi / 4
        assert distance(math.cos(2 * alpha)) == pytest.approx(math.sqrt(2.0), abs=1e-15)
        assert proximity(math.cos(2 * alpha)) == pytest.approx(1.0, abs=1e-15)
        assert verify_angle_identities([alpha]) < 1e-15

    def test_dense_grid(self):
        grid = np.linspace(0.0, math.pi / 2, 1000)
        assert verify_angle_identities(grid) < 1e-12

    def test_small_angle_agreement(self):
        # the two measures coincide for small half-angles
        for alpha in np.linspace(1e-6, 0.05, 200):
            c = math.cos(2 * alpha)
            assert abs(distance(c) - proximity(c)) <= 4.0 * alpha**2


class TestDistanceMatrix:
    def make_returns(self, n_days=40, seed=31):
        rng = np.random.default_rng(seed)
        return business_panel(rng.normal(0, 0.02, size=(n_days, 4)) + 0.5)

    def test_identical_columns_distance_zero(self):
        base = np.random.default_rng(32).normal(size=20)
        returns = business_panel(np.column_stack([base, base]) + 2.0)
        for measure in Measure:
            dm = distance_matrix(returns, measure)
            assert dm.values[0, 1] == pytest.approx(0.0, abs=1e-7)

    def test_uncorrelated_columns(self):
        # orthogonal deviations: c = 0 exactly
        x = np.array([1.0, -1.0, 1.0, -1.0])
        y = np.array([1.0, 1.0, -1.0, -1.0])
        returns = business_panel(np.column_stack([x, y]) + 2.0)
        assert distance_matrix(returns, Measure.DISTANCE).values[0, 1] == pytest.approx(
            math.sqrt(2.0)
        )
        assert distance_matrix(returns, Measure.PROXIMITY).values[0, 1] == pytest.approx(1.0)

    @pytest.mark.parametrize("measure", list(Measure))
    def test_matches_pairwise_oracle(self, measure):
        returns = self.make_returns()
        dm = distance_matrix(returns, measure)
        values = returns.to_numpy()
        for i in range(values.shape[1]):
            for j in range(values.shape[1]):
                if i == j:
                    assert dm.values[i, j] == 0.0
                    continue
                c = stats.pearsonr(values[:, i], values[:, j])[0]
                expected = (
                    math.sqrt(2 * (1 - c)) if measure is Measure.DISTANCE
                    else math.sqrt(1 - c * c)
                )
                assert dm.values[i, j] == pytest.approx(expected, abs=1e-10)

    def test_symmetry_and_zero_diagonal(self):
        dm = distance_matrix(self.make_returns(), Measure.DISTANCE)
        np.testing.assert_allclose(dm.values, dm.values.T)
        assert (np.diag(dm.values) == 0.0).all()

    def test_permutation_equivariance(self):
        returns = self.make_returns()
        dm = distance_matrix(returns, Measure.DISTANCE)
        perm = [2, 0, 3, 1]
        shuffled = distance_matrix(returns.iloc[:, perm], Measure.DISTANCE)
        np.testing.assert_allclose(
            shuffled.values, dm.values[np.ix_(perm, perm)], atol=1e-14
        )

    def test_constant_column_names_ticker(self):
        returns = self.make_returns()
        returns["T2"] = 0.25
        with pytest.raises(DegenerateSeriesError, match="T2"):
            distance_matrix(returns, Measure.DISTANCE)

    def test_value_ranges(self):
        returns = self.make_returns(seed=33)
        assert distance_matrix(returns, Measure.DISTANCE).values.max() <= 2.0
        assert distance_matrix(returns, Measure.PROXIMITY).values.max() <= 1.0


class TestPartitionPairs:
    def make_dm(self, n):
        rng = np.random.default_rng(41)
        returns = business_panel(
            rng.normal(0, 0.02, size=(50, n)), tickers=[f"T{i:02d}" for i in range(n)]
        )
        return distance_matrix(returns, Measure.DISTANCE)

    def test_two_by_two_counts(self):
        dm = self.make_dm(4)
        labels = LabelSet(winners=("T00", "T01"), losers=("T02", "T03"))
        part = partition_pairs(dm, labels)
        assert len(part.ww) == 1
        assert len(part.ll) == 1
        assert len(part.wl) == 4

    def test_sixteen_sixteen_counts(self):
        dm = self.make_dm(32)
        labels = LabelSet(
            winners=tuple(f"T{i:02d}" for i in range(16)),
            losers=tuple(f"T{i:02d}" for i in range(16, 32)),
        )
        part = partition_pairs(dm, labels)
        assert len(part.ww) == 120
        assert len(part.ll) == 120
        assert len(part.wl) == 256

    def test_all_middle_gives_empty_lists(self):
        dm = self.make_dm(5)
        labels = LabelSet(winners=(), losers=(), middle=tuple(dm.tickers))
        part = partition_pairs(dm, labels)
        assert len(part.ww) == len(part.ll) == len(part.wl) == 0

    def test_every_pair_lands_exactly_once(self):
        dm = self.make_dm(9)
        labels = LabelSet(
            winners=("T00", "T01", "T02"),
            losers=("T03", "T04", "T05", "T06"),
            middle=("T07", "T08"),
        )
        part = partition_pairs(dm, labels)
        assert len(part.ww) + len(part.ll) + len(part.wl) == 3 + 6 + 12

    def test_unknown_ticker_rejected(self):
        dm = self.make_dm(4)
        labels = LabelSet(winners=("T00", "NOPE"), losers=("T02", "T03"))
        with pytest.raises(DataError):
            partition_pairs(dm, labels)
