import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deeppink import filter as kf
from deeppink.errors import DimensionMismatch
from oracles import brute_threshold

ELEVEN = np.array([5, 4, 3, 2, 1, 1, 1, 1, 1, 1, -0.5])


def random_w(rng):
    p = int(rng.integers(1, 51))
    # draw from a small grid so ties and exact zeros are common
    grid = rng.integers(-6, 7, size=p).astype(float)
    if rng.random() < 0.5:
        grid = grid * rng.uniform(0.1, 3.0)
    if rng.random() < 0.3:
        grid = rng.normal(size=p) + rng.choice([0.0, 2.0], size=p)
    return grid


class TestStatistic:
    def test_equal_importances(self):
        np.testing.assert_array_equal(kf.knockoff_statistic([1.0, -2.0], [1.0, -2.0]), [0, 0])

    def test_hand_example(self):
        np.testing.assert_allclose(kf.knockoff_statistic([1.0, 0.4], [0.2, 0.4]), [0.96, 0.0])

    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1))
    def test_antisymmetric(self, pairs):
        Z, Zt = np.array(pairs).T
        np.testing.assert_array_equal(kf.knockoff_statistic(Z, Zt), -kf.knockoff_statistic(Zt, Z))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kf.knockoff_statistic([1.0], [1.0, 2.0])


class TestThreshold:
    def test_eleven_element_example(self):
        # t = 0.5: (1 + 1) / 10 = 0.2
        assert kf.threshold(ELEVEN, 0.2, "knockoff_plus") == 0.5
        assert brute_threshold(ELEVEN, 0.2, "knockoff_plus") == 0.5

    def test_all_negative(self):
        assert kf.threshold([-1.0, -2.0, -0.5], 0.2) == np.inf

    def test_no_candidate_passes(self):
        # ratios at t = 1, 2, 3, 5: 3/3, 2/3, 1/2, 1/1
        assert kf.threshold([3, -1, 2, -2, 5], 0.2, "knockoff_plus") == np.inf

    def test_all_zero(self):
        assert kf.threshold(np.zeros(5), 0.3, "knockoff") == np.inf

    def test_plain_knockoff_allows_single_discovery(self):
        W = np.r_[10.0, np.zeros(9)]
        assert kf.threshold(W, 0.2, "knockoff") == 10.0
        assert kf.threshold(W, 0.2, "knockoff_plus") == np.inf

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1])
    def test_q_domain(self, q):
        with pytest.raises(ValueError):
            kf.threshold([1.0], q)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2024)
        for _ in range(300):
            W = random_w(rng)
            q = float(rng.choice([0.05, 0.1, 0.2, 0.3, 0.5]))
            for rule in kf.RULES:
                assert kf.threshold(W, q, rule) == brute_threshold(W, q, rule)

    @settings(max_examples=200)
    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=40),
           st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_monotone_in_q(self, w, q1, q2):
        lo, hi = sorted((q1, q2))
        W = np.array(w, dtype=float)
        for rule in kf.RULES:
            assert kf.threshold(W, hi, rule) <= kf.threshold(W, lo, rule)
            assert set(kf.select(W, lo, rule).selected) <= set(kf.select(W, hi, rule).selected)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=50), st.floats(0.01, 0.99))
    def test_plus_dominates(self, w, q):
        W = np.array(w)
        assert kf.threshold(W, q, "knockoff_plus") >= kf.threshold(W, q, "knockoff")
        assert (set(kf.select(W, q, "knockoff_plus").selected)
                <= set(kf.select(W, q, "knockoff").selected))


class TestSelect:
    def test_empty(self):
        r = kf.select([-1.0, -3.0], 0.2)
        assert r.threshold == np.inf and r.selected == ()

    def test_eleven(self):
        r = kf.select(ELEVEN, 0.2)
        assert r.selected == tuple(range(10))
        assert r.rule == "knockoff_plus"

    def test_single_huge_value(self):
        W = np.r_[1e6, np.zeros(19)]
        assert kf.select(W, 0.2, "knockoff_plus").selected == ()

    def test_ties_at_threshold_selected(self):
        W = np.array([2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, -1.0])
        r = kf.select(W, 0.2)
        assert r.threshold == 1.0
        assert len(r.selected) == 10

    @settings(max_examples=200)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=50), st.floats(0.01, 0.99))
    def test_selected_matches_threshold(self, w, q):
        W = np.array(w)
        r = kf.select(W, q)
        assert set(r.selected) == set(np.flatnonzero(W >= r.threshold))
        assert (len(r.selected) == 0) == np.isinf(r.threshold)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=50), st.floats(0.01, 0.99))
    def test_sign_flip(self, w, q):
        W = np.abs(np.array(w))
        r = kf.select(W, q)
        if r.selected:
            assert kf.select(-W, q).selected == ()

    def test_sign_flip_needs_all_positive(self):
        # an all-positive *selection* is not enough: large negatives survive the flip
        W = np.r_[np.full(5, -10.0), np.ones(30)]
        assert kf.select(W, 0.2).selected == tuple(range(5, 35))
        assert kf.select(-W, 0.2).selected == tuple(range(5))

    def test_to_dict(self):
        d = kf.select(ELEVEN, 0.2).to_dict(column_names=[f"c{j}" for j in range(11)])
        assert d["threshold"] == 0.5
        assert d["selected_names"][0] == "c0"
        assert len(d["W"]) == 11
        assert kf.select([-1.0], 0.2).to_dict()["threshold"] is None


class TestEvaluate:
    def test_perfect(self):
        m = kf.evaluate(kf.SelectionReport(1.0, (0, 2), 0.2, "knockoff_plus"), {0, 2})
        assert (m.fdp, m.power) == (0.0, 1.0)

    def test_empty(self):
        m = kf.evaluate(kf.SelectionReport(np.inf, (), 0.2, "knockoff_plus"), {1})
        assert (m.fdp, m.power, m.n_selected) == (0.0, 0.0, 0)

    def test_set_arithmetic(self):
        m = kf.evaluate([1, 2, 3, 4], [1, 2, 5, 6, 7])
        assert m.fdp == 2 / 4
        assert m.power == 2 / 5

    def test_empty_truth_flagged(self):
        m = kf.evaluate([0, 1], [])
        assert m.fdp == 1.0 and m.power == 0.0 and not m.power_defined
