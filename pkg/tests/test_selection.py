import numpy as np
import pytest

from ctxbench.predictors import ContextKnn
from ctxbench.selection import (
    _vif_values,
    correlation_filter,
    importance_prune,
    mutual_information,
    mutual_information_ranking,
    vif_filter,
)

from .oracles import mutual_information_table, vif_from_correlation


def exact_corr_triple(rho=0.9):
    """Three features where corr(f0, f1) = rho exactly and f2 is orthogonal."""
    u = np.array([1.0, 1.0, -1.0, -1.0])
    v = np.array([1.0, -1.0, 1.0, -1.0])
    w = np.array([1.0, -1.0, -1.0, 1.0])
    x0 = u
    x1 = rho * u + np.sqrt(1 - rho**2) * v
    x2 = w
    return np.column_stack([x0, x1, x2])


class TestMutualInformation:
    def test_identical_to_balanced_label_is_one_bit(self):
        y = np.array([0, 1] * 20)
        assert mutual_information(y.astype(float), y) == pytest.approx(1.0)

    def test_constant_feature_zero(self):
        y = np.array([0, 1] * 5)
        assert mutual_information(np.ones(10), y) == 0.0

    def test_two_by_two_deterministic_case(self):
        x = np.array([1.0, 1.0, 2.0, 2.0])
        y = np.array([1, 1, 0, 0])
        got = mutual_information(x, y, n_bins=2)
        oracle = mutual_information_table(np.array([[0, 2], [2, 0]]))
        assert got == pytest.approx(oracle, abs=1e-12)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_class_relabel_symmetry(self):
        rng = np.random.Generator(np.random.PCG64(1))
        for _ in range(20):
            x = rng.standard_normal(50)
            y = rng.integers(0, 2, size=50)
            assert mutual_information(x, y) == pytest.approx(
                mutual_information(x, 1 - y), abs=1e-12
            )

    def test_independent_feature_near_zero(self):
        rng = np.random.Generator(np.random.PCG64(2))
        x = rng.standard_normal(5000)
        y = rng.integers(0, 2, size=5000)
        assert mutual_information(x, y) < 0.01


class TestCorrelationFilter:
    def test_identical_pair_drops_one(self):
        rng = np.random.Generator(np.random.PCG64(3))
        a = rng.standard_normal(40)
        b = rng.standard_normal(40)
        X = np.column_stack([a, a, b])
        y = (a > 0).astype(int)
        survivors, report = correlation_filter(X, ("f0", "f1", "f2"), y, threshold=0.95)
        assert len(survivors) == 2 and "f2" in survivors
        assert len(report.dropped) == 1

    def test_all_below_threshold_survive(self):
        rng = np.random.Generator(np.random.PCG64(4))
        X = rng.standard_normal((60, 4))
        y = rng.integers(0, 2, size=60)
        survivors, _ = correlation_filter(X, ("a", "b", "c", "d"), y, threshold=0.95)
        assert survivors == ("a", "b", "c", "d")

    def test_anticorrelated_pair_counts_via_absolute_value(self):
        rng = np.random.Generator(np.random.PCG64(5))
        a = rng.standard_normal(40)
        X = np.column_stack([a, -a, rng.standard_normal(40)])
        y = (a > 0).astype(int)
        survivors, _ = correlation_filter(X, ("x", "negx", "z"), y, threshold=0.95)
        assert len(survivors) == 2 and "z" in survivors

    def test_constant_feature_dropped_with_reason(self):
        rng = np.random.Generator(np.random.PCG64(6))
        X = np.column_stack([np.full(30, 2.0), rng.standard_normal(30)])
        y = rng.integers(0, 2, size=30)
        survivors, report = correlation_filter(X, ("const", "ok"), y)
        assert survivors == ("ok",)
        assert report.dropped[0].reason == "constant"

    def test_no_surviving_pair_violates_threshold(self):
        rng = np.random.Generator(np.random.PCG64(7))
        base = rng.standard_normal((80, 3))
        # correlated copies with varying noise
        X = np.column_stack(
            [base[:, 0], base[:, 0] + 0.01 * rng.standard_normal(80),
             base[:, 1], base[:, 1] + 0.02 * rng.standard_normal(80),
             base[:, 2]]
        )
        y = (base[:, 0] > 0).astype(int)
        names = tuple(f"f{i}" for i in range(5))
        survivors, _ = correlation_filter(X, names, y, threshold=0.9)
        idx = [names.index(n) for n in survivors]
        corr = np.corrcoef(X[:, idx].T)
        off = np.abs(corr - np.eye(len(idx)))
        assert off.max() <= 0.9

    def test_keeps_higher_mi_twin(self):
        y = np.array([0, 1] * 20)
        strong = y.astype(float)
        weak = strong + 0.0  # identical values, same MI -> later index dropped
        X = np.column_stack([strong, weak])
        survivors, report = correlation_filter(X, ("strong", "weak"), y)
        assert survivors == ("strong",)
        assert report.dropped[0].name == "weak"


class TestVif:
    def test_analytic_pair_value(self):
        X = exact_corr_triple(0.9)
        vifs = _vif_values(X)
        oracle = vif_from_correlation(np.corrcoef(X.T))
        assert np.allclose(vifs, oracle, atol=1e-6)
        assert vifs[0] == pytest.approx(1.0 / (1.0 - 0.81), abs=1e-9)

    def test_cap_five_drops_one_of_pair(self):
        X = exact_corr_triple(0.9)
        survivors, report = vif_filter(X, ("a", "b", "c"), cap=5.0)
        assert len(survivors) == 2 and "c" in survivors
        assert report.dropped[0].statistic == pytest.approx(5.2631578947, abs=1e-6)

    def test_orthogonal_features_all_survive(self):
        X = exact_corr_triple(0.0)
        survivors, _ = vif_filter(X, ("a", "b", "c"), cap=5.0)
        assert survivors == ("a", "b", "c")
        assert np.allclose(_vif_values(X), 1.0, atol=1e-9)

    def test_exact_collinearity_dropped_deterministically(self):
        rng = np.random.Generator(np.random.PCG64(8))
        a = rng.standard_normal(30)
        b = rng.standard_normal(30)
        X = np.column_stack([a, a, b])
        survivors, report = vif_filter(X, ("a0", "a1", "b"), cap=10.0)
        assert survivors == ("a1", "b")  # highest VIF tie -> lowest index dropped
        assert report.dropped[0].name == "a0"

    def test_terminal_state_satisfies_cap(self):
        rng = np.random.Generator(np.random.PCG64(9))
        base = rng.standard_normal((100, 4))
        mix = base @ rng.standard_normal((4, 8)) + 0.05 * rng.standard_normal((100, 8))
        names = tuple(f"f{i}" for i in range(8))
        survivors, _ = vif_filter(mix, names, cap=10.0)
        idx = [names.index(n) for n in survivors]
        assert _vif_values(mix[:, idx]).max() <= 10.0


class _ConstantPredictor:
    name = "const"
    version = "0"

    def condition(self, window):
        return None

    def predict_proba(self, state, queries):
        return np.full(queries.n_rows, 0.5)


class TestImportancePrune:
    def test_identity_when_k_covers_all(self):
        rng = np.random.Generator(np.random.PCG64(10))
        X = rng.standard_normal((40, 3))
        y = rng.integers(0, 2, size=40)
        y[:2] = [0, 1]
        names = ("a", "b", "c")
        survivors, _ = importance_prune(X, names, y, ContextKnn(k=3), 3, seed=0)
        assert survivors == names

    def test_label_copy_beats_noise(self):
        rng = np.random.Generator(np.random.PCG64(11))
        y = np.array([0, 1] * 40)
        X = np.column_stack([rng.standard_normal(80), y.astype(float)])
        survivors, report = importance_prune(
            X, ("noise", "copy"), y, ContextKnn(k=3), keep_top_k=1, seed=1
        )
        assert survivors == ("copy",)
        dropped = report.dropped[0]
        assert dropped.name == "noise" and abs(dropped.statistic) < 0.2

    def test_constant_predictor_gives_zero_importance(self):
        rng = np.random.Generator(np.random.PCG64(12))
        X = rng.standard_normal((40, 3))
        y = rng.integers(0, 2, size=40)
        y[:2] = [0, 1]
        survivors, report = importance_prune(
            X, ("a", "b", "c"), y, _ConstantPredictor(), keep_top_k=2, seed=2
        )
        assert all(d.statistic == 0.0 for d in report.dropped)


def test_pipeline_monotone_feature_sets():
    rng = np.random.Generator(np.random.PCG64(13))
    base = rng.standard_normal((120, 5))
    X = np.column_stack([base, base[:, 0] + 1e-3 * rng.standard_normal(120)])
    y = (base[:, 1] > 0).astype(int)
    names = tuple(f"f{i}" for i in range(6))

    s1, r1 = correlation_filter(X, names, y, threshold=0.95)
    idx = [names.index(n) for n in s1]
    s2, r2 = mutual_information_ranking(X[:, idx], s1, y, keep_top_k=4)
    idx2 = [s1.index(n) for n in s2]
    s3, r3 = vif_filter(X[:, idx][:, idx2], s2, cap=10.0)

    assert set(s1) <= set(names)
    assert set(s2) <= set(s1)
    assert set(s3) <= set(s2)
    for rep in (r1, r2, r3):
        assert set(rep.features_out) == set(rep.features_in) - {
            d.name for d in rep.dropped
        }
