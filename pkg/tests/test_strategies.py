import numpy as np
import pytest

from ctxbench.encoding import fit_encoder
from ctxbench.errors import BudgetError, ConfigError, DegenerateContextError
from ctxbench.strategies import (
    ContextSpec,
    balanced_quotas,
    build_context,
    sample_balanced,
    sample_diversity_km,
    sample_hybrid,
    sample_oversample_plus,
    sample_smote,
    sample_stratified,
    sample_uniform,
    stratified_quotas,
)
from ctxbench.tabular import ColumnKind, Table

from .conftest import make_labeled_table
from .oracles import best_two_means, distance_to_segment


class TestContextSpec:
    def test_unknown_strategy(self):
        with pytest.raises(ConfigError):
            ContextSpec("bogus", 10)

    def test_rho_bounds(self):
        with pytest.raises(ConfigError):
            ContextSpec("hybrid", 10, rho=1.5)

    def test_min_minority_bound(self):
        with pytest.raises(ConfigError):
            ContextSpec("oversample_plus", 10, min_minority=11)


class TestUniform:
    def test_full_pool_draw(self):
        t = make_labeled_table(10, 5, seed=1)
        w = sample_uniform(t, 15, seed=2)
        assert sorted(w.row_id_list()) == sorted(t.row_ids.tolist())

    def test_budget_error(self):
        t = make_labeled_table(5, 5, seed=1)
        with pytest.raises(BudgetError):
            sample_uniform(t, 11, seed=0)

    def test_same_seed_same_rows(self):
        t = make_labeled_table(50, 10, seed=1)
        a = sample_uniform(t, 20, seed=7)
        b = sample_uniform(t, 20, seed=7)
        assert a.row_id_list() == b.row_id_list()

    def test_minority_count_concentrates_at_pool_ratio(self):
        t = make_labeled_table(9200, 800, seed=2)
        counts = []
        for seed in range(30):
            w = sample_uniform(t, 1000, seed=seed)
            counts.append(w.n_minority)
        n, m, K = 10000, 1000, 800
        mean = m * K / n
        var = m * (K / n) * (1 - K / n) * (n - m) / (n - 1)  # hypergeometric
        assert abs(np.mean(counts) - mean) < 5 * np.sqrt(var / len(counts))


class TestStratified:
    def test_hc_like_quotas(self):
        assert stratified_quotas(92, 8, 50) == (46, 4)

    def test_single_slot_goes_to_largest_remainder(self):
        assert stratified_quotas(99, 1, 1) == (1, 0)

    def test_whole_pool(self):
        t = make_labeled_table(3, 1, seed=3)
        w = sample_stratified(t, 4, seed=0)
        assert sorted(w.row_id_list()) == sorted(t.row_ids.tolist())

    def test_achieved_counts_match_quotas_exactly(self):
        rng = np.random.Generator(np.random.PCG64(4))
        for _ in range(50):
            n0, n1 = int(rng.integers(5, 60)), int(rng.integers(1, 40))
            t = make_labeled_table(n0, n1, seed=int(rng.integers(1 << 30)), extra_dims=1)
            m = int(rng.integers(2, n0 + n1 + 1))
            w = sample_stratified(t, m, seed=int(rng.integers(1 << 30)))
            assert (w.n_majority, w.n_minority) == stratified_quotas(n0, n1, m)


class TestBalanced:
    def test_even_split(self):
        t = make_labeled_table(100, 100, seed=5)
        w = sample_balanced(t, 10, seed=0)
        assert (w.n_majority, w.n_minority) == (5, 5)

    def test_shortfall_redistribution(self):
        t = make_labeled_table(90, 10, seed=5)
        w = sample_balanced(t, 40, seed=0)
        assert (w.n_majority, w.n_minority) == (30, 10)

    def test_whole_pool(self):
        t = make_labeled_table(5, 5, seed=5)
        w = sample_balanced(t, 10, seed=0)
        assert sorted(w.row_id_list()) == sorted(t.row_ids.tolist())

    def test_single_class_rejected(self):
        t = Table.from_columns(
            [
                ("x", ColumnKind.NUMERIC, np.arange(6, dtype=float)),
                ("label", ColumnKind.NUMERIC, np.zeros(6)),
            ],
            label="label",
        )
        with pytest.raises(DegenerateContextError):
            sample_balanced(t, 4, seed=0)

    def test_odd_budget_extra_goes_to_larger_class(self):
        assert balanced_quotas(80, 20, 9) == (5, 4)
        assert balanced_quotas(20, 80, 9) == (4, 5)

    def test_gap_at_most_one_when_supply_suffices(self):
        rng = np.random.Generator(np.random.PCG64(6))
        for _ in range(50):
            m = int(rng.integers(2, 60))
            need = (m + 1) // 2
            n0 = need + int(rng.integers(0, 30))
            n1 = need + int(rng.integers(0, 30))
            q0, q1 = balanced_quotas(n0, n1, m)
            assert abs(q0 - q1) <= 1 and q0 + q1 == m


class TestOversamplePlus:
    def test_boost_two_expected_minority(self):
        # class masses 1 (majority) vs 2 (boosted minority) -> 2/3 of draws
        t = make_labeled_table(900, 100, seed=7)
        counts = [
            sample_oversample_plus(t, 100, boost=2.0, min_minority=0, seed=s).n_minority
            for s in range(1000)
        ]
        assert abs(np.mean(counts) - 100 * 2 / 3) < 2.0

    def test_boost_one_equalizes_class_mass(self):
        t = make_labeled_table(900, 100, seed=7)
        counts = [
            sample_oversample_plus(t, 100, boost=1.0, min_minority=0, seed=s).n_minority
            for s in range(400)
        ]
        assert abs(np.mean(counts) - 50.0) < 2.0

    def test_floor_equal_to_budget_gives_all_minority(self):
        t = make_labeled_table(900, 100, seed=7)
        w = sample_oversample_plus(t, 50, boost=1.0, min_minority=50, seed=3)
        assert w.n_minority == 50 and w.n_majority == 0

    def test_duplicates_permitted_and_counted(self):
        t = make_labeled_table(5, 3, seed=7)
        w = sample_oversample_plus(t, 64, boost=2.0, min_minority=0, seed=1)
        assert w.size == 64  # with replacement: budget always achievable
        assert len(set(w.row_id_list())) <= 8

    def test_empty_minority_rejected(self):
        t = Table.from_columns(
            [
                ("x", ColumnKind.NUMERIC, np.arange(6, dtype=float)),
                ("label", ColumnKind.NUMERIC, np.zeros(6)),
            ],
            label="label",
        )
        with pytest.raises(DegenerateContextError):
            sample_oversample_plus(t, 4, boost=2.0, min_minority=0, seed=0)


def two_minority_pool():
    # minority at (0,0) and (1,1); majority elsewhere
    xs = np.array([0.0, 1.0, 5.0, 6.0, 7.0, 8.0])
    ys = np.array([0.0, 1.0, 5.0, 6.0, 7.0, 8.0])
    labels = np.array([1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    return Table.from_columns(
        [
            ("a", ColumnKind.NUMERIC, xs),
            ("b", ColumnKind.NUMERIC, ys),
            ("label", ColumnKind.NUMERIC, labels),
        ],
        label="label",
    )


class TestSmote:
    def test_synthetic_on_segment_midpoint_case(self):
        t = two_minority_pool()
        w = sample_smote(t, 6, k=1, seed=0)
        assert w.n_synthetic >= 1
        for origin in w.synthetic_origins:
            pos = w.rows.positions_of(np.array([origin.child_id]))[0]
            child = np.array(
                [w.rows.column("a")[pos], w.rows.column("b")[pos]]
            )
            # parents are the two minority points by construction (k=1)
            a = np.array([0.0, 0.0])
            b = np.array([1.0, 1.0])
            assert distance_to_segment(child, a, b) < 1e-12

    def test_target_composition_fifty_fifty(self):
        t = make_labeled_table(920, 80, seed=8)
        w = sample_smote(t, 100, k=5, seed=1)
        assert w.n_minority == 50 and w.n_majority == 50
        assert w.n_synthetic == 50 - 8  # stratified base contributes 8 real

    def test_minority_below_two_rejected(self):
        t = make_labeled_table(10, 1, seed=8)
        with pytest.raises(DegenerateContextError):
            sample_smote(t, 6, k=1, seed=0)

    def test_k_clamped_with_warning(self):
        t = two_minority_pool()
        w = sample_smote(t, 6, k=10, seed=0)
        assert any("clamped" in msg for msg in w.warnings)

    def test_synthetic_rows_flagged_label_one(self):
        t = make_labeled_table(90, 10, seed=9)
        w = sample_smote(t, 40, k=3, seed=2)
        synth = w.rows.mask(w.rows.synthetic)
        assert synth.n_rows == w.n_synthetic
        assert np.all(synth.labels() == 1)

    def test_synthetic_inside_minority_bbox(self):
        t = make_labeled_table(300, 30, seed=10)
        enc = fit_encoder(t)
        w = sample_smote(t, 100, k=5, seed=3, encoder=enc)
        minority = t.mask(t.labels() == 1)
        M = enc.transform_array(minority)
        lo, hi = M.min(axis=0), M.max(axis=0)
        synth = w.rows.mask(w.rows.synthetic)
        S = enc.transform_array(synth)
        assert np.all(S >= lo - 1e-9) and np.all(S <= hi + 1e-9)

    def test_categoricals_copied_from_base_parent(self):
        t = Table.from_columns(
            [
                ("x", ColumnKind.NUMERIC, [0.0, 1.0, 5.0, 6.0, 7.0, 8.0]),
                ("g", ColumnKind.CATEGORICAL, ["p", "q", "r", "r", "r", "r"]),
                ("label", ColumnKind.NUMERIC, [1.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
            ],
            label="label",
        )
        w = sample_smote(t, 6, k=1, seed=4)
        synth = w.rows.mask(w.rows.synthetic)
        assert all(v in ("p", "q") for v in synth.column("g"))


def blob_pool(n_per=10, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    a = rng.standard_normal((n_per, 2)) * 0.1
    b = rng.standard_normal((n_per, 2)) * 0.1 + 50.0
    X = np.vstack([a, b])
    return Table.from_columns(
        [
            ("x", ColumnKind.NUMERIC, X[:, 0]),
            ("y", ColumnKind.NUMERIC, X[:, 1]),
            ("label", ColumnKind.NUMERIC, np.array([0.0, 1.0] * n_per)),
        ],
        label="label",
    )


class TestDiversityKM:
    def test_two_blobs_one_rep_each(self):
        t = blob_pool()
        w = sample_diversity_km(t, 2, seed=0)
        picked = set(w.row_id_list())
        assert len(picked) == 2
        # oracle: exhaustive 2-means splits the pool into the two blobs
        X = np.column_stack([t.column("x"), t.column("y")])
        part_a, part_b = best_two_means(X)
        assert sorted(len(picked & g) for g in (part_a, part_b)) == [1, 1]

    def test_full_budget_selects_everything(self):
        t = blob_pool(n_per=5)
        w = sample_diversity_km(t, 10, seed=1)
        assert sorted(w.row_id_list()) == sorted(t.row_ids.tolist())

    def test_duplicate_pool_distinct_ids(self):
        t = Table.from_columns(
            [
                ("x", ColumnKind.NUMERIC, np.ones(6)),
                ("label", ColumnKind.NUMERIC, np.array([0.0, 1.0] * 3)),
            ],
            label="label",
        )
        w = sample_diversity_km(t, 2, seed=2)
        assert len(set(w.row_id_list())) == 2

    def test_budget_error(self):
        t = blob_pool(n_per=3)
        with pytest.raises(BudgetError):
            sample_diversity_km(t, 7, seed=0)

    def test_label_permutation_invariance(self):
        t = make_labeled_table(60, 20, seed=11)
        rng = np.random.Generator(np.random.PCG64(0))
        permuted = t.replace_column("label", t.column("label")[rng.permutation(t.n_rows)])
        for seed in (0, 1, 2):
            a = sample_diversity_km(t, 12, seed=seed)
            b = sample_diversity_km(permuted, 12, seed=seed)
            assert a.row_id_list() == b.row_id_list()


class TestHybrid:
    def test_rho_one_equals_balanced(self):
        t = make_labeled_table(80, 20, seed=12)
        a = sample_hybrid(t, 20, rho=1.0, seed=5)
        b = sample_balanced(t, 20, seed=5)
        assert a.row_id_list() == b.row_id_list()

    def test_rho_zero_equals_diversity(self):
        t = make_labeled_table(80, 20, seed=12)
        a = sample_hybrid(t, 20, rho=0.0, seed=5)
        b = sample_diversity_km(t, 20, seed=5)
        assert a.row_id_list() == b.row_id_list()

    def test_mixed_counts_and_disjoint(self):
        t = make_labeled_table(80, 20, seed=12)
        w = sample_hybrid(t, 10, rho=0.6, seed=5)
        ids = w.row_id_list()
        assert len(ids) == 10 and len(set(ids)) == 10
        bal = sample_balanced(t, 6, seed=5)
        assert ids[:6] == bal.row_id_list()


class TestGridContracts:
    """Budget / distinctness / determinism across all strategies."""

    SPECS = [
        ContextSpec("uniform", 16, seed=1),
        ContextSpec("stratified", 16, seed=1),
        ContextSpec("balanced", 16, seed=1),
        ContextSpec("oversample_plus", 16, seed=1, boost=2.0, min_minority=4),
        ContextSpec("smote", 16, seed=1, smote_k=3),
        ContextSpec("diversity_km", 16, seed=1, km_iterations=5, km_batch=64),
        ContextSpec("hybrid", 16, seed=1, rho=0.5, km_iterations=5, km_batch=64),
    ]

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.strategy)
    def test_budget_and_determinism(self, spec):
        t = make_labeled_table(40, 12, seed=13)
        a = build_context(t, spec)
        b = build_context(t, spec)
        assert a.size == spec.budget
        assert a.row_id_list() == b.row_id_list()
        if spec.strategy not in ("oversample_plus", "smote"):
            assert len(set(a.row_id_list())) == a.size

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.strategy)
    def test_real_rows_exist_in_source(self, spec):
        t = make_labeled_table(40, 12, seed=13)
        w = build_context(t, spec)
        real = w.rows.row_ids[~w.rows.synthetic]
        assert np.isin(real, t.row_ids).all()
        if spec.strategy != "smote":
            assert w.n_synthetic == 0

    def test_minority_fraction_ordering_balanced_vs_stratified(self):
        # 8%-minority pool at m=1000 over 100 seeds
        t = make_labeled_table(9200, 800, seed=14, extra_dims=1)
        bal = [sample_balanced(t, 1000, seed=s).n_minority for s in range(100)]
        strat = [sample_stratified(t, 1000, seed=s).n_minority for s in range(100)]
        assert min(bal) >= max(strat) >= 0
