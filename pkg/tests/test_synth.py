import numpy as np
import pytest

from ctxbench.errors import ConfigError
from ctxbench.metrics import roc_auc
from ctxbench.predictors import ContextKnn
from ctxbench.strategies import sample_balanced
from ctxbench.synth import synth_dataset, synth_split
from ctxbench.tabular import class_counts


class TestSynthDataset:
    def test_exact_minority_count(self):
        t = synth_dataset(1000, 0.08, 2.0, seed=0)
        assert class_counts(t).n1 == 80

    def test_too_small_rejected(self):
        with pytest.raises(ConfigError):
            synth_dataset(5, 0.2, 1.0)

    def test_deterministic(self):
        a = synth_dataset(200, 0.1, 1.5, seed=3)
        b = synth_dataset(200, 0.1, 1.5, seed=3)
        assert np.array_equal(a.column("inf0"), b.column("inf0"))

    def test_noise_dims_present(self):
        t = synth_dataset(100, 0.2, 1.0, noise_dims=3, seed=0)
        assert {"noise0", "noise1", "noise2"} <= set(t.names)

    def test_separation_zero_auc_near_half(self):
        aucs = []
        for seed in range(8):
            train, test = synth_split(1500, 0.2, 0.0, noise_dims=0, seed=seed)
            model = ContextKnn(k=15)
            window = sample_balanced(train, 200, seed=seed)
            state = model.condition(window)
            aucs.append(roc_auc(model.predict_proba(state, test), test.labels()))
        assert abs(np.mean(aucs) - 0.5) < 0.05

    def test_separation_four_auc_high(self):
        train, test = synth_split(1500, 0.2, 4.0, noise_dims=0, seed=5)
        model = ContextKnn(k=15)
        window = sample_balanced(train, 200, seed=5)
        state = model.condition(window)
        assert roc_auc(model.predict_proba(state, test), test.labels()) > 0.95
