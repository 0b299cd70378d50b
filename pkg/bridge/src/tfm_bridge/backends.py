"""Backend registry: conformance fixtures, classical baselines, TFM wrappers.

Every backend implements ``condition(schema, rows, labels)`` then
``predict(rows) -> list of class-1 probabilities``. Feature handling is the
backend's own concern: the wire carries raw values plus column kinds.

Model libraries load lazily, so the registry can always be listed and the
fixtures always run; constructing a backend whose library is missing raises
with an installation hint.
"""

from __future__ import annotations

import importlib

import numpy as np


class BackendUnavailable(RuntimeError):
    pass


class EchoFrequencyBackend:
    """Conformance fixture: predicts the conditioned window's class-1 rate."""

    name = "echo-frequency"
    version = "1.0"

    def __init__(self):
        self._frequency = 0.0

    def condition(self, schema, rows, labels):
        self._frequency = float(sum(labels)) / len(labels) if labels else 0.0

    def predict(self, rows):
        return [self._frequency] * len(rows)


class EchoFirstFeatureBackend:
    """Order probe: each prediction is its row's first numeric value clipped
    to [0, 1], so the client can verify response ordering."""

    name = "echo-first-feature"
    version = "1.0"

    def __init__(self):
        self._numeric_idx = 0

    def condition(self, schema, rows, labels):
        for i, col in enumerate(schema):
            if col.get("kind") == "numeric":
                self._numeric_idx = i
                break

    def predict(self, rows):
        out = []
        for row in rows:
            v = row[self._numeric_idx]
            v = 0.0 if v is None else float(v)
            out.append(min(1.0, max(0.0, v)))
        return out


class _TabularizingBackend:
    """Shared raw-value handling for model-library wrappers.

    Numeric and timestamp values pass through (missing -> -1); categorical
    levels become ordinal codes fitted on the context (unseen -> -1).
    """

    def __init__(self):
        self._schema = []
        self._levels: list[dict] = []

    def _fit_levels(self, schema, rows):
        self._schema = schema
        self._levels = []
        for i, col in enumerate(schema):
            if col.get("kind") == "categorical":
                values = sorted({r[i] for r in rows if r[i] is not None})
                self._levels.append({v: float(j) for j, v in enumerate(values)})
            else:
                self._levels.append({})

    def _matrix(self, rows) -> np.ndarray:
        out = np.full((len(rows), len(self._schema)), -1.0)
        for r, row in enumerate(rows):
            for c, col in enumerate(self._schema):
                v = row[c]
                if v is None:
                    continue
                if col.get("kind") == "categorical":
                    out[r, c] = self._levels[c].get(v, -1.0)
                elif col.get("kind") == "timestamp":
                    out[r, c] = np.datetime64(v, "s").astype(np.float64)
                else:
                    out[r, c] = float(v)
        return out


class SklearnBackend(_TabularizingBackend):
    """Score-only wrapper over an sklearn-compatible classifier class."""

    def __init__(self, name, module, cls, **params):
        super().__init__()
        self.name = name
        self._module = module
        self._cls = cls
        self._params = params
        try:
            mod = importlib.import_module(module)
        except ImportError as exc:
            raise BackendUnavailable(
                f"backend {name!r} needs {module.split('.')[0]!r} installed"
            ) from exc
        self._model_cls = getattr(mod, cls)
        self.version = getattr(
            importlib.import_module(module.split(".")[0]), "__version__", "?"
        )
        self._model = None

    def condition(self, schema, rows, labels):
        self._fit_levels(schema, rows)
        X = self._matrix(rows)
        self._model = self._model_cls(**self._params)
        self._model.fit(X, np.asarray(labels, dtype=np.int64))

    def predict(self, rows):
        if self._model is None:
            raise RuntimeError("not conditioned")
        X = self._matrix(rows)
        proba = self._model.predict_proba(X)
        classes = list(self._model.classes_)
        if 1 in classes:
            return proba[:, classes.index(1)].tolist()
        return [0.0] * len(rows)


class TfmBackend(_TabularizingBackend):
    """Wrapper for in-context tabular foundation models with the
    fit/predict_proba convention (TabPFN-style interfaces)."""

    def __init__(self, name, module, cls, **params):
        super().__init__()
        self.name = name
        try:
            mod = importlib.import_module(module)
        except ImportError as exc:
            raise BackendUnavailable(
                f"backend {name!r} needs the {module!r} package installed"
            ) from exc
        self._model_cls = getattr(mod, cls)
        self._params = params
        self.version = getattr(importlib.import_module(module.split(".")[0]),
                               "__version__", "?")
        self._model = None

    def condition(self, schema, rows, labels):
        self._fit_levels(schema, rows)
        X = self._matrix(rows)
        self._model = self._model_cls(**self._params)
        self._model.fit(X, np.asarray(labels, dtype=np.int64))

    def predict(self, rows):
        if self._model is None:
            raise RuntimeError("not conditioned")
        proba = self._model.predict_proba(self._matrix(rows))
        classes = list(getattr(self._model, "classes_", [0, 1]))
        col = classes.index(1) if 1 in classes else -1
        return np.asarray(proba)[:, col].tolist()


REGISTRY = {
    # conformance fixtures (no model libraries needed)
    "echo-frequency": EchoFrequencyBackend,
    "echo-first-feature": EchoFirstFeatureBackend,
    # classical score-only baselines
    "random-forest": lambda: SklearnBackend(
        "random-forest", "sklearn.ensemble", "RandomForestClassifier", random_state=0
    ),
    "xgboost": lambda: SklearnBackend("xgboost", "xgboost", "XGBClassifier"),
    "lightgbm": lambda: SklearnBackend("lightgbm", "lightgbm", "LGBMClassifier"),
    "catboost": lambda: SklearnBackend(
        "catboost", "catboost", "CatBoostClassifier", verbose=0
    ),
    # tabular foundation models (in-context learners)
    "tabpfn": lambda: TfmBackend("tabpfn", "tabpfn", "TabPFNClassifier"),
    "tabicl": lambda: TfmBackend("tabicl", "tabicl", "TabICLClassifier"),
    "orion-msp": lambda: TfmBackend("orion-msp", "orion_msp", "OrionMSPClassifier"),
    "orion-msp-v1.5": lambda: TfmBackend(
        "orion-msp-v1.5", "orion_msp", "OrionMSPClassifier", version="1.5"
    ),
    "orion-bix": lambda: TfmBackend("orion-bix", "orion_bix", "OrionBixClassifier"),
}


def create_backend(name: str):
    if name not in REGISTRY:
        raise KeyError(
            f"unknown backend {name!r}; available: {', '.join(sorted(REGISTRY))}"
        )
    return REGISTRY[name]()
