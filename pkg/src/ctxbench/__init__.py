"""ctxbench: class-aware context-window construction and benchmarking for
tabular in-context learning under severe imbalance."""

from .encoding import EncodedMatrix, EncodingPolicy, FittedEncoder, encode, fit_encoder
from .errors import (
    BackendError,
    BudgetError,
    ConfigError,
    ContractError,
    CtxbenchError,
    DataError,
    DegenerateContextError,
    LeakageError,
    ProtocolError,
    StructuralError,
    UndefinedMetricError,
)
from .metrics import ConfusionCounts, MetricBundle, bundle, confusion, mcc, roc_auc
from .strategies import (
    ContextSpec,
    ContextWindow,
    STRATEGIES,
    build_context,
    sample_balanced,
    sample_diversity_km,
    sample_hybrid,
    sample_oversample_plus,
    sample_smote,
    sample_stratified,
    sample_uniform,
)
from .synth import synth_dataset
from .tabular import ClassCounts, ColumnKind, Table, class_counts, infer_schema

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "BudgetError",
    "ClassCounts",
    "ColumnKind",
    "ConfigError",
    "ConfusionCounts",
    "ContextSpec",
    "ContextWindow",
    "ContractError",
    "CtxbenchError",
    "DataError",
    "DegenerateContextError",
    "EncodedMatrix",
    "EncodingPolicy",
    "FittedEncoder",
    "LeakageError",
    "MetricBundle",
    "ProtocolError",
    "STRATEGIES",
    "StructuralError",
    "Table",
    "UndefinedMetricError",
    "build_context",
    "bundle",
    "class_counts",
    "confusion",
    "encode",
    "fit_encoder",
    "infer_schema",
    "mcc",
    "roc_auc",
    "sample_balanced",
    "sample_diversity_km",
    "sample_hybrid",
    "sample_oversample_plus",
    "sample_smote",
    "sample_stratified",
    "sample_uniform",
    "synth_dataset",
]
