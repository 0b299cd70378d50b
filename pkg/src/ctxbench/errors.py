"""Exception types shared across the package."""


class CtxbenchError(Exception):
    """Base class for all package-specific errors."""


class StructuralError(CtxbenchError):
    """Malformed input structure: ragged columns, bad header, empty table."""


class DataError(CtxbenchError):
    """Well-formed structure but invalid content (bad label, unparseable date)."""


class ConfigError(CtxbenchError):
    """Invalid rule, recipe, or plan configuration."""


class BudgetError(CtxbenchError):
    """Requested context budget cannot be satisfied by the pool."""


class DegenerateContextError(CtxbenchError):
    """Pool cannot support the strategy (e.g. a required class is absent)."""


class ContractError(CtxbenchError):
    """Predictor contract violation (empty or single-class window, etc.)."""


class BackendError(CtxbenchError):
    """External backend failed: launch, handshake, timeout, or death."""


class ProtocolError(CtxbenchError):
    """External backend sent a malformed or out-of-contract message."""


class UndefinedMetricError(CtxbenchError):
    """Metric has no defined value for the given inputs (single-class AUC)."""


class LeakageError(CtxbenchError):
    """A train/test separation guard was violated."""
