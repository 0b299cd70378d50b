"""tfm-bridge: stdio protocol server for tabular prediction backends."""

from .backends import REGISTRY, BackendUnavailable, create_backend
from .protocol import PROTOCOL_VERSION, context_hash
from .server import serve

__version__ = "0.1.0"

__all__ = [
    "BackendUnavailable",
    "PROTOCOL_VERSION",
    "REGISTRY",
    "context_hash",
    "create_backend",
    "serve",
]
