"""Client for external predictor backends over a line-delimited protocol.

A backend is a child process speaking JSON objects, one per line, on
stdin/stdout: ``hello``/``hello_ack`` handshake, ``condition`` answered by
``conditioned`` (carrying an order-independent context hash both sides can
compute), ``predict`` answered by ``proba`` with values in request order,
then ``shutdown``. Floats are serialized with full round-trip precision.
The window and queries travel raw (values plus schema), not encoded:
feature handling is the backend's concern.
"""

from __future__ import annotations

import hashlib
import json
import queue
import subprocess
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BackendError, ContractError, ProtocolError
from .strategies import ContextWindow
from .tabular import ColumnKind, Table

PROTOCOL_VERSION = 1
CLIENT_NAME = "ctxbench"


@dataclass(frozen=True)
class ExternalBackendDescriptor:
    """How to launch and talk to one backend process."""

    command: tuple[str, ...]
    name: str = "external"
    protocol_version: int = PROTOCOL_VERSION
    handshake_timeout: float = 10.0
    batch_timeout: float = 60.0


def context_hash(row_ids: Sequence[int], labels: Sequence[int]) -> str:
    """Order-independent digest of the conditioning (id, label) pairs."""
    pairs = sorted(f"{int(i)}:{int(l)}" for i, l in zip(row_ids, labels))
    return hashlib.sha256("\n".join(pairs).encode("utf-8")).hexdigest()


def _json_value(kind: ColumnKind, v):
    if kind is ColumnKind.NUMERIC:
        f = float(v)
        return None if np.isnan(f) else f
    if kind is ColumnKind.TIMESTAMP:
        return None if np.isnat(v) else str(np.datetime64(v, "s"))
    return v  # str | None


def table_payload(table: Table) -> tuple[list[dict], list[list]]:
    """(schema, rows) for the wire: label column excluded."""
    schema = [
        {"name": n, "kind": k.value}
        for n, k in zip(table.names, table.kinds)
        if n != table.label
    ]
    cols = [
        (table.column(n), k)
        for n, k in zip(table.names, table.kinds)
        if n != table.label
    ]
    rows = [
        [_json_value(kind, col[i]) for col, kind in cols]
        for i in range(table.n_rows)
    ]
    return schema, rows


class BackendClient:
    """One live backend process; implements the client side of the protocol."""

    def __init__(self, descriptor: ExternalBackendDescriptor):
        self.descriptor = descriptor
        try:
            self._proc = subprocess.Popen(
                list(descriptor.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BackendError(f"cannot launch backend: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self.backend_name = ""
        self.backend_version = ""
        self._handshake()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def _send(self, message: dict) -> None:
        try:
            self._proc.stdin.write(
                json.dumps(message, allow_nan=False, separators=(",", ":")) + "\n"
            )
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendError(f"backend pipe closed: {exc}") from exc

    def _recv(self, timeout: float) -> dict:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise BackendError(
                f"backend timed out after {timeout}s"
            ) from None
        if line is None:
            raise BackendError("backend closed its output stream")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(f"malformed backend reply: {line!r}") from None
        if not isinstance(msg, dict) or "type" not in msg:
            raise ProtocolError(f"backend reply has no type: {line!r}")
        if msg["type"] == "error":
            raise ProtocolError(f"backend error reply: {msg.get('message', '')}")
        return msg

    def _handshake(self) -> None:
        self._send(
            {
                "type": "hello",
                "protocol": self.descriptor.protocol_version,
                "name": CLIENT_NAME,
                "version": "0.1.0",
            }
        )
        ack = self._recv(self.descriptor.handshake_timeout)
        if ack["type"] != "hello_ack":
            raise ProtocolError(f"expected hello_ack, got {ack['type']!r}")
        if ack.get("protocol") != self.descriptor.protocol_version:
            raise BackendError(
                f"protocol version mismatch: client "
                f"{self.descriptor.protocol_version}, backend {ack.get('protocol')}"
            )
        self.backend_name = str(ack.get("name", ""))
        self.backend_version = str(ack.get("version", ""))

    def condition(self, window: ContextWindow) -> str:
        schema, rows = table_payload(window.rows)
        labels = window.rows.labels().tolist()
        ids = window.rows.row_ids.tolist()
        self._send(
            {
                "type": "condition",
                "schema": schema,
                "rows": rows,
                "labels": labels,
                "row_ids": ids,
            }
        )
        reply = self._recv(self.descriptor.batch_timeout)
        if reply["type"] != "conditioned":
            raise ProtocolError(f"expected conditioned, got {reply['type']!r}")
        expected = context_hash(ids, labels)
        got = reply.get("context_hash")
        if got != expected:
            raise ProtocolError(
                f"context hash mismatch: client {expected[:12]}, backend {str(got)[:12]}"
            )
        return expected

    def predict(self, queries: Table) -> np.ndarray:
        _, rows = table_payload(queries)
        self._send({"type": "predict", "rows": rows})
        reply = self._recv(self.descriptor.batch_timeout)
        if reply["type"] != "proba":
            raise ProtocolError(f"expected proba, got {reply['type']!r}")
        values = reply.get("values")
        if not isinstance(values, list) or len(values) != queries.n_rows:
            raise ProtocolError(
                f"proba values malformed: expected {queries.n_rows} floats"
            )
        out = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(out)):
            raise ProtocolError("proba values must be finite")
        return out

    def shutdown(self) -> None:
        if self._proc.poll() is None:
            try:
                self._send({"type": "shutdown"})
            except BackendError:
                pass
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._proc.stdin:
            self._proc.stdin.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


@dataclass(frozen=True)
class ExternalState:
    client: BackendClient
    context_digest: str
    warnings: tuple[str, ...] = ()

    def close(self) -> None:
        self.client.shutdown()


class ExternalPredictor:
    """Predictor-contract adapter around a backend descriptor.

    ``condition`` launches a fresh process per call; the caller (normally
    the harness) closes the state when the cell is done.
    """

    def __init__(self, descriptor: ExternalBackendDescriptor):
        self.descriptor = descriptor
        self.name = descriptor.name
        self.version = ""

    def condition(self, window: ContextWindow) -> ExternalState:
        client = BackendClient(self.descriptor)
        digest = client.condition(window)
        self.name = client.backend_name or self.descriptor.name
        self.version = client.backend_version
        return ExternalState(client=client, context_digest=digest)

    def predict_proba(self, state: ExternalState, queries: Table) -> np.ndarray:
        return state.client.predict(queries)


# -- conformance ------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _toy_window(n: int = 4) -> ContextWindow:
    from .predictors import window_from_arrays

    X = np.arange(n * 2, dtype=np.float64).reshape(n, 2)
    y = np.array([0, 1] * (n // 2) + [1] * (n % 2), dtype=np.int64)
    return window_from_arrays(X, y)


def run_conformance(
    descriptor: ExternalBackendDescriptor,
    expect_window_frequency: bool = False,
) -> list[CheckResult]:
    """Protocol conformance checks any backend must pass.

    Covers the handshake, context-hash agreement, prediction count/order
    discipline, float round-tripping, and clean shutdown. With
    ``expect_window_frequency`` (echo-style fixtures), predictions must
    equal the conditioning window's class-1 frequency.
    """
    results: list[CheckResult] = []
    window = _toy_window()
    queries = window.rows
    expected_constant = (
        window.n_minority / window.rows.n_rows if expect_window_frequency else None
    )

    def check(name: str, fn) -> bool:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report, don't crash the suite
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
            return False
        results.append(CheckResult(name, True))
        return True

    client_box: dict = {}

    def _handshake():
        client_box["c"] = BackendClient(descriptor)
        if not client_box["c"].backend_name:
            raise ProtocolError("hello_ack carries no backend name")

    if not check("handshake", _handshake):
        return results
    client: BackendClient = client_box["c"]

    check("context-hash-agreement", lambda: client.condition(window))

    def _predict_shape():
        values = client.predict(queries)
        if len(values) != queries.n_rows:
            raise ProtocolError("wrong number of probabilities")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ContractError("probabilities outside [0, 1]")
        client_box["values"] = values

    check("prediction-count-and-range", _predict_shape)

    def _precision_round_trip():
        probe = 0.12345678901234567  # full float64 round trip
        encoded = json.dumps(probe)
        if json.loads(encoded) != probe:
            raise ProtocolError("client float serialization is lossy")
        values = client_box.get("values")
        if values is not None and len(values):
            re_encoded = json.loads(json.dumps(values.tolist()))
            if not np.array_equal(np.asarray(re_encoded), values):
                raise ProtocolError("backend values do not round trip")

    check("float-round-trip", _precision_round_trip)

    if expected_constant is not None:

        def _expected():
            values = client_box["values"]
            if not np.allclose(values, expected_constant, atol=1e-12):
                raise ContractError(
                    f"expected constant {expected_constant}, got {values[:3]}"
                )

        check("echo-frequency-value", _expected)

    def _repeat_predict_deterministic():
        again = client.predict(queries)
        if not np.array_equal(again, client_box["values"]):
            raise ContractError("repeated predict returned different values")

    check("repeat-predict-deterministic", _repeat_predict_deterministic)

    check("shutdown", client.shutdown)
    return results
