"""Single-threaded protocol loop: one backend process per client."""

from __future__ import annotations

import json
import sys

from .protocol import PROTOCOL_VERSION, context_hash, error_reply, write_message


def serve(backend, stdin=None, stdout=None) -> int:
    """Run the request loop until shutdown or EOF.

    State machine: a ``predict`` before ``condition`` is a protocol error;
    malformed messages get an error reply and the loop continues.
    """
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    conditioned = False
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError("message is not an object")
        except (json.JSONDecodeError, ValueError) as exc:
            error_reply("protocol", f"malformed message: {exc}", stdout)
            continue

        kind = msg.get("type")
        if kind == "hello":
            if msg.get("protocol") != PROTOCOL_VERSION:
                error_reply(
                    "protocol",
                    f"unsupported protocol {msg.get('protocol')!r}, "
                    f"server speaks {PROTOCOL_VERSION}",
                    stdout,
                )
                continue
            write_message(
                {
                    "type": "hello_ack",
                    "protocol": PROTOCOL_VERSION,
                    "name": backend.name,
                    "version": backend.version,
                },
                stdout,
            )
        elif kind == "condition":
            try:
                schema = msg["schema"]
                rows = msg["rows"]
                labels = msg["labels"]
                row_ids = msg.get("row_ids", list(range(len(rows))))
                backend.condition(schema, rows, labels)
            except Exception as exc:  # noqa: BLE001 - reply, keep serving
                error_reply("condition", f"{type(exc).__name__}: {exc}", stdout)
                continue
            conditioned = True
            write_message(
                {"type": "conditioned", "context_hash": context_hash(row_ids, labels)},
                stdout,
            )
        elif kind == "predict":
            if not conditioned:
                error_reply("protocol", "predict before condition", stdout)
                continue
            try:
                values = [float(v) for v in backend.predict(msg["rows"])]
            except Exception as exc:  # noqa: BLE001
                error_reply("predict", f"{type(exc).__name__}: {exc}", stdout)
                continue
            write_message({"type": "proba", "values": values}, stdout)
        elif kind == "shutdown":
            return 0
        else:
            error_reply("protocol", f"unknown message type {kind!r}", stdout)
    return 0
