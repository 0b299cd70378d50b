"""Wire-protocol primitives shared by every backend.

Messages are JSON objects, one per line, over stdin/stdout:

    -> hello{protocol, name, version}      <- hello_ack{protocol, name, version}
    -> condition{schema, rows, labels,     <- conditioned{context_hash}
                 row_ids}
    -> predict{rows}                       <- proba{values}  (request order)
    -> shutdown                            (process exits)

Errors are replied as error{error, message} and the loop continues. The
context hash is an order-independent sha256 over the (row id, label) pairs,
so client and server can agree regardless of row order.
"""

from __future__ import annotations

import hashlib
import json
import sys

PROTOCOL_VERSION = 1


def context_hash(row_ids, labels) -> str:
    pairs = sorted(f"{int(i)}:{int(l)}" for i, l in zip(row_ids, labels))
    return hashlib.sha256("\n".join(pairs).encode("utf-8")).hexdigest()


def write_message(message: dict, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(message, allow_nan=False, separators=(",", ":")) + "\n")
    stream.flush()


def error_reply(kind: str, message: str, stream=None) -> None:
    write_message({"type": "error", "error": kind, "message": message}, stream)
