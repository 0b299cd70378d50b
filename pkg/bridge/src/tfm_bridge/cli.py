"""tfm-bridge command line: serve a backend or list what is registered."""

from __future__ import annotations

import argparse
import sys

from .backends import REGISTRY, BackendUnavailable, create_backend
from .protocol import error_reply
from .server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tfm-bridge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="speak the protocol on stdin/stdout")
    p.add_argument("backend", help="registered backend name")

    sub.add_parser("list", help="print registered backend names")

    args = parser.parse_args(argv)
    if args.command == "list":
        for name in sorted(REGISTRY):
            print(name)
        return 0

    try:
        backend = create_backend(args.backend)
    except (KeyError, BackendUnavailable) as exc:
        error_reply("backend", str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return serve(backend)


if __name__ == "__main__":
    sys.exit(main())
