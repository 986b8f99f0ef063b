"""figrunner entry point: --stdio for one-shot piping, --listen for a
unix-socket server with a concurrency cap."""

from __future__ import annotations

import argparse
import logging

from .server import serve_socket, serve_stdio


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figrunner",
        description="sandboxed execution runner for generated diagram code",
    )
    transport = parser.add_mutually_exclusive_group(required=True)
    transport.add_argument("--stdio", action="store_true", help="serve requests over stdio")
    transport.add_argument("--listen", metavar="SOCKET_PATH", help="serve on a unix socket")
    parser.add_argument("--cap", type=int, default=4, help="concurrent executions (socket mode)")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.stdio:
        serve_stdio()
    else:
        serve_socket(args.listen, cap=args.cap)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
