"""Developer CLI: run demos, generate/check client declarations, and drive
the headless client."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .codegen import generate_client_declarations
from .demos import DEMO_NAMES, DemoConfig, run_demo
from .errors import SceneSyncError
from .protocol import SCHEMA


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenesync",
        description="Imperative 3D visualization server with synchronized clients.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo", help="run a demo scene until interrupted")
    demo.add_argument("name", choices=DEMO_NAMES)
    demo.add_argument("--host", default="127.0.0.1")
    demo.add_argument("--port", type=int, default=8080)

    gen = sub.add_parser("gen-schema", help="write the client type declarations")
    gen.add_argument("out", type=Path, help="output path for the generated .ts file")
    gen.add_argument(
        "--check", action="store_true",
        help="exit 1 if the file differs from what would be generated",
    )

    headless = sub.add_parser("headless", help="headless client tools")
    headless_sub = headless.add_subparsers(dest="headless_command", required=True)
    conn = headless_sub.add_parser("connect", help="connect, sync, and optionally dump state")
    conn.add_argument("url", help="server websocket URL, e.g. ws://127.0.0.1:8080/ws")
    conn.add_argument("--dump-state", action="store_true", help="print the canonical state")
    conn.add_argument("--rtt", type=float, default=0.0, metavar="MS", help="simulated round-trip time")

    return parser


def _cmd_demo(args: argparse.Namespace) -> int:
    config = DemoConfig(name=args.name, host=args.host, port=args.port)
    print(f"serving demo {config.name!r} on http://{config.host}:{config.port} (Ctrl-C to stop)")
    run_demo(config, block=True)
    return 0


def _cmd_gen_schema(args: argparse.Namespace) -> int:
    generated = generate_client_declarations(SCHEMA)
    out: Path = args.out
    if args.check:
        if not out.is_file():
            print(f"{out}: missing; regenerate with `scenesync gen-schema {out}`", file=sys.stderr)
            return 1
        if out.read_text() != generated:
            print(f"{out}: stale; regenerate with `scenesync gen-schema {out}`", file=sys.stderr)
            return 1
        print(f"{out}: up to date")
        return 0
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(generated)
    print(f"wrote {out}")
    return 0


def _cmd_headless_connect(args: argparse.Namespace) -> int:
    from .headless import connect

    session = connect(args.url, rtt_ms=args.rtt)
    try:
        session.wait_quiet(quiet_ms=250.0, timeout=10.0)
        if args.dump_state:
            sys.stdout.write(session.canonical_state())
        else:
            print(f"connected as client {session.client_id}; last seq {session.last_seq}")
    finally:
        session.close()
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "demo":
            return _cmd_demo(args)
        if args.command == "gen-schema":
            return _cmd_gen_schema(args)
        if args.command == "headless":
            return _cmd_headless_connect(args)
    except SceneSyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
