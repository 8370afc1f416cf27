"""Command-line front end: batch script execution, a REPL, or the service.

One binary covers all three. `--script` runs a command file and exits;
without it the same verbs are read from standard input (a prompt appears
only on a terminal, so piped input produces byte-identical output to batch
mode). `--serve host:port` starts the HTTP service instead.

Exit codes: 0 ok, 2 usage, 3 input validation, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import InputError, RationaleError
from .session import (
    Answer,
    Session,
    apply_command,
    parse_command,
    render_answer_json,
    render_answer_text,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rationale",
        description="Reason about decision-tree decisions with linear constraints.",
    )
    p.add_argument("--meta", metavar="PATH", help="feature metadata JSON file")
    p.add_argument("--model", metavar="PATH", action="append", default=[],
                   help="tree document to register before the script runs (repeatable)")
    p.add_argument("--script", metavar="PATH", help="command file to execute")
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="answer rendering (default: text)")
    p.add_argument("--serve", metavar="HOST:PORT",
                   help="start the HTTP service and block")
    p.add_argument("--ttl", type=float, default=3600.0,
                   help="service: idle seconds before a session expires")
    p.add_argument("--budget", type=float, default=None,
                   help="service: per-solve time budget in seconds")
    p.add_argument("--cors", metavar="ORIGIN", default=None,
                   help="service: origin allowed to call the API from a browser")
    return p


def _configure_logging() -> None:
    level = os.environ.get("REASON_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def load_json(path: Path):
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}", kind="io") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON: {e}", kind="parse_error") from None


def _renderer(fmt: str):
    if fmt == "json":
        return lambda a: render_answer_json(a) + "\n"
    return render_answer_text


def _execute_line(session: Session, line: str, base: Path, render, out) -> None:
    event = parse_command(line)
    if event is None:
        return
    result = apply_command(
        session, event, load_model_doc=lambda p: load_json(base / p)
    )
    if isinstance(result, Answer):
        out.write(render(result))
        out.flush()
    elif isinstance(result, str):
        out.write(result)
        out.flush()


def run_batch(session: Session, script: Path, render, out, err) -> int:
    try:
        text = script.read_text()
    except FileNotFoundError:
        err.write(f"error: no such file: {script}\n")
        return 3
    for lineno, line in enumerate(text.splitlines(), start=1):
        try:
            _execute_line(session, line, script.parent, render, out)
        except InputError as e:
            err.write(f"error: {script}:{lineno}: {e}\n")
            return 3
    return 0


def run_repl(session: Session, render, out, err, stdin) -> int:
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    while True:
        if interactive:
            out.write("> ")
            out.flush()
        line = stdin.readline()
        if not line:
            if interactive:
                out.write("\n")
            return 0
        try:
            _execute_line(session, line, Path.cwd(), render, out)
        except InputError as e:
            err.write(f"error: {e}\n")
        except RationaleError as e:
            err.write(f"internal error: {e}\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    _configure_logging()
    out, err = sys.stdout, sys.stderr

    if args.serve:
        if args.script:
            err.write("error: --script and --serve are mutually exclusive\n")
            return 2
        host, _, port_text = args.serve.rpartition(":")
        if not host or not port_text.isdigit():
            err.write("error: --serve expects HOST:PORT\n")
            return 2
        from .service import run_server

        try:
            run_server(host, int(port_text), ttl=args.ttl,
                       budget=args.budget, cors=args.cors)
        except KeyboardInterrupt:
            pass
        return 0

    if not args.meta:
        err.write("error: --meta is required unless --serve is given\n")
        return 2

    try:
        session = Session(load_json(Path(args.meta)))
        for mpath in args.model:
            session.model(load_json(Path(mpath)))
    except InputError as e:
        err.write(f"error: {e}\n")
        return 3

    render = _renderer(args.format)
    try:
        if args.script:
            return run_batch(session, Path(args.script), render, out, err)
        return run_repl(session, render, out, err, sys.stdin)
    except InputError as e:
        err.write(f"error: {e}\n")
        return 3
    except RationaleError as e:
        err.write(f"internal error: {e}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
