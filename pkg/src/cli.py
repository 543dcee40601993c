"""
Command-line entry point:

    cantor-index <command> --config <path> [--out <path>] [--format dsv|doc]
                 [--tolerance <float>] [--seed <int>]

Exit status 0 on success, 1 on an invariant violation, 2 on a config error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from config.logging_config import setup_logging
from src import __version__
from src.job_config import ConfigError, JobCommand, OutputFormat, parse_config
from src.jobs import EXIT_CONFIG_ERROR, EXIT_OK, execute

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cantor-index",
        description="Index pairings for C*-algebras of Cantor minimal systems.",
    )
    parser.add_argument("command", choices=[c.value for c in JobCommand], help="Computation to run")
    parser.add_argument("--config", required=True, help="Path of the JSON job document")
    parser.add_argument("--out", default=None, help="Report path (stdout when omitted)")
    parser.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat], default=None)
    parser.add_argument("--tolerance", type=float, default=None, help="Matrix identity tolerance")
    parser.add_argument("--seed", type=int, default=None, help="Seed of the sampling commands")
    parser.add_argument("--log-level", default=None, help="Logging level (default from LOG_LEVEL)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def apply_overrides(document: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    """
    Merge command-line options into a job document.

    The command-line command fills a missing "command" key; a document naming
    a different command is a config error.

    Raises:
        ConfigError: If the document names another command.
    """
    merged = dict(document)
    named = merged.setdefault("command", args.command)
    if named != args.command:
        raise ConfigError([f"command: document is a '{named}' job, not '{args.command}'"])
    if args.out is not None or args.output_format is not None:
        output = dict(merged.get("output") or {})
        if args.out is not None:
            output["path"] = args.out
        if args.output_format is not None:
            output["format"] = args.output_format
        merged["output"] = output
    if args.tolerance is not None:
        merged["tolerance"] = args.tolerance
    if args.seed is not None:
        merged["seed"] = args.seed
    return merged


def _read_document(path: str) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"config: cannot read {path}: {e.strerror}"]) from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"malformed document: {e.msg} at line {e.lineno} column {e.colno}"]) from e
    if not isinstance(document, dict):
        raise ConfigError(["document must be a JSON object"])
    return document


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    # The report may go to stdout, so logs use stderr
    setup_logging(args.log_level, stream=sys.stderr)

    try:
        cfg = parse_config(apply_overrides(_read_document(args.config), args))
    except ConfigError as e:
        diagnostic = {"error": "config_error", "violations": e.violations}
        print(json.dumps(diagnostic, indent=2, sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG_ERROR

    result = execute(cfg)
    if result.path is None:
        sys.stdout.write(result.content)
    if result.status != EXIT_OK:
        print(json.dumps(result.diagnostic, indent=2, sort_keys=True), file=sys.stderr)
    return result.status


__all__ = ["build_parser", "apply_overrides", "main"]
