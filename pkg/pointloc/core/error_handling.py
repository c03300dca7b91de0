"""
Calm Error Handling
===================

Replaces technical tracebacks with short, actionable feedback on the console
and maps every failure to the exit code contract of the CLI.
"""

from __future__ import annotations

import hashlib
import logging
import traceback

from rich.console import Console
from rich.panel import Panel

from pointloc.core.exceptions import (
    ConfigError,
    DataError,
    NumericError,
    PointLocError,
    TrainingDivergedError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_SUGGESTIONS: list[tuple[type[Exception], str]] = [
    (ConfigError, "Check the keys in your --config file; unknown keys are rejected."),
    (TrainingDivergedError, "Lower the learning rate or inspect the reported batch frames."),
    (DataError, "Verify the manifest and cloud files exist and were written by `pointloc synth`."),
    (NumericError, "Re-run with --debug to see where the computation failed."),
]


def exit_code_for(exc: BaseException) -> int:
    """Return the CLI exit code for an exception."""
    if isinstance(exc, PointLocError):
        return exc.exit_code
    if isinstance(exc, (FileNotFoundError, PermissionError, IsADirectoryError)):
        return EXIT_DATA
    return EXIT_USAGE


def render_cli_error(
    exc: BaseException, debug: bool = False, console: Console | None = None
) -> int:
    """
    Print a calm error panel for a failed command and return its exit code.

    In debug mode the full traceback is printed as well.
    """
    console = console or Console(stderr=True)
    error_id = hashlib.sha1(repr(exc).encode(), usedforsecurity=False).hexdigest()[:8]
    code = exit_code_for(exc)

    logger.error(f"Command failed (ID: {error_id}): {exc}")
    logger.debug(traceback.format_exc())

    if debug:
        console.print(traceback.format_exc())

    suggestion = next(
        (text for kind, text in _SUGGESTIONS if isinstance(exc, kind)),
        "Re-run with --debug for the full traceback.",
    )
    console.print(
        Panel(
            f"{exc}\n\n[yellow]{suggestion}[/yellow]\n[dim]reference: {error_id}[/dim]",
            title=f"[bold red]{type(exc).__name__}[/]",
            border_style="red",
        )
    )
    return code
