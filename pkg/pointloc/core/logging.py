"""Logging setup shared by the CLI commands."""

from __future__ import annotations

import logging

from rich.logging import RichHandler

_PLAIN_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO", fmt: str = "rich") -> None:
    """
    Install a single root handler.

    Args:
        level: Logging level name
        fmt: "rich" for a RichHandler, anything else for a plain stream handler
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    if fmt == "rich":
        handler: logging.Handler = RichHandler(rich_tracebacks=False, show_path=False)
        handler.setFormatter(logging.Formatter("%(message)s"))
    else:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_PLAIN_FORMAT))

    root.addHandler(handler)
    root.setLevel(level.upper())
