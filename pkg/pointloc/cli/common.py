"""Helpers shared by the CLI command modules."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from rich.console import Console

from pointloc.core.config import get_settings
from pointloc.core.error_handling import render_cli_error
from pointloc.core.exceptions import DatasetIOError, UsageError
from pointloc.core.fileio import atomic_write_text
from pointloc.core.metrics import TrainingMetrics
from pointloc.schemas.config import RunConfig, load_run_config

logger = logging.getLogger(__name__)

err_console = Console(stderr=True)
settings = get_settings()

RESOLVED_CONFIG_NAME = "resolved_config.yaml"

ConfigOption = typer.Option(None, "--config", "-c", help="YAML run configuration")
SeedOption = typer.Option(None, "--seed", help="Run seed")
OutOption = typer.Option(None, "--out", "-o", help="Output directory")


@contextmanager
def reported_errors() -> Iterator[None]:
    """Render failures as a calm panel and exit with the matching code."""
    try:
        yield
    except (typer.Exit, typer.Abort):
        raise
    except Exception as exc:
        code = render_cli_error(exc, settings.debug, err_console)
        raise typer.Exit(code) from exc


def resolve_config(config: Path | None, **overrides: Any) -> RunConfig:
    """Defaults, then the YAML file, then explicit flags; the result is logged."""
    resolved = load_run_config(config, overrides)
    logger.info(f"Resolved configuration:\n{resolved.to_yaml()}")
    return resolved


def require(value: Path | None, key: str) -> Path:
    if value is None:
        raise UsageError(f"No {key} given; pass --{key} or set '{key}' in the config file")
    return value


def prepare_out_dir(cfg: RunConfig) -> Path:
    out = cfg.out_dir
    if out.exists() and not out.is_dir():
        raise DatasetIOError(f"Output path {out} exists and is not a directory")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetIOError(f"Cannot create {out}: {exc}") from exc
    return out


def write_resolved_config(cfg: RunConfig, directory: Path) -> None:
    atomic_write_text(directory / RESOLVED_CONFIG_NAME, cfg.to_yaml())


def new_metrics() -> TrainingMetrics | None:
    return TrainingMetrics() if settings.enable_metrics else None


def write_metrics(metrics: TrainingMetrics | None, directory: Path) -> None:
    if metrics is None:
        return
    path = directory / settings.metrics_filename
    metrics.write(path)
    logger.info(f"Metrics written to {path}")
