"""Atomic file replacement for every artifact the CLI writes."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from pointloc.core.exceptions import DatasetIOError


def atomic_write_bytes(path: str | Path, blob: bytes) -> None:
    """Write through a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(blob)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as exc:
        raise DatasetIOError(f"Cannot write {path}: {exc}") from exc


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
