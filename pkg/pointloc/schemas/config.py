"""Pydantic schemas for run configuration."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from pointloc.core.config import get_settings
from pointloc.core.exceptions import ConfigError
from pointloc.schemas.model import AttentionMode, ModelScale, ScaleName

logger = logging.getLogger(__name__)

Aggregate = Literal["mean", "median"]
EvalSplit = Literal["train", "val", "test"]


class TrainConfig(BaseModel):
    """Training protocol: Adam at a constant learning rate, seeded shuffling."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = Field(100, ge=1, description="Passes over the training split")
    lr: float = Field(1e-3, gt=0, description="Adam learning rate")
    batch_size: int = Field(16, ge=1, description="Samples per optimizer step")
    seed: int = Field(0, ge=0, description="Initialization, shuffling and resampling seed")
    model_scale: ScaleName = Field("full", description="Network size preset")
    checkpoint_every: int = Field(10, ge=1, description="Epochs between checkpoints")
    max_steps: int | None = Field(None, ge=1, description="Stop after this many optimizer steps")
    workers: int = Field(1, ge=1, description="Threads computing per-sample gradients")
    attention: AttentionMode = Field("learned", description="learned, ones or off")
    msg_radius_multipliers: list[float] | None = Field(
        None, description="One SA branch per multiplier of the layer radius"
    )

    def scale(self) -> ModelScale:
        return ModelScale.preset(self.model_scale, self.msg_radius_multipliers)


class RunConfig(BaseModel):
    """
    Flat configuration shared by every command.

    Unknown keys are rejected. Values resolve as defaults, then the ``--config``
    YAML file, then explicit command-line flags.
    """

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0)

    # Paths
    out_dir: Path = Path("runs/latest")
    manifest: Path | None = None
    checkpoint: Path | None = None
    resume: Path | None = None

    # Training
    epochs: int = Field(100, ge=1)
    lr: float = Field(1e-3, gt=0)
    batch_size: int = Field(16, ge=1)
    checkpoint_every: int = Field(10, ge=1)
    max_steps: int | None = Field(None, ge=1)
    workers: int = Field(default_factory=lambda: get_settings().default_workers, ge=1)

    # Model
    model_scale: ScaleName = "full"
    attention: AttentionMode = "learned"
    msg_radius_multipliers: list[float] | None = None

    # Sensor simulation
    n_poses: int = Field(64, ge=1)
    beams: int = Field(32, ge=1)
    azimuth_steps: int = Field(360, ge=1)
    noise_sigma: float = Field(0.01, ge=0)
    vertical_fov_deg: float = Field(40.0, gt=0, le=180)
    max_range: float | None = Field(None, gt=0)

    # Evaluation
    split: EvalSplit = "test"
    aggregate: Aggregate = "median"
    eval_seed: int = Field(default_factory=lambda: get_settings().eval_seed, ge=0)

    # Gradient check
    gradcheck_coords: int = Field(6, ge=1, description="Coordinates sampled per tensor")
    gradcheck_eps: float = Field(1e-5, gt=0)
    gradcheck_tolerance: float = Field(1e-4, gt=0)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            lr=self.lr,
            batch_size=self.batch_size,
            seed=self.seed,
            model_scale=self.model_scale,
            checkpoint_every=self.checkpoint_every,
            max_steps=self.max_steps,
            workers=self.workers,
            attention=self.attention,
            msg_radius_multipliers=self.msg_radius_multipliers,
        )

    def scale(self) -> ModelScale:
        return ModelScale.preset(self.model_scale, self.msg_radius_multipliers)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        key = ".".join(str(loc) for loc in error["loc"]) or "<root>"
        if error["type"] == "extra_forbidden":
            parts.append(f"unknown key '{key}'")
        else:
            parts.append(f"{key}: {error['msg']}")
    return "; ".join(parts)


def load_run_config(
    path: Path | None = None, overrides: dict[str, Any] | None = None
) -> RunConfig:
    """
    Resolve a RunConfig from an optional YAML file plus flag overrides.

    Override values of None mean "flag not given" and are skipped.

    Raises:
        ConfigError: On unreadable files, unknown keys or invalid values
    """
    values: dict[str, Any] = {}
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"Cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"Config {path} is not valid YAML: {exc}") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config {path} must be a mapping of keys to values")
        values.update({str(key).replace("-", "_"): value for key, value in loaded.items()})

    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return RunConfig.model_validate(values)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration: {_format_validation_error(exc)}") from exc
