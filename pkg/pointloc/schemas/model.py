"""Pydantic schemas describing the network structure."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pointloc.core.exceptions import ConfigError

# Encoder rows: (point num, radius, sample num, MLP widths with input channels first).
ENCODER_TABLE: list[tuple[int, float, int, list[int]]] = [
    (2048, 0.2, 64, [0, 64, 64, 128]),
    (1024, 0.4, 32, [128, 128, 128, 256]),
    (512, 0.8, 16, [256, 128, 128, 256]),
    (256, 1.2, 16, [256, 128, 128, 256]),
]
INPUT_POINTS = 20480
ATTENTION_CHANNELS = 256
GROUP_ALL_MLP = [256, 256, 512, 1024]
GROUP_ALL_FC = 1024
REGRESSOR_WIDTHS = [1024, 512, 128, 64, 3]
LEAKY_SLOPE = 0.2

ScaleName = Literal["full", "small", "tiny"]
AttentionMode = Literal["learned", "ones", "off"]


class SALayerConfig(BaseModel):
    """One set-abstraction layer: centers, neighborhood and shared MLP widths."""

    model_config = ConfigDict(frozen=True)

    name: str = Field("sa", description="Parameter path prefix")
    n_points: int = Field(..., ge=1, description="Region centers sampled by FPS")
    radii: list[float] = Field(..., min_length=1, description="Ball radii in meters, one per scale")
    sample_num: int = Field(..., ge=1, description="Neighbors gathered per region")
    mlp_channels: list[int] = Field(
        ..., min_length=2, description="Input feature channels followed by the MLP widths"
    )

    @field_validator("radii")
    @classmethod
    def _positive_radii(cls, value: list[float]) -> list[float]:
        if any(r <= 0 for r in value):
            raise ValueError("radii must be positive")
        return value

    @property
    def radius(self) -> float:
        return self.radii[0]

    @property
    def in_channels(self) -> int:
        return self.mlp_channels[0]

    @property
    def out_channels(self) -> int:
        return self.mlp_channels[-1] * len(self.radii)


class ModelScale(BaseModel):
    """
    Proportional shrink of the network that keeps the layer structure intact.

    Widths, point counts and sample counts are divided; radii are multiplied so
    sparser desk-scale clouds still produce populated neighborhoods.
    """

    model_config = ConfigDict(frozen=True)

    name: str = "full"
    n_input: int = Field(INPUT_POINTS, ge=1)
    width_divisor: int = Field(1, ge=1)
    point_divisor: int = Field(1, ge=1)
    sample_divisor: int = Field(1, ge=1)
    radius_scale: float = Field(1.0, gt=0)
    radius_multipliers: list[float] = Field(
        default_factory=lambda: [1.0],
        min_length=1,
        description="Multi-scale grouping hook: one branch per multiplier",
    )

    @classmethod
    def preset(cls, name: str, radius_multipliers: list[float] | None = None) -> ModelScale:
        """Build a named preset."""
        presets: dict[str, dict[str, object]] = {
            "full": {},
            "small": {"n_input": 4096, "width_divisor": 4, "point_divisor": 4, "sample_divisor": 2,
                      "radius_scale": 2.0},
            "tiny": {"n_input": 256, "width_divisor": 8, "point_divisor": 16, "sample_divisor": 4,
                     "radius_scale": 4.0},
        }
        if name not in presets:
            raise ConfigError(f"Unknown model scale '{name}' (expected one of {sorted(presets)})")
        extra: dict[str, object] = {}
        if radius_multipliers is not None:
            extra["radius_multipliers"] = radius_multipliers
        return cls(name=name, **presets[name], **extra)

    @model_validator(mode="after")
    def _enough_points(self) -> ModelScale:
        first = max(1, ENCODER_TABLE[0][0] // self.point_divisor)
        if first > self.n_input:
            raise ValueError(
                f"First encoder layer samples {first} centers from only {self.n_input} points"
            )
        return self

    def width(self, channels: int) -> int:
        return max(1, channels // self.width_divisor)

    def sa_layers(self) -> list[SALayerConfig]:
        """Encoder layer configs with chained channel counts."""
        layers: list[SALayerConfig] = []
        in_channels = 0
        for index, (n_points, radius, sample_num, mlp) in enumerate(ENCODER_TABLE, start=1):
            widths = [self.width(c) for c in mlp[1:]]
            layer = SALayerConfig(
                name=f"sa{index}",
                n_points=max(1, n_points // self.point_divisor),
                radii=[radius * self.radius_scale * m for m in self.radius_multipliers],
                sample_num=max(1, sample_num // self.sample_divisor),
                mlp_channels=[in_channels, *widths],
            )
            layers.append(layer)
            in_channels = layer.out_channels
        return layers

    @property
    def attention_channels(self) -> int:
        return self.sa_layers()[-1].out_channels

    @property
    def group_all_mlp(self) -> list[int]:
        return [self.attention_channels, *[self.width(c) for c in GROUP_ALL_MLP[1:]]]

    @property
    def group_all_fc(self) -> int:
        return self.width(GROUP_ALL_FC)

    @property
    def regressor_widths(self) -> list[int]:
        return [self.group_all_fc, *[self.width(c) for c in REGRESSOR_WIDTHS[1:-1]], 3]
